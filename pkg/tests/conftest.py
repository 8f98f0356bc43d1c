import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fatigued_pagerank.graph import toy_graph  # noqa: E402

DATA = Path(__file__).resolve().parents[1] / "src" / "fatigued_pagerank" / "data"

# criterion number -> list of (part title, outcome)
_criteria: dict[int, list[tuple[str, str]]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        number, title = marker.args
        _criteria.setdefault(number, []).append((title, rep.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        parts = _criteria[number]
        failed = [t for t, o in parts if o != "passed"]
        status = "FAIL" if failed else "PASS"
        line = f"[{status}] criterion {number}: " + "; ".join(t for t, _ in parts)
        if failed:
            line += " (failed: " + "; ".join(failed) + ")"
        terminalreporter.write_line(line)


@pytest.fixture
def toy():
    return toy_graph()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def data_dir():
    return DATA
