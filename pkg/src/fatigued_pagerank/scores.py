"""Score vectors aligned to node-id order, and their TSV serialization."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import IO, Sequence

import numpy as np

KINDS = (
    "pagerank",
    "fatigued_pagerank",
    "reverse_pagerank",
    "authority",
    "hub",
    "indegree",
    "fatigue",
    "visits",
    "surfer",
    "explorer",
)


@dataclass(frozen=True, eq=False)
class ScoreVector:
    values: np.ndarray
    kind: str = field(default="pagerank")

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown score kind {self.kind!r}")
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1:
            raise ValueError("score values must be one-dimensional")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, i):
        return self.values[i]

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def ranking(self) -> np.ndarray:
        """Node ids by descending score, ties by ascending node id."""
        return np.lexsort((np.arange(len(self.values)), -self.values))


def format_score(x: float) -> str:
    return format(float(x), ".12g")


def write_scores(fh: IO[str], labels: Sequence[str], scores, sort: bool = True) -> None:
    """``label<TAB>score`` lines, descending by score unless ``sort`` is off."""
    values = np.asarray(scores, dtype=np.float64)
    order = np.lexsort((np.arange(len(values)), -values)) if sort else range(len(values))
    for i in order:
        fh.write(f"{labels[i]}\t{format_score(values[i])}\n")


def read_scores(fh: IO[str]) -> dict[str, float]:
    """Inverse of :func:`write_scores`. Keeps file order; duplicate labels are an error."""
    from .graph import GraphFormatError

    out: dict[str, float] = {}
    for lineno, line in enumerate(fh, start=1):
        line = line.rstrip("\r\n")
        if not line or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 2:
            raise GraphFormatError(f"expected label<TAB>score, got {len(fields)} fields", lineno)
        if fields[0] in out:
            raise GraphFormatError(f"duplicate label {fields[0]!r}", lineno)
        try:
            out[fields[0]] = float(fields[1])
        except ValueError:
            raise GraphFormatError(f"score {fields[1]!r} is not a number", lineno) from None
    return out
