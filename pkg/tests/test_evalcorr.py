import io
import logging

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fatigued_pagerank.evalcorr import (
    CSV_HEADER,
    UndefinedCorrelationError,
    average_ranks,
    correlation_at_cuts,
    pearson,
    population_variance,
    spearman,
    top_k,
    write_reports_csv,
)
from fatigued_pagerank.explorer import ExplorerConfig, simulate_surfer
from fatigued_pagerank.ingest import read_edge_tsv
from oracles import brute_pearson, brute_ranks, brute_spearman, dense_pagerank, two_pass_variance


def tied_vector(rng, n):
    # small integer range so ties are common
    return rng.integers(0, max(2, n // 3), n).astype(float)


def test_pearson_hand_example():
    # deviations (-1, 0, 1) and (-7/3, -1/3, 8/3): Sxy = 5, Sxx = 2, Syy = 114/9
    expected = 5 / np.sqrt(2 * 114 / 9)
    assert expected == pytest.approx(0.9934, abs=1e-4)
    assert pearson([1, 2, 3], [2, 4, 7]) == pytest.approx(expected, abs=1e-12)
    assert brute_pearson([1, 2, 3], [2, 4, 7]) == pytest.approx(expected, abs=1e-12)


def test_spearman_hand_example_with_ties():
    assert spearman([1, 2, 2, 3], [1, 2, 3, 4]) == pytest.approx(0.9487, abs=1e-4)


def test_trivial_coefficients(rng):
    x = rng.random(20)
    assert pearson(x, x) == pytest.approx(1.0, abs=1e-12)
    assert pearson(x, -x) == pytest.approx(-1.0, abs=1e-12)
    assert spearman(x, -x) == pytest.approx(-1.0, abs=1e-12)


def test_average_ranks_ties():
    assert average_ranks([10, 20, 20, 30]).tolist() == [1, 2.5, 2.5, 4]
    assert average_ranks([5, 5, 5]).tolist() == [2, 2, 2]


def test_constant_input_is_undefined():
    with pytest.raises(UndefinedCorrelationError):
        pearson([1, 1, 1], [1, 2, 3])
    with pytest.raises(UndefinedCorrelationError):
        spearman([1, 2, 3], [4, 4, 4])


@pytest.mark.parametrize("x, y", [([1], [1]), ([1, 2], [1, 2, 3]), ([1, np.nan], [1, 2])])
def test_bad_input(x, y):
    with pytest.raises(ValueError):
        pearson(x, y)


@pytest.mark.parametrize("seed", range(20))
def test_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 60))
    x, y = tied_vector(rng, n), rng.random(n)
    if x.min() == x.max():
        x[0] += 1
    assert average_ranks(x).tolist() == brute_ranks(x.tolist())
    assert abs(pearson(x, y) - brute_pearson(x.tolist(), y.tolist())) <= 1e-10
    assert abs(spearman(x, y) - brute_spearman(x.tolist(), y.tolist())) <= 1e-10


@settings(max_examples=100, deadline=None)
@given(
    st.lists(st.integers(-20, 20), min_size=3, max_size=40),
    st.integers(0, 2**32 - 1),
    st.sampled_from(["exp", "cube", "affine"]),
)
def test_spearman_monotone_invariance(xs, seed, kind):
    x = np.array(xs, dtype=float)
    y = np.random.default_rng(seed).random(len(x))
    if x.min() == x.max():
        return
    f = {"exp": lambda v: np.exp(v / 10), "cube": lambda v: v**3, "affine": lambda v: 3 * v + 7}[kind]
    assert spearman(f(x), np.log(y + 1)) == pytest.approx(spearman(x, y), abs=1e-12)


def test_top_k_tie_break():
    assert top_k([0.5, 0.9, 0.5, 0.9, 0.1], 4).tolist() == [1, 3, 0, 2]


def test_cuts_equal_to_n_reproduce_overall(rng):
    n = 80
    s, v = rng.random(n), tied_vector(rng, n)
    rep = correlation_at_cuts(s, v, cuts=[n])
    assert rep.pearson_at_k[0] == rep.overall_pearson
    assert rep.spearman_at_k[0] == rep.overall_spearman
    assert rep.variance_pearson == 0.0


def test_scores_equal_visits(rng):
    v = rng.random(200)
    rep = correlation_at_cuts(v, v, cuts=[10, 25, 100, 200])
    assert all(s == pytest.approx(1.0, abs=1e-12) for s in rep.spearman_at_k)
    assert rep.variance_spearman == pytest.approx(0.0, abs=1e-20)


def test_oversized_cut_skipped_with_warning(rng, caplog):
    with caplog.at_level(logging.WARNING):
        rep = correlation_at_cuts(rng.random(30), rng.random(30), cuts=[10, 25, 100])
    assert rep.cut_sizes == [10, 25]
    assert "exceeds" in caplog.text


def test_constant_slice_is_missing_and_excluded():
    scores = np.arange(10, 0, -1, dtype=float)
    visits = np.array([5, 5, 5, 1, 2, 3, 4, 8, 9, 0], dtype=float)
    rep = correlation_at_cuts(scores, visits, cuts=[3, 10])
    assert rep.pearson_at_k[0] is None and rep.spearman_at_k[0] is None
    assert rep.pearson_at_k[1] is not None
    assert rep.variance_pearson == 0.0


def test_variance_matches_two_pass(rng):
    n = 500
    s, v = rng.random(n), rng.random(n) + rng.random(n)
    rep = correlation_at_cuts(s, v, cuts=[10, 25, 100, 250, 500])
    assert abs(rep.variance_pearson - two_pass_variance(rep.pearson_at_k)) <= 1e-12
    assert abs(rep.variance_spearman - two_pass_variance(rep.spearman_at_k)) <= 1e-12
    assert population_variance([1.0, 3.0]) == 1.0


def test_coefficients_bounded(rng):
    rep = correlation_at_cuts(rng.random(300), rng.random(300), cuts=[10, 100, 300])
    for c in rep.pearson_at_k + rep.spearman_at_k:
        assert -1 <= c <= 1
    assert rep.variance_pearson >= 0 and rep.variance_spearman >= 0


def test_synthetic_graph_pagerank_tracks_simulated_visits(data_dir):
    g = read_edge_tsv(data_dir / "synthetic100.tsv")
    assert g.num_nodes == 100
    scores = dense_pagerank(g.to_dense())
    steps = 2_000_000
    visits = simulate_surfer(g, ExplorerConfig(steps=steps, rng_seed=11)).values * steps
    rep = correlation_at_cuts(scores, visits, cuts=[10, 25, 100])
    assert rep.spearman_at_k[-1] >= 0.95


def test_csv_output():
    rep = correlation_at_cuts([3.0, 2.0, 1.0, 0.0], [4.0, 3.0, 1.0, 2.0], cuts=[2, 4], metric_name="pr")
    buf = io.StringIO()
    write_reports_csv(buf, [rep])
    lines = buf.getvalue().splitlines()
    assert lines[0] == ",".join(CSV_HEADER)
    assert lines[1] == "pr,2,1,1,,"
    assert lines[-1].startswith("pr,all,")
    assert len(lines) == 4
