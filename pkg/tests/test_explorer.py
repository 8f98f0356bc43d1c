import logging

import numpy as np
import pytest

from fatigued_pagerank.centrality import RankingConfig, fatigued_pagerank, pagerank
from fatigued_pagerank.evalcorr import spearman
from fatigued_pagerank.explorer import (
    ExplorerConfig,
    bit_generator,
    merge_frequencies,
    simulate_explorer,
    simulate_many,
    simulate_surfer,
    uniform_stream,
)
from fatigued_pagerank.graph import SparseGraph, build_graph

log = logging.getLogger(__name__)

RAW_SEED0 = [0xA30FEBCFD9C2825F, 0x4510BDF882D9D721, 0x0A7D3DA94ECDE8B8, 0x043B27B61342F01D]
DOUBLES_SEED0 = [0.6369616873214543, 0.2697867137638703, 0.04097352393619469, 0.016527635528529094]


def complete_graph(n):
    return build_graph([(str(s), str(t)) for s in range(n) for t in range(n) if s != t])


def test_prng_raw_words():
    assert bit_generator(0).random_raw(4).tolist() == RAW_SEED0


def test_prng_doubles():
    stream = uniform_stream(0)
    got = [next(stream) for _ in range(4)]
    assert got == DOUBLES_SEED0
    assert got == [(x >> 11) * 2.0**-53 for x in RAW_SEED0]


def test_stream_crosses_chunk_boundary():
    small = uniform_stream(7, chunk=3)
    big = uniform_stream(7)
    assert [next(small) for _ in range(10)] == [next(big) for _ in range(10)]


@pytest.mark.parametrize(
    "kwargs", [{"steps": 0}, {"alpha": 0.0}, {"alpha": 1.0}, {"fatigue_span": -1}, {"rng_seed": -1}, {"steps": 1.5}]
)
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        ExplorerConfig(**kwargs)


def test_surfer_complete_graph():
    f = simulate_surfer(complete_graph(4), ExplorerConfig(steps=1_000_000))
    assert np.max(np.abs(f.values - 0.25)) < 0.01


def test_surfer_toy_matches_pagerank(toy):
    f = simulate_surfer(toy, ExplorerConfig(steps=1_000_000, rng_seed=0))
    r, _ = pagerank(toy, RankingConfig(epsilon=1e-12))
    assert np.max(np.abs(f.values - r.values)) < 0.01


def test_same_seed_same_output(toy):
    cfg = ExplorerConfig(steps=20_000, rng_seed=42)
    np.testing.assert_array_equal(simulate_surfer(toy, cfg).values, simulate_surfer(toy, cfg).values)
    np.testing.assert_array_equal(simulate_explorer(toy, cfg).values, simulate_explorer(toy, cfg).values)


def test_different_seeds_differ(toy):
    a = simulate_surfer(toy, ExplorerConfig(steps=20_000, rng_seed=1))
    b = simulate_surfer(toy, ExplorerConfig(steps=20_000, rng_seed=2))
    assert not np.array_equal(a.values, b.values)


def test_span_zero_is_the_surfer(toy):
    cfg = ExplorerConfig(steps=50_000, fatigue_span=0, rng_seed=3)
    np.testing.assert_array_equal(simulate_explorer(toy, cfg).values, simulate_surfer(toy, cfg).values)


def test_two_cycle_span_one_forces_teleport():
    g = build_graph([("a", "b"), ("b", "a")])
    f = simulate_explorer(g, ExplorerConfig(steps=200_000, fatigue_span=1))
    np.testing.assert_allclose(f.values, 0.5, atol=0.01)
    # the surfer on the same cycle also sits at 0.5 but by following links
    assert f.kind == "explorer"


def test_explorer_avoids_recent_node():
    # a -> b, b -> {a, c}, c -> a: with span 1 the walk from b may never go back to a
    g = build_graph([("a", "b"), ("b", "a"), ("b", "c"), ("c", "a")])
    alpha = 0.999999
    f_surf = simulate_surfer(g, ExplorerConfig(steps=100_000, alpha=alpha))
    f_expl = simulate_explorer(g, ExplorerConfig(steps=100_000, alpha=alpha, fatigue_span=1))
    c = g.node_id("c")
    # surfer reaches c on half of the visits to b, the explorer on all of them
    assert f_expl.values[c] > f_surf.values[c] + 0.1
    assert f_expl.values[c] == pytest.approx(1 / 3, abs=0.01)


def test_self_loop_is_not_blocked():
    g = build_graph([("a", "a")])
    f = simulate_explorer(g, ExplorerConfig(steps=1000, fatigue_span=3))
    assert f.values.tolist() == [1.0]


@pytest.mark.parametrize("mode", ["surfer", "explorer"])
@pytest.mark.parametrize("steps", [1, 7, 10_000])
def test_frequencies_are_a_distribution(toy, mode, steps):
    sim = simulate_surfer if mode == "surfer" else simulate_explorer
    f = sim(toy, ExplorerConfig(steps=steps))
    assert abs(f.values.sum() - 1) < 1e-9
    assert f.values.min() >= 0


def test_edgeless_graph_walks_uniformly():
    g = SparseGraph.from_arrays(np.array([], dtype=np.int64), np.array([], dtype=np.int64), 3)
    f = simulate_surfer(g, ExplorerConfig(steps=60_000))
    np.testing.assert_allclose(f.values, 1 / 3, atol=0.01)


@pytest.mark.parametrize("seed", range(3))
def test_surfer_error_bound_random_graphs(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(5, 51))
    edges = [(s, t) for s in range(n) for t in range(n) if s != t and rng.random() < 0.15]
    g = SparseGraph.from_arrays(np.array([e[0] for e in edges]), np.array([e[1] for e in edges]), n)
    steps = 400_000
    f = simulate_surfer(g, ExplorerConfig(steps=steps, rng_seed=seed))
    r, _ = pagerank(g, RankingConfig(epsilon=1e-12))
    assert np.max(np.abs(f.values - r.values)) < 5 / np.sqrt(steps)


def test_merge_frequencies():
    a = np.array([1.0, 0.0])
    b = np.array([0.0, 1.0])
    np.testing.assert_allclose(merge_frequencies([a, b], [1, 3]), [0.25, 0.75])


@pytest.mark.parametrize("workers", [1, 2])
def test_simulate_many_matches_sequential_merge(toy, workers):
    cfg = ExplorerConfig(steps=5_000)
    merged = simulate_many(toy, cfg, [1, 2, 3], mode="explorer", workers=workers)
    singles = [simulate_explorer(toy, ExplorerConfig(steps=5_000, rng_seed=s)).values for s in (1, 2, 3)]
    np.testing.assert_allclose(merged.values, np.mean(singles, axis=0), atol=1e-15)
    with pytest.raises(ValueError):
        simulate_many(toy, cfg, [1], mode="bogus")


def test_explorer_vs_fatigued_pagerank_logged(toy):
    f = simulate_explorer(toy, ExplorerConfig(steps=1_000_000, fatigue_span=2))
    r, _ = fatigued_pagerank(toy, RankingConfig(epsilon=1e-12))
    rho = spearman(f.values, r.values)
    log.info("toy explorer(span 2) vs fatigued PageRank: spearman=%.4f", rho)
    print(f"explorer vs fatigued_pagerank spearman on toy graph: {rho:.4f}")
    assert -1.0 <= rho <= 1.0
