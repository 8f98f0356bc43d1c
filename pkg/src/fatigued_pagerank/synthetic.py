"""Deterministic random graphs for tests and benchmarks."""

from __future__ import annotations

import numpy as np

from .graph import SparseGraph


def scale_free_graph(num_nodes: int, num_edges: int, exponent: float = 0.8, seed: int = 0) -> SparseGraph:
    """Directed graph with heavy-tailed in- and out-degrees.

    Both endpoints are drawn with probability proportional to
    ``(rank + 1) ** -exponent`` over independent random node permutations.
    Duplicates are merged, so the result has slightly fewer than
    ``num_edges`` edges; self-loops are dropped.
    """
    rng = np.random.default_rng(seed)
    weights = np.arange(1, num_nodes + 1, dtype=np.float64) ** -exponent
    cdf = np.cumsum(weights)
    cdf /= cdf[-1]
    out_perm = rng.permutation(num_nodes)
    in_perm = rng.permutation(num_nodes)
    src = out_perm[np.searchsorted(cdf, rng.random(num_edges), side="right").clip(max=num_nodes - 1)]
    tgt = in_perm[np.searchsorted(cdf, rng.random(num_edges), side="right").clip(max=num_nodes - 1)]
    return SparseGraph.from_arrays(src, tgt, num_nodes, drop_self_loops=True)


def random_graph(num_nodes: int, edge_probability: float, seed: int = 0, self_loops: bool = False) -> SparseGraph:
    """Erdos-Renyi style directed graph (dense sampling, small graphs only)."""
    rng = np.random.default_rng(seed)
    mask = rng.random((num_nodes, num_nodes)) < edge_probability
    if not self_loops:
        np.fill_diagonal(mask, False)
    src, tgt = np.nonzero(mask)
    return SparseGraph.from_arrays(src, tgt, num_nodes)
