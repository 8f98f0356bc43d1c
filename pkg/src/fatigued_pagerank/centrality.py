"""Link-analysis scores: PageRank, Reverse PageRank, Fatigued PageRank, HITS, indegree.

All iterations work on the sparse column-normalized matrix ``H`` plus the
sink mask; the dense Markov matrix is never formed. Each step is

    r' = alpha * H r + teleport terms

where the teleport terms are rank-one corrections computed from two
scalars (total mass and sink mass) of the current vector.
"""

from __future__ import annotations

import enum
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .graph import SparseGraph, indegree, reverse
from .scores import ScoreVector

log = logging.getLogger(__name__)


class EmptyGraphError(ValueError):
    pass


class SinkMode(str, enum.Enum):
    # sink columns behave as if linked to every node (stochastic M)
    UNIFORM_TELEPORT = "uniform"
    # a e^T / |V| taken literally: sink *rows* receive alpha/|V| of the mass
    LITERAL = "literal"


class FatigueForm(str, enum.Enum):
    # 1 - (k + beta) / (|V| - 1 + beta); beta cancels after L1 normalization
    EQUATION = "equation"
    # 1 - k / (|V| - 1) + beta; reproduces the rounded values of the worked example
    PRINTED = "printed"


@dataclass(frozen=True)
class RankingConfig:
    alpha: float = 0.85
    beta: float = 0.1
    epsilon: float = 0.001
    max_iterations: int = 1000
    sink_mode: SinkMode = SinkMode.UNIFORM_TELEPORT
    normalize_each_step: bool = True
    fatigue_form: FatigueForm = FatigueForm.EQUATION

    def __post_init__(self):
        object.__setattr__(self, "sink_mode", SinkMode(self.sink_mode))
        object.__setattr__(self, "fatigue_form", FatigueForm(self.fatigue_form))
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must satisfy 0 < alpha < 1, got {self.alpha}")
        if not self.beta >= 0.0:
            raise ValueError(f"beta must be >= 0, got {self.beta}")
        if not self.epsilon > 0.0:
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")
        if int(self.max_iterations) != self.max_iterations or self.max_iterations < 1:
            raise ValueError(f"max_iterations must be a positive integer, got {self.max_iterations}")
        if self.sink_mode is SinkMode.LITERAL and not self.normalize_each_step:
            raise ValueError("literal sink mode leaks mass and needs normalize_each_step")


@dataclass(frozen=True)
class ConvergenceReport:
    iterations_used: int
    final_residual: float
    converged: bool


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    """Column-stochastic-except-sinks matrix; column j holds the moves out of node j.

    ``h`` is stored row-compressed (row i lists the in-neighbours of i) so a
    block of rows can be multiplied independently.
    """

    h: sp.csr_matrix
    sink_mask: np.ndarray

    @property
    def num_nodes(self) -> int:
        return self.h.shape[0]

    def column_sums(self) -> np.ndarray:
        return np.bincount(self.h.indices, weights=self.h.data, minlength=self.num_nodes)

    def toarray(self) -> np.ndarray:
        return self.h.toarray()

    @classmethod
    def from_dense(cls, h) -> "TransitionMatrix":
        """Wrap an explicit matrix, e.g. a hand-rounded one. Zero columns become sinks."""
        h = np.asarray(h, dtype=np.float64)
        if h.ndim != 2 or h.shape[0] != h.shape[1]:
            raise ValueError("transition matrix must be square")
        if (h < 0).any():
            raise ValueError("transition probabilities must be non-negative")
        sums = h.sum(axis=0)
        if not np.all((np.abs(sums - 1.0) < 1e-9) | (sums == 0.0)):
            raise ValueError("every column must sum to 1 or to 0")
        return cls(sp.csr_matrix(h), sums == 0.0)


def _require_nodes(g: SparseGraph, minimum: int = 1) -> None:
    if g.num_nodes == 0:
        raise EmptyGraphError("graph has no nodes")
    if g.num_nodes < minimum:
        raise ValueError(f"graph needs at least {minimum} nodes, has {g.num_nodes}")


def transition_matrix(g: SparseGraph) -> TransitionMatrix:
    """Normalize the transposed adjacency by out-degree. Sinks keep zero columns."""
    n = g.num_nodes
    outdeg = np.diff(g.out_indptr)
    with np.errstate(divide="ignore"):
        inv = np.where(outdeg > 0, 1.0 / np.maximum(outdeg, 1), 0.0)
    data = inv[g.in_indices]
    h = sp.csr_matrix((data, g.in_indices, g.in_indptr), shape=(n, n))
    return TransitionMatrix(h, outdeg == 0)


def fatigue_raw(g: SparseGraph, beta: float = 0.1, form: FatigueForm = FatigueForm.EQUATION) -> np.ndarray:
    """Unnormalized fatigue weights from the loop-free indegree.

    With the default form a node of indegree |V|-1 gets exactly 0 for any
    ``beta``; the printed form keeps every weight >= ``beta``.
    """
    _require_nodes(g, 2)
    if not beta >= 0:
        raise ValueError(f"beta must be >= 0, got {beta}")
    k_in = indegree(g, include_loops=False).astype(np.float64)
    n = g.num_nodes
    if FatigueForm(form) is FatigueForm.EQUATION:
        return 1.0 - (k_in + beta) / (n - 1 + beta)
    return 1.0 - k_in / (n - 1) + beta


def fatigue_vector(g: SparseGraph, beta: float = 0.1, form: FatigueForm = FatigueForm.EQUATION) -> ScoreVector:
    """L1-normalized :func:`fatigue_raw`: high indegree, low weight."""
    raw = fatigue_raw(g, beta, form)
    total = raw.sum()
    if total <= 0:
        raise ValueError("every node has the maximum indegree, fatigue vector is zero")
    return ScoreVector(raw / total, "fatigue")


def apply_fatigue(tm: TransitionMatrix, fatigue) -> TransitionMatrix:
    """Scale each row i of ``H`` by ``fatigue[i]`` and renormalize non-zero columns to 1.

    A column whose targets all have zero weight keeps its original entries.
    """
    h = tm.h
    n = h.shape[0]
    rows = np.repeat(np.arange(n), np.diff(h.indptr))
    data = h.data * np.asarray(fatigue, dtype=np.float64)[rows]
    colsum = np.bincount(h.indices, weights=data, minlength=n)
    blocked = (colsum == 0) & ~tm.sink_mask
    if blocked.any():
        log.info("%d nodes only link to zero-weight targets; their columns are left unfatigued", blocked.sum())
        keep = blocked[h.indices]
        data[keep] = h.data[keep]
        colsum = np.bincount(h.indices, weights=data, minlength=n)
    nz = colsum[h.indices]
    with np.errstate(invalid="ignore", divide="ignore"):
        data = np.where(nz > 0, data / nz, 0.0)
    return TransitionMatrix(sp.csr_matrix((data, h.indices, h.indptr), shape=h.shape), tm.sink_mask)


def fatigued_transition_matrix(
    g: SparseGraph, beta: float = 0.1, form: FatigueForm = FatigueForm.EQUATION
) -> TransitionMatrix:
    return apply_fatigue(transition_matrix(g), fatigue_vector(g, beta, form).values)


def _row_blocks(n: int, blocks: int) -> list[tuple[int, int]]:
    blocks = max(1, min(blocks, n))
    bounds = np.linspace(0, n, blocks + 1).round().astype(np.int64)
    return [(int(lo), int(hi)) for lo, hi in zip(bounds[:-1], bounds[1:])]


class _Stepper:
    """One power-iteration step, optionally over independent row blocks."""

    def __init__(self, tm: TransitionMatrix, alpha: float, sink_mode: SinkMode, blocks: int = 1, threads: int = 1):
        self.tm = tm
        self.alpha = alpha
        self.sink_mode = SinkMode(sink_mode)
        self.n = tm.num_nodes
        self.sinks = np.flatnonzero(tm.sink_mask)
        self.bounds = _row_blocks(self.n, blocks)
        if len(self.bounds) == 1:
            self.parts = [tm.h]
        else:
            self.parts = [tm.h[lo:hi] for lo, hi in self.bounds]
        self.pool = ThreadPoolExecutor(threads) if threads > 1 and len(self.bounds) > 1 else None

    def close(self):
        if self.pool is not None:
            self.pool.shutdown()

    def _block(self, i: int, r: np.ndarray, out: np.ndarray, shift: float, sink_shift: float) -> None:
        lo, hi = self.bounds[i]
        part = self.parts[i] @ r
        part *= self.alpha
        part += shift
        if sink_shift:
            sl = self.sinks[(self.sinks >= lo) & (self.sinks < hi)]
            part[sl - lo] += sink_shift
        out[lo:hi] = part

    def __call__(self, r: np.ndarray) -> np.ndarray:
        n, alpha = self.n, self.alpha
        total = r.sum()
        if self.sink_mode is SinkMode.UNIFORM_TELEPORT:
            sink_mass = r[self.sinks].sum()
            shift = (alpha * sink_mass + (1.0 - alpha) * total) / n
            sink_shift = 0.0
        else:
            shift = (1.0 - alpha) * total / n
            sink_shift = alpha * total / n
        out = np.empty(n)
        if self.pool is None:
            for i in range(len(self.bounds)):
                self._block(i, r, out, shift, sink_shift)
        else:
            list(self.pool.map(lambda i: self._block(i, r, out, shift, sink_shift), range(len(self.bounds))))
        return out


def markov_step(tm: TransitionMatrix, r, alpha: float = 0.85, sink_mode=SinkMode.UNIFORM_TELEPORT) -> np.ndarray:
    """Unnormalized product of the implicit Markov matrix with ``r``."""
    return _Stepper(tm, alpha, sink_mode)(np.asarray(r, dtype=np.float64))


def power_iteration(
    tm: TransitionMatrix,
    cfg: RankingConfig = RankingConfig(),
    kind: str = "pagerank",
    blocks: int = 1,
    threads: int = 1,
    on_iteration: Callable[[int, np.ndarray], None] | None = None,
) -> tuple[ScoreVector, ConvergenceReport]:
    """Iterate from the uniform vector until the L2 step size drops below ``cfg.epsilon``.

    ``blocks`` splits ``H`` into row blocks that are multiplied separately
    (in a thread pool when ``threads > 1``); the result does not depend on
    the split. ``on_iteration(t, r_t)`` sees each normalized iterate.
    """
    n = tm.num_nodes
    if n == 0:
        raise EmptyGraphError("graph has no nodes")
    step = _Stepper(tm, cfg.alpha, cfg.sink_mode, blocks=blocks, threads=threads)
    r = np.full(n, 1.0 / n)
    residual = float("inf")
    converged = False
    t = 0
    try:
        while t < cfg.max_iterations:
            nxt = step(r)
            if cfg.normalize_each_step:
                nxt /= nxt.sum()
            t += 1
            residual = float(np.linalg.norm(nxt - r))
            r = nxt
            if on_iteration is not None:
                on_iteration(t, r)
            if residual < cfg.epsilon:
                converged = True
                break
    finally:
        step.close()
    if not converged:
        log.warning("power iteration stopped at %d iterations, residual %.3g", t, residual)
    return ScoreVector(r, kind), ConvergenceReport(t, residual, converged)


def pagerank(g: SparseGraph, cfg: RankingConfig = RankingConfig(), **kwargs) -> tuple[ScoreVector, ConvergenceReport]:
    _require_nodes(g)
    return power_iteration(transition_matrix(g), cfg, kind="pagerank", **kwargs)


def reverse_pagerank(g: SparseGraph, cfg: RankingConfig = RankingConfig(), **kwargs):
    _require_nodes(g)
    return power_iteration(transition_matrix(reverse(g)), cfg, kind="reverse_pagerank", **kwargs)


def fatigued_pagerank(g: SparseGraph, cfg: RankingConfig = RankingConfig(), **kwargs):
    _require_nodes(g, 2)
    tm = fatigued_transition_matrix(g, cfg.beta, cfg.fatigue_form)
    return power_iteration(tm, cfg, kind="fatigued_pagerank", **kwargs)


def hits(
    g: SparseGraph,
    epsilon: float = 1e-8,
    max_iterations: int = 1000,
    initial: np.ndarray | None = None,
) -> tuple[ScoreVector, ScoreVector, ConvergenceReport]:
    """Authority and hub vectors over the whole graph.

    Both vectors are updated from the previous iterate of the other
    (``auth <- A^T hub``, ``hub <- A auth``) and scaled to unit L2 norm, so
    the hubs of ``g`` are exactly the authorities of ``reverse(g)``.
    """
    _require_nodes(g)
    n = g.num_nodes
    start = np.ones(n) if initial is None else np.asarray(initial, dtype=np.float64)
    if start.shape != (n,) or (start < 0).any() or not start.any():
        raise ValueError("initial vector must be non-negative, non-zero and of length |V|")
    start = start / np.linalg.norm(start)
    if g.num_edges == 0:
        return ScoreVector(start, "authority"), ScoreVector(start, "hub"), ConvergenceReport(0, 0.0, True)

    ones = np.ones(g.num_edges)
    a = sp.csr_matrix((ones, g.out_indices, g.out_indptr), shape=(n, n))
    at = sp.csr_matrix((ones, g.in_indices, g.in_indptr), shape=(n, n))
    auth, hub = start, start
    residual = float("inf")
    converged = False
    t = 0
    while t < max_iterations:
        new_auth = at @ hub
        new_hub = a @ auth
        new_auth /= np.linalg.norm(new_auth)
        new_hub /= np.linalg.norm(new_hub)
        t += 1
        residual = float(max(np.linalg.norm(new_auth - auth), np.linalg.norm(new_hub - hub)))
        auth, hub = new_auth, new_hub
        if residual < epsilon:
            converged = True
            break
    if not converged:
        log.warning("HITS stopped at %d iterations, residual %.3g", t, residual)
    return ScoreVector(auth, "authority"), ScoreVector(hub, "hub"), ConvergenceReport(t, residual, converged)


def indegree_score(g: SparseGraph) -> ScoreVector:
    return ScoreVector(indegree(g).astype(np.float64), "indegree")
