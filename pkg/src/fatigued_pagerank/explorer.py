"""Monte Carlo random surfer and stateful random explorer.

Random numbers come from the PCG64 generator (PCG-XSL-RR 128/64, as
implemented by ``numpy.random.PCG64``) seeded through ``numpy.random.SeedSequence``.
Only its raw 64-bit output stream is used; each raw word ``x`` becomes the
double ``(x >> 11) * 2**-53`` in [0, 1). numpy guarantees the raw stream
is stable across versions and platforms. For seed 0 the first four raw
words are::

    0xa30febcfd9c2825f, 0x4510bdf882d9d721, 0x0a7d3da94ecde8b8, 0x043b27b61342f01d

giving the doubles 0.6369616873214543, 0.2697867137638703,
0.04097352393619469, 0.016527635528529094.

Every step consumes exactly two doubles ``u, v``: ``u < alpha`` decides to
follow a link, ``v`` picks the link (or the teleport target as
``floor(v * |V|)``). The surfer and an explorer with span 0 therefore
walk the same trajectory for the same seed.
"""

from __future__ import annotations

from collections import OrderedDict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .graph import SparseGraph
from .scores import ScoreVector

_CHUNK = 1 << 16


@dataclass(frozen=True)
class ExplorerConfig:
    steps: int = 1_000_000
    alpha: float = 0.85
    fatigue_span: int = 2
    rng_seed: int = 0

    def __post_init__(self):
        if int(self.steps) != self.steps or self.steps < 1:
            raise ValueError(f"steps must be a positive integer, got {self.steps}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must satisfy 0 < alpha < 1, got {self.alpha}")
        if int(self.fatigue_span) != self.fatigue_span or self.fatigue_span < 0:
            raise ValueError(f"fatigue_span must be a non-negative integer, got {self.fatigue_span}")
        if not 0 <= self.rng_seed < 2**64:
            raise ValueError("rng_seed must be an unsigned 64-bit integer")


def bit_generator(seed: int) -> np.random.PCG64:
    return np.random.PCG64(np.random.SeedSequence(seed))


def uniform_stream(seed: int, chunk: int = _CHUNK):
    """Infinite iterator of doubles in [0, 1) derived from the raw PCG64 words."""
    bg = bit_generator(seed)
    while True:
        raw = bg.random_raw(chunk)
        yield from ((raw >> np.uint64(11)).astype(np.float64) * 2.0**-53).tolist()


def _walk(g: SparseGraph, cfg: ExplorerConfig, span: int) -> np.ndarray:
    n = g.num_nodes
    if n == 0:
        raise ValueError("graph has no nodes")
    indptr = g.out_indptr.tolist()
    indices = g.out_indices.tolist()
    adj = [indices[indptr[i] : indptr[i + 1]] for i in range(n)]
    counts = [0] * n
    alpha = cfg.alpha
    draws = uniform_stream(cfg.rng_seed)
    node = int(next(draws) * n)
    # recency-ordered distinct nodes, current node last
    recent: OrderedDict[int, None] = OrderedDict({node: None})
    for _ in range(cfg.steps):
        u = next(draws)
        v = next(draws)
        nxt = -1
        if u < alpha:
            choices = adj[node]
            if span and choices:
                choices = [c for c in choices if c == node or c not in recent]
            if choices:
                nxt = choices[int(v * len(choices))]
        if nxt < 0:
            nxt = int(v * n)
        node = nxt
        counts[node] += 1
        if span:
            recent[node] = None
            recent.move_to_end(node)
            if len(recent) > span + 1:
                recent.popitem(last=False)
    return np.asarray(counts, dtype=np.float64) / cfg.steps


def simulate_surfer(g: SparseGraph, cfg: ExplorerConfig) -> ScoreVector:
    """Visit frequencies of one memoryless random-surfer walk of ``cfg.steps`` steps.

    With probability ``alpha`` a uniformly chosen out-link is followed
    (sinks teleport); otherwise the walk jumps to a uniform node.
    """
    return ScoreVector(_walk(g, cfg, 0), "surfer")


def simulate_explorer(g: SparseGraph, cfg: ExplorerConfig) -> ScoreVector:
    """Like :func:`simulate_surfer`, but links into any of the ``fatigue_span``
    most recently visited distinct nodes (other than the current one) are
    not eligible. With no eligible link the explorer teleports.
    """
    return ScoreVector(_walk(g, cfg, cfg.fatigue_span), "explorer")


def merge_frequencies(vectors: Sequence, steps: Sequence[int]) -> np.ndarray:
    """Average frequency vectors weighted by their walk lengths."""
    steps_arr = np.asarray(steps, dtype=np.float64)
    stacked = np.vstack([np.asarray(v, dtype=np.float64) for v in vectors])
    return steps_arr @ stacked / steps_arr.sum()


def _run_one(args):
    g, cfg, mode = args
    return _walk(g, cfg, cfg.fatigue_span if mode == "explorer" else 0)


def simulate_many(
    g: SparseGraph, cfg: ExplorerConfig, seeds: Sequence[int], mode: str = "surfer", workers: int = 1
) -> ScoreVector:
    """Independent walks, one per seed, merged by step-weighted average."""
    if mode not in ("surfer", "explorer"):
        raise ValueError(f"unknown mode {mode!r}")
    jobs = [(g, replace(cfg, rng_seed=s), mode) for s in seeds]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_run_one, jobs))
    else:
        results = [_run_one(job) for job in jobs]
    return ScoreVector(merge_frequencies(results, [cfg.steps] * len(jobs)), mode)
