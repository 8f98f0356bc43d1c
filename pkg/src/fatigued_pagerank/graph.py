"""Immutable sparse directed graph with label interning.

Edges are kept twice: source-major (out-adjacency) and target-major
(in-adjacency), both as ``indptr``/``indices`` pairs in the usual CSR layout.
Node ids are dense integers assigned in first-appearance order of labels.
"""

from __future__ import annotations

import math
from array import array
from typing import Iterable, Sequence

import numpy as np


class GraphFormatError(ValueError):
    """A malformed edge record. ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


def _compress(major: np.ndarray, minor: np.ndarray, n: int):
    """Sort (major, minor) pairs and build indptr/indices. Returns the order too."""
    # keys are unique after deduplication, so an unstable sort is fine
    order = np.argsort(major.astype(np.int64) * n + minor)
    counts = np.bincount(major, minlength=n)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    return indptr, minor[order], order


class SparseGraph:
    """Directed graph without parallel edges.

    Use :func:`build_graph`, :class:`GraphBuilder` or :meth:`from_arrays`
    rather than calling the constructor directly.
    """

    __slots__ = (
        "num_nodes",
        "out_indptr",
        "out_indices",
        "in_indptr",
        "in_indices",
        "_in_to_out",
        "_weights",
        "_labels",
        "_label_index",
    )

    def __init__(
        self,
        num_nodes: int,
        out_indptr: np.ndarray,
        out_indices: np.ndarray,
        in_indptr: np.ndarray,
        in_indices: np.ndarray,
        in_to_out: np.ndarray,
        weights: np.ndarray | None,
        labels: list[str] | None,
    ):
        self.num_nodes = num_nodes
        self.out_indptr = out_indptr
        self.out_indices = out_indices
        self.in_indptr = in_indptr
        self.in_indices = in_indices
        # position of each in-adjacency entry within the out-adjacency arrays
        self._in_to_out = in_to_out
        self._weights = weights
        self._labels = labels
        self._label_index: dict[str, int] | None = None
        for arr in (out_indptr, out_indices, in_indptr, in_indices, in_to_out):
            arr.flags.writeable = False
        if weights is not None:
            weights.flags.writeable = False

    @classmethod
    def from_arrays(
        cls,
        sources: np.ndarray,
        targets: np.ndarray,
        num_nodes: int,
        weights: np.ndarray | None = None,
        labels: Sequence[str] | None = None,
        drop_self_loops: bool = False,
    ) -> "SparseGraph":
        """Build from integer endpoint arrays.

        Parallel edges are merged and their weights summed. Without
        ``labels`` the label of node ``i`` is ``str(i)``.
        """
        src = np.asarray(sources, dtype=np.int64)
        tgt = np.asarray(targets, dtype=np.int64)
        if src.shape != tgt.shape or src.ndim != 1:
            raise ValueError("sources and targets must be 1-d arrays of equal length")
        if len(src) and (min(src.min(), tgt.min()) < 0 or max(src.max(), tgt.max()) >= num_nodes):
            raise ValueError("node index out of range")
        if labels is not None and len(labels) != num_nodes:
            raise ValueError("labels must have one entry per node")
        w = None if weights is None else np.asarray(weights, dtype=np.float64)
        if w is not None and w.shape != src.shape:
            raise ValueError("weights must align with edges")
        if drop_self_loops:
            keep = src != tgt
            src, tgt = src[keep], tgt[keep]
            if w is not None:
                w = w[keep]

        # int32 indices halve memory; fall back when the graph is too large
        idx_dtype = np.int32 if num_nodes < 2**31 else np.int64
        key = src * num_nodes + tgt
        if w is None:
            uniq = np.unique(key)
        else:
            uniq, inverse = np.unique(key, return_inverse=True)
            w = np.bincount(inverse, weights=w, minlength=len(uniq))
            del inverse
        del key
        # np.unique sorts keys, so the edges are already source-major
        src = (uniq // num_nodes).astype(idx_dtype)
        tgt = (uniq % num_nodes).astype(idx_dtype)
        del uniq

        out_counts = np.bincount(src, minlength=num_nodes)
        out_indptr = np.zeros(num_nodes + 1, dtype=np.int64)
        np.cumsum(out_counts, out=out_indptr[1:])
        in_indptr, in_indices, in_to_out = _compress(tgt, src, num_nodes)
        return cls(
            num_nodes,
            out_indptr,
            tgt,
            in_indptr,
            in_indices,
            in_to_out.astype(np.int64),
            w,
            None if labels is None else list(labels),
        )

    # -- basic queries -----------------------------------------------------

    @property
    def num_edges(self) -> int:
        return len(self.out_indices)

    def __len__(self) -> int:
        return self.num_nodes

    def __repr__(self) -> str:
        return f"SparseGraph(num_nodes={self.num_nodes}, num_edges={self.num_edges})"

    @property
    def has_weights(self) -> bool:
        return self._weights is not None

    @property
    def edge_weights(self) -> np.ndarray:
        """Per-edge weights in source-major edge order (ones when unweighted)."""
        if self._weights is None:
            return np.ones(self.num_edges)
        return self._weights

    @property
    def in_edge_weights(self) -> np.ndarray:
        """Per-edge weights in target-major edge order."""
        return self.edge_weights[self._in_to_out]

    @property
    def labels(self) -> list[str]:
        if self._labels is None:
            return [str(i) for i in range(self.num_nodes)]
        return list(self._labels)

    def label(self, node: int) -> str:
        if not 0 <= node < self.num_nodes:
            raise IndexError(node)
        return str(node) if self._labels is None else self._labels[node]

    def node_id(self, label: str) -> int:
        """Inverse of :meth:`label`; raises ``KeyError`` for unknown labels."""
        if self._label_index is None:
            self._label_index = {lab: i for i, lab in enumerate(self.labels)}
        return self._label_index[label]

    def __contains__(self, label: str) -> bool:
        try:
            self.node_id(label)
        except KeyError:
            return False
        return True

    def sources(self) -> np.ndarray:
        """Source node of each edge, in source-major edge order."""
        return np.repeat(np.arange(self.num_nodes), np.diff(self.out_indptr))

    def edges(self) -> np.ndarray:
        """``(|E|, 2)`` array of (source, target) pairs, sorted."""
        return np.column_stack([self.sources(), self.out_indices])

    def successors(self, node: int) -> np.ndarray:
        return self.out_indices[self.out_indptr[node] : self.out_indptr[node + 1]]

    def predecessors(self, node: int) -> np.ndarray:
        return self.in_indices[self.in_indptr[node] : self.in_indptr[node + 1]]

    def edge_index(self, source: int, target: int) -> int:
        """Position of edge (source, target) in source-major order, or -1."""
        lo, hi = self.out_indptr[source], self.out_indptr[source + 1]
        pos = lo + int(np.searchsorted(self.out_indices[lo:hi], target))
        if pos < hi and self.out_indices[pos] == target:
            return int(pos)
        return -1

    def has_edge(self, source: int, target: int) -> bool:
        return self.edge_index(source, target) >= 0

    def with_weights(self, weights: np.ndarray) -> "SparseGraph":
        """Same structure, new per-edge weights (source-major order)."""
        w = np.array(weights, dtype=np.float64)
        if w.shape != (self.num_edges,):
            raise ValueError("weights must have one entry per edge")
        return SparseGraph(
            self.num_nodes,
            self.out_indptr,
            self.out_indices,
            self.in_indptr,
            self.in_indices,
            self._in_to_out,
            w,
            self._labels,
        )

    def to_dense(self) -> np.ndarray:
        """Binary adjacency matrix, row = source. Small graphs only."""
        a = np.zeros((self.num_nodes, self.num_nodes))
        a[self.sources(), self.out_indices] = 1.0
        return a


class GraphBuilder:
    """Incremental, label-based graph construction.

    Labels get ids in first-appearance order. Endpoints are accumulated in
    compact typed arrays so large edge streams stay cheap.
    """

    def __init__(self, default_weight: float = 1.0, drop_self_loops: bool = False):
        self.default_weight = default_weight
        self.drop_self_loops = drop_self_loops
        self._ids: dict[str, int] = {}
        self._labels: list[str] = []
        self._src = array("q")
        self._tgt = array("q")
        self._w = array("d")

    def add_node(self, label: str) -> int:
        if not isinstance(label, str) or not label:
            raise GraphFormatError(f"invalid node label {label!r}")
        node = self._ids.get(label)
        if node is None:
            node = self._ids[label] = len(self._labels)
            self._labels.append(label)
        return node

    def add_edge(self, source: str, target: str, weight: float | None = None, line: int | None = None) -> None:
        if weight is None:
            weight = self.default_weight
        else:
            try:
                weight = float(weight)
            except (TypeError, ValueError):
                raise GraphFormatError(f"weight {weight!r} is not a number", line) from None
            if not math.isfinite(weight) or weight < 0:
                raise GraphFormatError(f"weight must be finite and >= 0, got {weight!r}", line)
        try:
            s = self.add_node(source)
            t = self.add_node(target)
        except GraphFormatError as exc:
            raise GraphFormatError(str(exc), line) from None
        self._src.append(s)
        self._tgt.append(t)
        self._w.append(weight)

    def build(self) -> SparseGraph:
        return SparseGraph.from_arrays(
            np.frombuffer(self._src, dtype=np.int64) if len(self._src) else np.zeros(0, np.int64),
            np.frombuffer(self._tgt, dtype=np.int64) if len(self._tgt) else np.zeros(0, np.int64),
            len(self._labels),
            weights=np.frombuffer(self._w, dtype=np.float64) if len(self._w) else np.zeros(0),
            labels=self._labels,
            drop_self_loops=self.drop_self_loops,
        )


def build_graph(edge_list: Iterable[Sequence], drop_self_loops: bool = False) -> SparseGraph:
    """Build a graph from ``(source, target)`` or ``(source, target, weight)`` records.

    Missing weights count as 1, so merged parallel edges carry their
    multiplicity. Errors report the 1-based record number as ``line``.
    """
    builder = GraphBuilder(drop_self_loops=drop_self_loops)
    for lineno, record in enumerate(edge_list, start=1):
        if len(record) not in (2, 3):
            raise GraphFormatError(f"expected 2 or 3 fields, got {len(record)}", lineno)
        builder.add_edge(
            str(record[0]) if isinstance(record[0], int) else record[0],
            str(record[1]) if isinstance(record[1], int) else record[1],
            record[2] if len(record) == 3 else None,
            line=lineno,
        )
    return builder.build()


def reverse(g: SparseGraph) -> SparseGraph:
    """Graph with every edge flipped; labels and weights carried over."""
    # the in-adjacency of g is the out-adjacency of the reversed graph
    out_to_in = np.empty_like(g._in_to_out)
    out_to_in[g._in_to_out] = np.arange(g.num_edges)
    weights = None if g._weights is None else g._weights[g._in_to_out]
    return SparseGraph(
        g.num_nodes,
        g.in_indptr,
        g.in_indices,
        g.out_indptr,
        g.out_indices,
        out_to_in,
        weights,
        g._labels,
    )


def _self_loop_counts(g: SparseGraph) -> np.ndarray:
    loops = g.sources() == g.out_indices
    return np.bincount(g.out_indices[loops], minlength=g.num_nodes)


def indegree(g: SparseGraph, include_loops: bool = True) -> np.ndarray:
    """Number of distinct in-neighbours per node."""
    deg = np.diff(g.in_indptr)
    if not include_loops:
        deg = deg - _self_loop_counts(g)
    return deg


def outdegree(g: SparseGraph, include_loops: bool = True) -> np.ndarray:
    """Number of distinct out-neighbours per node."""
    deg = np.diff(g.out_indptr)
    if not include_loops:
        deg = deg - _self_loop_counts(g)
    return deg


def toy_graph() -> SparseGraph:
    """The five-node example graph: one sink (5), sources 1 and 4.

    Node ids 0..4 correspond to labels "1".."5".
    """
    builder = GraphBuilder()
    for label in "12345":
        builder.add_node(label)
    for s, t in [("1", "2"), ("1", "3"), ("2", "3"), ("3", "5"), ("4", "3")]:
        builder.add_edge(s, t)
    return builder.build()
