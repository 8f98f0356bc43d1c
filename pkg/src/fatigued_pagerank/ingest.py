"""Readers and writers for edge lists, a small GML subset and clickstream dumps."""

from __future__ import annotations

import gzip
import io
import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Iterator

import numpy as np

from .graph import GraphBuilder, GraphFormatError, SparseGraph
from .scores import ScoreVector, format_score

log = logging.getLogger(__name__)


def _open_text(path, gzipped: bool | None = None, mode: str = "rt") -> IO[str]:
    path = Path(path)
    if gzipped is None:
        gzipped = path.suffix == ".gz"
    if gzipped:
        return gzip.open(path, mode, encoding="utf-8", newline="")
    return open(path, mode, encoding="utf-8", newline="")


# -- edge TSV ----------------------------------------------------------------


def parse_edge_tsv(lines: Iterable[str], drop_self_loops: bool = False) -> SparseGraph:
    builder = GraphBuilder(drop_self_loops=drop_self_loops)
    for lineno, line in enumerate(lines, start=1):
        line = line.rstrip("\r\n")
        if not line or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) not in (2, 3):
            raise GraphFormatError(f"expected 2 or 3 tab-separated fields, got {len(fields)}", lineno)
        builder.add_edge(fields[0], fields[1], fields[2] if len(fields) == 3 else None, line=lineno)
    return builder.build()


def read_edge_tsv(path, gzipped: bool | None = None, drop_self_loops: bool = False) -> SparseGraph:
    """Read ``source<TAB>target[<TAB>weight]`` lines; ``#`` starts a comment line."""
    with _open_text(path, gzipped) as fh:
        return parse_edge_tsv(fh, drop_self_loops=drop_self_loops)


def write_edge_tsv(g: SparseGraph, path_or_file, weights: bool = True) -> None:
    labels = g.labels
    src = g.sources()
    w = g.edge_weights
    close = False
    if isinstance(path_or_file, (str, Path)):
        fh = _open_text(path_or_file, mode="wt")
        close = True
    else:
        fh = path_or_file
    try:
        for e, (s, t) in enumerate(zip(src, g.out_indices)):
            if weights:
                fh.write(f"{labels[s]}\t{labels[t]}\t{format_score(w[e])}\n")
            else:
                fh.write(f"{labels[s]}\t{labels[t]}\n")
    finally:
        if close:
            fh.close()


# -- GML subset ----------------------------------------------------------------

_GML_TOKEN = re.compile(
    rb"""
    (?P<ws>\s+)
    |(?P<comment>\#[^\n]*)
    |(?P<open>\[)
    |(?P<close>\])
    |(?P<string>"[^"]*")
    |(?P<number>[+-]?(?:\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?))
    |(?P<key>[A-Za-z_][A-Za-z0-9_]*)
    """,
    re.VERBOSE,
)


class GMLError(GraphFormatError):
    """GML syntax or consistency error. ``offset`` is a byte offset into the file."""

    def __init__(self, message: str, offset: int | None = None):
        self.offset = offset
        if offset is not None:
            message = f"byte {offset}: {message}"
        super().__init__(message)


def _gml_tokens(data: bytes) -> Iterator[tuple[str, bytes, int]]:
    pos = 0
    n = len(data)
    while pos < n:
        m = _GML_TOKEN.match(data, pos)
        if m is None:
            raise GMLError(f"unexpected character {data[pos:pos + 1]!r}", pos)
        kind = m.lastgroup
        if kind not in ("ws", "comment"):
            yield kind, m.group(), pos
        pos = m.end()


def _parse_gml_list(tokens: Iterator, data_len: int, closing: bool) -> list[tuple[str, object, int]]:
    """Parse ``key value`` pairs until ``]`` (or EOF when not ``closing``)."""
    items = []
    for kind, text, pos in tokens:
        if kind == "close":
            if not closing:
                raise GMLError("unbalanced ']'", pos)
            return items
        if kind != "key":
            raise GMLError(f"expected a key, got {text.decode(errors='replace')!r}", pos)
        key = text.decode()
        try:
            vkind, vtext, vpos = next(tokens)
        except StopIteration:
            raise GMLError(f"missing value for key {key!r}", data_len) from None
        if vkind == "open":
            value = _parse_gml_list(tokens, data_len, closing=True)
        elif vkind == "string":
            value = vtext[1:-1].decode("utf-8")
        elif vkind == "number":
            s = vtext.decode()
            value = float(s) if any(c in s for c in ".eE") else int(s)
        else:
            raise GMLError(f"invalid value for key {key!r}", vpos)
        items.append((key, value, pos))
    if closing:
        raise GMLError("unexpected end of input, missing ']'", data_len)
    return items


def parse_gml(data: bytes, drop_self_loops: bool = False) -> SparseGraph:
    """Parse the subset ``graph [ node [ id label ] ... edge [ source target transitions ] ]``.

    Edge weights come from the integer ``transitions`` attribute and are 0
    where it is absent. Unknown attributes are ignored.
    """
    top = _parse_gml_list(_gml_tokens(data), len(data), closing=False)
    graphs = [(v, pos) for k, v, pos in top if k == "graph"]
    if len(graphs) != 1:
        raise GMLError(f"expected exactly one graph block, found {len(graphs)}", 0)
    body, _ = graphs[0]
    if not isinstance(body, list):
        raise GMLError("graph must be a list", graphs[0][1])

    builder = GraphBuilder(default_weight=0.0, drop_self_loops=drop_self_loops)
    id_to_label: dict[int, str] = {}
    seen_labels: set[str] = set()
    pending_edges = []
    for key, value, pos in body:
        if key == "node":
            attrs = dict((k, v) for k, v, _ in value) if isinstance(value, list) else None
            if attrs is None or not isinstance(attrs.get("id"), int):
                raise GMLError("node without integer id", pos)
            nid = attrs["id"]
            if nid in id_to_label:
                raise GMLError(f"duplicate node id {nid}", pos)
            label = str(attrs.get("label", nid))
            if label in seen_labels:
                raise GMLError(f"duplicate node label {label!r}", pos)
            seen_labels.add(label)
            id_to_label[nid] = label
            builder.add_node(label)
        elif key == "edge":
            attrs = dict((k, v) for k, v, _ in value) if isinstance(value, list) else None
            if attrs is None or not isinstance(attrs.get("source"), int) or not isinstance(attrs.get("target"), int):
                raise GMLError("edge without integer source/target", pos)
            pending_edges.append((attrs, pos))
    for attrs, pos in pending_edges:
        try:
            s = id_to_label[attrs["source"]]
            t = id_to_label[attrs["target"]]
        except KeyError as exc:
            raise GMLError(f"edge references missing node {exc.args[0]}", pos) from None
        weight = attrs.get("transitions")
        if weight is not None and not isinstance(weight, int):
            raise GMLError("transitions must be an integer", pos)
        try:
            builder.add_edge(s, t, weight)
        except GraphFormatError as exc:
            raise GMLError(str(exc), pos) from None
    return builder.build()


def read_gml(path, gzipped: bool | None = None, drop_self_loops: bool = False) -> SparseGraph:
    path = Path(path)
    if gzipped is None:
        gzipped = path.suffix == ".gz"
    opener = gzip.open if gzipped else open
    with opener(path, "rb") as fh:
        return parse_gml(fh.read(), drop_self_loops=drop_self_loops)


def _gml_quote(label: str) -> str:
    if '"' in label:
        raise ValueError(f"label {label!r} contains a double quote, not representable in GML")
    return f'"{label}"'


def write_gml(g: SparseGraph, path_or_file, gzipped: bool | None = None) -> None:
    """Write the graph in the same subset ``read_gml`` accepts."""
    buf = io.StringIO()
    buf.write("graph [\n  directed 1\n")
    for i, label in enumerate(g.labels):
        buf.write(f"  node [\n    id {i}\n    label {_gml_quote(label)}\n  ]\n")
    w = g.edge_weights
    for e, (s, t) in enumerate(zip(g.sources(), g.out_indices)):
        buf.write(f"  edge [\n    source {s}\n    target {t}\n")
        if g.has_weights:
            buf.write(f"    transitions {int(round(w[e]))}\n")
        buf.write("  ]\n")
    buf.write("]\n")
    data = buf.getvalue().encode("utf-8")
    if isinstance(path_or_file, (str, Path)):
        path = Path(path_or_file)
        if gzipped is None:
            gzipped = path.suffix == ".gz"
        if gzipped:
            # no name, no mtime: output bytes depend only on the graph
            with open(path, "wb") as raw, gzip.GzipFile(filename="", fileobj=raw, mode="wb", mtime=0) as fh:
                fh.write(data)
        else:
            path.write_bytes(data)
    else:
        path_or_file.write(data)


# -- clickstream -----------------------------------------------------------------


@dataclass(frozen=True)
class ClickstreamRecord:
    prev_label: str
    curr_label: str
    link_type: str
    count: int


def parse_clickstream(lines: Iterable[str]) -> Iterator[ClickstreamRecord]:
    """Yield records from ``prev<TAB>curr<TAB>type<TAB>n`` lines, lazily."""
    for lineno, line in enumerate(lines, start=1):
        line = line.rstrip("\r\n")
        if not line or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 4:
            raise GraphFormatError(f"expected 4 tab-separated fields, got {len(fields)}", lineno)
        prev, curr, link_type, n = fields
        try:
            count = int(n)
        except ValueError:
            raise GraphFormatError(f"count {n!r} is not an integer", lineno) from None
        if count < 0 or not prev or not curr:
            raise GraphFormatError("empty label or negative count", lineno)
        yield ClickstreamRecord(prev, curr, link_type, count)


def read_clickstream(path, gzipped: bool | None = None) -> Iterator[ClickstreamRecord]:
    with _open_text(path, gzipped) as fh:
        yield from parse_clickstream(fh)


@dataclass
class JoinStats:
    matched: int = 0
    skipped_unknown: int = 0  # label or edge not in the graph
    skipped_type: int = 0  # filtered out by link type

    @property
    def skipped(self) -> int:
        return self.skipped_unknown + self.skipped_type


def join_clickstream(
    g: SparseGraph,
    records: Iterable[ClickstreamRecord],
    link_types: Iterable[str] | None = ("link",),
) -> tuple[SparseGraph, JoinStats]:
    """Replace edge weights by clickstream counts.

    Edges without a matching record get weight 0; repeated records for the
    same edge are summed. ``link_types=None`` accepts every type. The edge
    set is never changed.
    """
    allowed = None if link_types is None else set(link_types)
    weights = np.zeros(g.num_edges)
    stats = JoinStats()
    for rec in records:
        if allowed is not None and rec.link_type not in allowed:
            stats.skipped_type += 1
            continue
        try:
            s = g.node_id(rec.prev_label)
            t = g.node_id(rec.curr_label)
        except KeyError:
            stats.skipped_unknown += 1
            continue
        e = g.edge_index(s, t)
        if e < 0:
            stats.skipped_unknown += 1
            continue
        weights[e] += rec.count
        stats.matched += 1
    if stats.skipped:
        log.info(
            "clickstream join: %d matched, %d unknown, %d filtered by type",
            stats.matched,
            stats.skipped_unknown,
            stats.skipped_type,
        )
    return g.with_weights(weights), stats


def visits(g: SparseGraph) -> ScoreVector:
    """Sum of incoming edge weights per node."""
    counts = np.bincount(g.out_indices, weights=g.edge_weights, minlength=g.num_nodes)
    return ScoreVector(counts.astype(np.float64), "visits")
