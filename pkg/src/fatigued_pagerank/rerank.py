"""Query-independent reranking of TREC runs and standard effectiveness measures.

A static node score ``s`` becomes an additive relevance weight through one
of three transforms (Craswell et al., 2005):

    sigm(s) = w * s**a / (k**a + s**a)
    satu(s) = w * s / (k + s)
    log(s)  = w * log(1 + s)

which is added to the baseline retrieval score of each document.
"""

from __future__ import annotations

import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Mapping

import numpy as np

from .graph import GraphFormatError

log = logging.getLogger(__name__)

GMAP_FLOOR = 1e-5


@dataclass(frozen=True)
class TransformParams:
    kind: str = "sigm"
    w: float = 1.8
    k: float = 1.0
    a: float = 0.6

    def __post_init__(self):
        if self.kind not in ("sigm", "log", "satu"):
            raise ValueError(f"transform must be one of sigm, log, satu; got {self.kind!r}")
        for name in ("w", "k", "a"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be finite and > 0, got {value}")


def transform(s, p: TransformParams = TransformParams()):
    """Map static scores (scalar or array) to relevance weights. Negative input is rejected."""
    arr = np.asarray(s, dtype=np.float64)
    if np.any(arr < 0) or not np.all(np.isfinite(arr)):
        raise ValueError("static scores must be finite and >= 0")
    if p.kind in ("sigm", "satu"):
        # w s^a / (k^a + s^a) written as w / (1 + (k/s)^a): every step is
        # monotone after rounding, so the result never dips as s grows
        a = p.a if p.kind == "sigm" else 1.0
        with np.errstate(divide="ignore", over="ignore"):
            out = np.where(arr > 0, p.w / (1.0 + (p.k / arr) ** a), 0.0)
    else:
        out = p.w * np.log1p(arr)
    return float(out) if out.ndim == 0 else out


# -- run files and qrels -------------------------------------------------------


@dataclass
class RunEntry:
    topic_id: str
    doc_id: str
    rank: int
    score: float
    tag: str


@dataclass
class QrelEntry:
    topic_id: str
    doc_id: str
    relevance: int


# topic -> entries in rank order
RunFile = dict[str, list[RunEntry]]
# topic -> doc -> grade
Qrels = dict[str, dict[str, int]]


def _lines(source) -> Iterable[str]:
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as fh:
            yield from fh
    else:
        yield from source


def read_run(source) -> RunFile:
    """Parse ``topic Q0 docid rank score tag`` lines; entries end up sorted by rank."""
    run: RunFile = defaultdict(list)
    seen: set[tuple[str, str]] = set()
    for lineno, line in enumerate(_lines(source), start=1):
        fields = line.split()
        if not fields:
            continue
        if len(fields) != 6:
            raise GraphFormatError(f"expected 6 run fields, got {len(fields)}", lineno)
        topic, _, doc, rank, score, tag = fields
        if (topic, doc) in seen:
            raise GraphFormatError(f"duplicate document {doc!r} for topic {topic!r}", lineno)
        seen.add((topic, doc))
        try:
            entry = RunEntry(topic, doc, int(rank), float(score), tag)
        except ValueError:
            raise GraphFormatError("rank must be an integer and score a number", lineno) from None
        run[topic].append(entry)
    for entries in run.values():
        entries.sort(key=lambda e: e.rank)
    return dict(run)


def write_run(fh: IO[str], run: RunFile) -> None:
    for topic in sorted(run):
        for e in run[topic]:
            fh.write(f"{e.topic_id} Q0 {e.doc_id} {e.rank} {format(e.score, '.12g')} {e.tag}\n")


def read_qrels(source) -> Qrels:
    """Parse ``topic 0 docid relevance`` lines."""
    qrels: Qrels = defaultdict(dict)
    for lineno, line in enumerate(_lines(source), start=1):
        fields = line.split()
        if not fields:
            continue
        if len(fields) != 4:
            raise GraphFormatError(f"expected 4 qrels fields, got {len(fields)}", lineno)
        topic, _, doc, rel = fields
        try:
            grade = int(rel)
        except ValueError:
            raise GraphFormatError(f"relevance {rel!r} is not an integer", lineno) from None
        if doc in qrels[topic]:
            raise GraphFormatError(f"duplicate judgment for {topic}/{doc}", lineno)
        # negative grades (used by some tracks for "junk") count as non-relevant
        qrels[topic][doc] = max(grade, 0)
    return dict(qrels)


# -- reranking ---------------------------------------------------------------------


def rerank_run(
    baseline: RunFile,
    graph_scores: Mapping[str, float],
    p: TransformParams = TransformParams(),
    scale: float = 1.0,
) -> RunFile:
    """Add ``transform(scale * graph_score)`` to each baseline score and re-sort.

    Documents without a graph score get 0, i.e. keep their baseline score.
    Ties keep the baseline order.
    """
    if not (math.isfinite(scale) and scale > 0):
        raise ValueError(f"scale must be finite and > 0, got {scale}")
    out: RunFile = {}
    for topic, entries in baseline.items():
        docs = [e.doc_id for e in entries]
        if len(set(docs)) != len(docs):
            raise ValueError(f"duplicate documents in topic {topic!r}")
        static = np.array([graph_scores.get(d, 0.0) for d in docs], dtype=np.float64) * scale
        bonus = transform(static, p) if len(docs) else np.zeros(0)
        rescored = [(e.score + float(b), e) for e, b in zip(entries, np.atleast_1d(bonus))]
        rescored.sort(key=lambda pair: (-pair[0], pair[1].rank))
        out[topic] = [
            RunEntry(topic, e.doc_id, i, score, f"{e.tag}+{p.kind}")
            for i, (score, e) in enumerate(rescored, start=1)
        ]
    return out


# -- evaluation ---------------------------------------------------------------------


def average_precision(ranked_docs: list[str], judgments: Mapping[str, int]) -> float:
    num_rel = sum(1 for g in judgments.values() if g > 0)
    if num_rel == 0:
        return 0.0
    hits = 0
    total = 0.0
    for i, doc in enumerate(ranked_docs, start=1):
        if judgments.get(doc, 0) > 0:
            hits += 1
            total += hits / i
    return total / num_rel


def precision_at(ranked_docs: list[str], judgments: Mapping[str, int], k: int = 10) -> float:
    return sum(1 for d in ranked_docs[:k] if judgments.get(d, 0) > 0) / k


def ndcg_at(ranked_docs: list[str], judgments: Mapping[str, int], k: int = 10) -> float:
    """Linear gain, 1/log2(rank+1) discount; ideal = judged grades sorted descending."""
    dcg = sum(judgments.get(d, 0) / math.log2(i + 1) for i, d in enumerate(ranked_docs[:k], start=1))
    ideal = sorted((g for g in judgments.values() if g > 0), reverse=True)[:k]
    idcg = sum(g / math.log2(i + 1) for i, g in enumerate(ideal, start=1))
    return dcg / idcg if idcg > 0 else 0.0


@dataclass
class TopicEffectiveness:
    ap: float
    ndcg10: float
    p10: float


@dataclass
class EffectivenessReport:
    per_topic: dict[str, TopicEffectiveness] = field(default_factory=dict)

    def _values(self, attr: str) -> list[float]:
        return [getattr(self.per_topic[t], attr) for t in sorted(self.per_topic)]

    @property
    def map(self) -> float:
        v = self._values("ap")
        return float(np.mean(v)) if v else 0.0

    @property
    def gmap(self) -> float:
        v = self._values("ap")
        if not v:
            return 0.0
        return float(math.exp(np.mean(np.log(np.maximum(v, GMAP_FLOOR)))))

    @property
    def ndcg10(self) -> float:
        v = self._values("ndcg10")
        return float(np.mean(v)) if v else 0.0

    @property
    def p10(self) -> float:
        v = self._values("p10")
        return float(np.mean(v)) if v else 0.0

    def rows(self):
        """CSV rows ``topic, map, gmap, ndcg_cut_10, P_10``; the aggregate row is ``all``."""
        for t in sorted(self.per_topic):
            te = self.per_topic[t]
            yield [t, _fmt(te.ap), _fmt(max(te.ap, GMAP_FLOOR)), _fmt(te.ndcg10), _fmt(te.p10)]
        yield ["all", _fmt(self.map), _fmt(self.gmap), _fmt(self.ndcg10), _fmt(self.p10)]


EVAL_HEADER = ["topic", "map", "gmap", "ndcg_cut_10", "P_10"]


def _fmt(x: float) -> str:
    return format(float(x), ".12g")


def evaluate_run(run: RunFile, qrels: Qrels) -> EffectivenessReport:
    """AP, NDCG@10 and P@10 per topic; unjudged documents count as non-relevant.

    Topics missing from ``qrels`` or without any relevant document are
    skipped with a warning and left out of every mean.
    """
    report = EffectivenessReport()
    for topic in sorted(run):
        judgments = qrels.get(topic)
        if judgments is None:
            log.warning("topic %s has no judgments, skipped", topic)
            continue
        if not any(g > 0 for g in judgments.values()):
            log.warning("topic %s has no relevant documents, skipped", topic)
            continue
        docs = [e.doc_id for e in sorted(run[topic], key=lambda e: e.rank)]
        report.per_topic[topic] = TopicEffectiveness(
            average_precision(docs, judgments),
            ndcg_at(docs, judgments, 10),
            precision_at(docs, judgments, 10),
        )
    return report
