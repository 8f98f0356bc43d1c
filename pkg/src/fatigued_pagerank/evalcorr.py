"""Pearson/Spearman agreement between a node score and ground-truth visit counts,
overall and on top-k cuts of the score ranking."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from typing import IO, Sequence

import numpy as np
from scipy.stats import rankdata

log = logging.getLogger(__name__)

DEFAULT_CUTS = (10, 25, 100, 250, 500, 1000, 2500, 5000, 10000)


class UndefinedCorrelationError(ValueError):
    """Raised when an input vector is constant, so the coefficient is 0/0."""


def _check_pair(x, y) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("inputs must be 1-d and of equal length")
    if len(x) < 2:
        raise ValueError("need at least two observations")
    if not (np.isfinite(x).all() and np.isfinite(y).all()):
        raise ValueError("inputs must be finite")
    return x, y


def pearson(x, y) -> float:
    x, y = _check_pair(x, y)
    if x.min() == x.max() or y.min() == y.max():
        raise UndefinedCorrelationError("correlation undefined for a constant vector")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def average_ranks(x) -> np.ndarray:
    """1-based ranks with ties sharing the mean of their positions."""
    return rankdata(np.asarray(x, dtype=np.float64), method="average")


def spearman(x, y) -> float:
    x, y = _check_pair(x, y)
    return pearson(average_ranks(x), average_ranks(y))


def top_k(scores, k: int) -> np.ndarray:
    """Indices of the ``k`` best nodes: descending score, then ascending node id."""
    s = np.asarray(scores, dtype=np.float64)
    return np.lexsort((np.arange(len(s)), -s))[:k]


def population_variance(values: Sequence[float]) -> float:
    v = np.asarray(values, dtype=np.float64)
    if len(v) == 0:
        return float("nan")
    return float(np.mean((v - v.mean()) ** 2))


@dataclass
class CorrelationReport:
    metric_name: str
    cut_sizes: list[int] = field(default_factory=list)
    # None marks a cut whose slice was constant
    pearson_at_k: list[float | None] = field(default_factory=list)
    spearman_at_k: list[float | None] = field(default_factory=list)
    overall_pearson: float | None = None
    overall_spearman: float | None = None
    variance_pearson: float = float("nan")
    variance_spearman: float = float("nan")

    def rows(self):
        """CSV rows: one per cut, then a summary row with k='all'."""
        for k, p, s in zip(self.cut_sizes, self.pearson_at_k, self.spearman_at_k):
            yield [self.metric_name, str(k), _fmt(p), _fmt(s), "", ""]
        yield [
            self.metric_name,
            "all",
            _fmt(self.overall_pearson),
            _fmt(self.overall_spearman),
            _fmt(self.variance_pearson),
            _fmt(self.variance_spearman),
        ]


CSV_HEADER = ["metric", "k", "pearson", "spearman", "variance_pearson", "variance_spearman"]


def _fmt(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return format(float(x), ".12g")


def _safe(fn, x, y):
    try:
        return fn(x, y)
    except UndefinedCorrelationError:
        return None


def correlation_at_cuts(
    scores, visits, cuts: Sequence[int] = DEFAULT_CUTS, metric_name: str = "score"
) -> CorrelationReport:
    """Correlate the top-k nodes by score with their visit counts, for each k.

    Cuts larger than the number of nodes are skipped with a warning. Slices
    on which a coefficient is undefined are recorded as ``None`` and left
    out of the variances.
    """
    s = np.asarray(scores, dtype=np.float64)
    v = np.asarray(visits, dtype=np.float64)
    if s.shape != v.shape:
        raise ValueError("scores and visits must align")
    if list(cuts) != sorted(cuts):
        raise ValueError("cuts must be sorted ascending")
    n = len(s)
    report = CorrelationReport(metric_name)
    order = top_k(s, n)
    for k in cuts:
        if k > n:
            log.warning("cut %d exceeds %d nodes, skipped", k, n)
            continue
        if k < 2:
            raise ValueError("cut sizes must be at least 2")
        idx = order[:k]
        report.cut_sizes.append(int(k))
        report.pearson_at_k.append(_safe(pearson, s[idx], v[idx]))
        report.spearman_at_k.append(_safe(spearman, s[idx], v[idx]))
    # same summation order as a full-length cut, so cuts=[n] reproduces these bit for bit
    report.overall_pearson = _safe(pearson, s[order], v[order])
    report.overall_spearman = _safe(spearman, s[order], v[order])
    report.variance_pearson = population_variance([p for p in report.pearson_at_k if p is not None])
    report.variance_spearman = population_variance([p for p in report.spearman_at_k if p is not None])
    return report


def write_reports_csv(fh: IO[str], reports: Sequence[CorrelationReport]) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for rep in reports:
        writer.writerows(rep.rows())
