"""Sparse directed-graph node ranking: PageRank, Reverse PageRank,
Fatigued PageRank, HITS and indegree, plus the clickstream-correlation and
run-reranking evaluation pipelines."""

__version__ = "0.1.0"

from .centrality import (
    ConvergenceReport,
    EmptyGraphError,
    FatigueForm,
    RankingConfig,
    SinkMode,
    TransitionMatrix,
    fatigue_vector,
    fatigued_pagerank,
    fatigued_transition_matrix,
    hits,
    indegree_score,
    pagerank,
    power_iteration,
    reverse_pagerank,
    transition_matrix,
)
from .graph import GraphFormatError, SparseGraph, build_graph, indegree, outdegree, reverse, toy_graph
from .ingest import read_edge_tsv, read_gml
from .scores import ScoreVector

__all__ = [
    "ConvergenceReport",
    "EmptyGraphError",
    "FatigueForm",
    "GraphFormatError",
    "RankingConfig",
    "ScoreVector",
    "SinkMode",
    "SparseGraph",
    "TransitionMatrix",
    "build_graph",
    "fatigue_vector",
    "fatigued_pagerank",
    "fatigued_transition_matrix",
    "hits",
    "indegree",
    "indegree_score",
    "outdegree",
    "pagerank",
    "power_iteration",
    "read_edge_tsv",
    "read_gml",
    "reverse",
    "reverse_pagerank",
    "toy_graph",
    "transition_matrix",
]
