"""Command-line entry point: ``fprank {ingest,rank,simulate,correlate,rerank,eval}``.

Exit status is 0 on success, 1 on usage or validation errors and 2 when
input data cannot be read or processed. Data goes to ``--out`` (or stdout);
diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import logging
import sys
from pathlib import Path

from . import __version__
from .centrality import (
    EmptyGraphError,
    FatigueForm,
    RankingConfig,
    SinkMode,
    fatigued_pagerank,
    hits,
    indegree_score,
    pagerank,
    reverse_pagerank,
)
from .evalcorr import DEFAULT_CUTS, correlation_at_cuts, write_reports_csv
from .explorer import ExplorerConfig, simulate_explorer, simulate_surfer
from .graph import GraphFormatError, SparseGraph
from .ingest import join_clickstream, read_clickstream, read_edge_tsv, read_gml, visits, write_edge_tsv, write_gml
from .rerank import EVAL_HEADER, TransformParams, evaluate_run, read_qrels, read_run, rerank_run, write_run
from .scores import read_scores, write_scores

log = logging.getLogger("fatigued_pagerank")

METRICS = ("indegree", "pagerank", "reverse-pagerank", "fatigued-pagerank", "hits-authority", "hits-hub")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_graph_input(p: argparse.ArgumentParser) -> None:
    p.add_argument("graph", help="graph file (edge TSV or GML)")
    p.add_argument("--format", choices=("tsv", "gml"), default=None, help="default: from the file extension")
    p.add_argument("--gzip", action="store_true", help="input is gzip-compressed")
    p.add_argument("--drop-self-loops", action="store_true")


def _add_out(p: argparse.ArgumentParser) -> None:
    p.add_argument("-o", "--out", default=None, help="output file (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fprank", description="Sparse node ranking with Fatigued PageRank.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest", help="read a graph, optionally join clickstream counts, write it back out")
    _add_graph_input(p)
    p.add_argument("--clickstream", help="clickstream TSV: prev, curr, type, n")
    p.add_argument("--link-type-filter", default="link", help="comma-separated types to keep, or 'any'")
    p.add_argument("--out-format", choices=("tsv", "gml"), default="tsv")
    p.add_argument("--visits", help="also write per-node visits (label<TAB>count) in node-id order")
    _add_out(p)

    p = sub.add_parser("rank", help="score every node with one metric")
    _add_graph_input(p)
    p.add_argument("--metric", choices=METRICS, default="pagerank")
    p.add_argument("--alpha", type=float, default=0.85)
    p.add_argument("--beta", type=float, default=0.1)
    p.add_argument("--epsilon", type=float, default=0.001)
    p.add_argument("--max-iter", type=int, default=1000)
    p.add_argument("--sink-mode", choices=[m.value for m in SinkMode], default=SinkMode.UNIFORM_TELEPORT.value)
    p.add_argument("--fatigue-form", choices=[f.value for f in FatigueForm], default=FatigueForm.EQUATION.value)
    p.add_argument("--threads", type=int, default=1, help="row blocks multiplied in parallel")
    _add_out(p)

    p = sub.add_parser("simulate", help="Monte Carlo surfer or explorer visit frequencies")
    _add_graph_input(p)
    p.add_argument("--mode", choices=("surfer", "explorer"), default="surfer")
    p.add_argument("--steps", type=int, default=1_000_000)
    p.add_argument("--span", type=int, default=2, help="explorer fatigue span")
    p.add_argument("--alpha", type=float, default=0.85)
    p.add_argument("--seed", type=int, default=0)
    _add_out(p)

    p = sub.add_parser("correlate", help="Pearson/Spearman of scores against visits at top-k cuts")
    p.add_argument("--scores", action="append", required=True, metavar="[NAME=]FILE")
    p.add_argument("--visits", required=True, help="label<TAB>visits; its order fixes node ids")
    p.add_argument("--cuts", default=",".join(map(str, DEFAULT_CUTS)))
    _add_out(p)

    p = sub.add_parser("rerank", help="add transformed static scores to a baseline run")
    p.add_argument("--run", required=True)
    p.add_argument("--scores", required=True)
    p.add_argument("--transform", choices=("sigm", "log", "satu"), default="sigm")
    p.add_argument("--w", type=float, default=1.8)
    p.add_argument("--k", type=float, default=1.0)
    p.add_argument("--a", type=float, default=0.6)
    p.add_argument("--scale", type=float, default=1.0, help="multiply static scores before transforming")
    _add_out(p)

    p = sub.add_parser("eval", help="MAP, GMAP, NDCG@10 and P@10 of a run")
    p.add_argument("--run", required=True)
    p.add_argument("--qrels", required=True)
    _add_out(p)
    return parser


@contextlib.contextmanager
def _output(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            yield fh


def _read_graph(args) -> SparseGraph:
    fmt = args.format
    name = Path(args.graph).name
    if fmt is None:
        fmt = "gml" if name.endswith((".gml", ".gml.gz")) else "tsv"
    gz = True if args.gzip else None
    if fmt == "gml":
        return read_gml(args.graph, gzipped=gz, drop_self_loops=args.drop_self_loops)
    return read_edge_tsv(args.graph, gzipped=gz, drop_self_loops=args.drop_self_loops)


def _parse_cuts(text: str) -> list[int]:
    try:
        cuts = [int(c) for c in text.split(",") if c.strip()]
    except ValueError:
        raise UsageError(f"--cuts must be comma-separated integers, got {text!r}") from None
    if not cuts or any(c < 2 for c in cuts) or cuts != sorted(cuts):
        raise UsageError("--cuts must be ascending integers >= 2")
    return cuts


def _validate(args) -> dict:
    """Check numeric flags before touching any file."""
    try:
        if args.command == "rank":
            if args.threads < 1:
                raise UsageError("--threads must be >= 1")
            return {
                "cfg": RankingConfig(
                    alpha=args.alpha,
                    beta=args.beta,
                    epsilon=args.epsilon,
                    max_iterations=args.max_iter,
                    sink_mode=SinkMode(args.sink_mode),
                    fatigue_form=FatigueForm(args.fatigue_form),
                )
            }
        if args.command == "simulate":
            return {"cfg": ExplorerConfig(steps=args.steps, alpha=args.alpha, fatigue_span=args.span, rng_seed=args.seed)}
        if args.command == "rerank":
            if not args.scale > 0:
                raise UsageError("--scale must be > 0")
            return {"params": TransformParams(args.transform, args.w, args.k, args.a)}
        if args.command == "correlate":
            return {"cuts": _parse_cuts(args.cuts)}
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return {}


def _cmd_ingest(args, _):
    g = _read_graph(args)
    if args.clickstream:
        types = None if args.link_type_filter == "any" else args.link_type_filter.split(",")
        g, stats = join_clickstream(g, read_clickstream(args.clickstream), types)
        log.info("clickstream: %d matched, %d skipped", stats.matched, stats.skipped)
    log.info("graph: %d nodes, %d edges", g.num_nodes, g.num_edges)
    if args.out_format == "gml":
        if args.out is None:
            write_gml(g, sys.stdout.buffer)
        else:
            write_gml(g, args.out)
    else:
        with _output(args.out) as fh:
            write_edge_tsv(g, fh)
    if args.visits:
        with _output(args.visits) as fh:
            write_scores(fh, g.labels, visits(g), sort=False)


def _cmd_rank(args, opts):
    cfg = opts["cfg"]
    g = _read_graph(args)
    report = None
    if args.metric == "indegree":
        scores = indegree_score(g)
    elif args.metric in ("hits-authority", "hits-hub"):
        auth, hub, report = hits(g, epsilon=cfg.epsilon, max_iterations=cfg.max_iterations)
        scores = auth if args.metric == "hits-authority" else hub
    else:
        fn = {"pagerank": pagerank, "reverse-pagerank": reverse_pagerank, "fatigued-pagerank": fatigued_pagerank}
        scores, report = fn[args.metric](g, cfg, blocks=args.threads, threads=args.threads)
    if report is not None:
        print(
            f"{args.metric}: iterations={report.iterations_used} "
            f"residual={report.final_residual:.6g} converged={str(report.converged).lower()}",
            file=sys.stderr,
        )
    with _output(args.out) as fh:
        write_scores(fh, g.labels, scores)


def _cmd_simulate(args, opts):
    g = _read_graph(args)
    sim = simulate_surfer if args.mode == "surfer" else simulate_explorer
    freqs = sim(g, opts["cfg"])
    with _output(args.out) as fh:
        write_scores(fh, g.labels, freqs)


def _read_score_file(path) -> dict[str, float]:
    with open(path, encoding="utf-8") as fh:
        return read_scores(fh)


def _cmd_correlate(args, opts):
    visits_map = _read_score_file(args.visits)
    labels = list(visits_map)
    y = [visits_map[lab] for lab in labels]
    reports = []
    for item in args.scores:
        name, sep, path = item.partition("=")
        if not sep:
            name, path = Path(item).stem, item
        scores_map = _read_score_file(path)
        if set(scores_map) != set(labels):
            missing = len(set(labels) - set(scores_map))
            extra = len(set(scores_map) - set(labels))
            raise GraphFormatError(f"{path}: labels differ from visits file ({missing} missing, {extra} extra)")
        x = [scores_map[lab] for lab in labels]
        reports.append(correlation_at_cuts(x, y, opts["cuts"], metric_name=name))
    with _output(args.out) as fh:
        write_reports_csv(fh, reports)


def _cmd_rerank(args, opts):
    run = read_run(args.run)
    scores = _read_score_file(args.scores)
    out = rerank_run(run, scores, opts["params"], scale=args.scale)
    with _output(args.out) as fh:
        write_run(fh, out)


def _cmd_eval(args, _):
    report = evaluate_run(read_run(args.run), read_qrels(args.qrels))
    with _output(args.out) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(EVAL_HEADER)
        writer.writerows(report.rows())


COMMANDS = {
    "ingest": _cmd_ingest,
    "rank": _cmd_rank,
    "simulate": _cmd_simulate,
    "correlate": _cmd_correlate,
    "rerank": _cmd_rerank,
    "eval": _cmd_eval,
}


def dispatch(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )
    try:
        opts = _validate(args)
    except UsageError as exc:
        print(f"fprank {args.command}: error: {exc}", file=sys.stderr)
        return 1
    try:
        COMMANDS[args.command](args, opts)
    except UsageError as exc:
        print(f"fprank {args.command}: error: {exc}", file=sys.stderr)
        return 1
    except (GraphFormatError, EmptyGraphError, OSError, ValueError) as exc:
        print(f"fprank {args.command}: data error: {exc}", file=sys.stderr)
        return 2
    return 0


def main() -> None:
    sys.exit(dispatch())
