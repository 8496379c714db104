"""
Command Line
============
``python -m coarsegraph <command> ...`` ties the constructions, checkers,
searches and certificates together.

Exit codes:
    0  ok / found
    1  violation / none exists (exhaustive)
    2  inconclusive (budget spent)
    3  bad arguments, failed preconditions, resource limits
    4  unreadable or malformed files

Reports go to standard output (``--json`` for machine-readable, sorted-key
JSON); progress and diagnostics go to standard error through logging.
"""

from __future__ import annotations

import argparse
import logging
import sys
from fractions import Fraction
from typing import Callable, Sequence

from coarsegraph import __version__
from coarsegraph.certificates import (
    VERDICT_OK,
    bundle_from_json,
    decomposition_from_json,
    decomposition_to_json,
    distance_to_json,
    dump_json,
    format_graph,
    format_rational,
    label_set,
    make_bundle,
    map_from_json,
    map_to_json,
    model_from_json,
    model_to_json,
    parse_rational,
    query_to_json,
    read_graph,
    read_json,
    read_labels,
    recheck_bundle,
    write_graph,
    write_text,
)
from coarsegraph.config import LOG_LEVELS, Settings, get_settings
from coarsegraph.constructions import (
    AssemblyParams,
    GadgetParams,
    build_2fat_witness,
    build_g,
    build_h,
    build_h_twisted,
    build_n_gadget,
    build_tree_leaf_path,
    paper_params,
)
from coarsegraph.corpus import (
    CORPUS_MAX_VERTICES,
    PIPELINE_PATTERNS,
    PIPELINE_POWERS,
    QI_POWERS,
    Agreement,
    connected_corpus,
    power_pipeline,
    random_corpus,
    summarize,
    sweep_power_pipeline,
    sweep_qi,
)
from coarsegraph.errors import CoarseGraphError, FormatError, UsageError
from coarsegraph.fatminor import exhaustive_oracle, find_fat_minor, inflate_model, merge_close_sets, separation_profile, verify_model
from coarsegraph.graph import pattern_by_name
from coarsegraph.menger import SpreadPathQuery, find_spread_paths, triple_oracle
from coarsegraph.quasiiso import check_quasi_isometry, identity_into_power
from coarsegraph.search import SearchBudget, SearchVerdict
from coarsegraph.treedecomp import (
    decompose_n_gadget,
    decompose_tree_leaf_path,
    decomposition_from_order,
    optimal_elimination_order,
    validate,
    width,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_INCONCLUSIVE = 2
EXIT_USAGE = 3
EXIT_FORMAT = 4

_AGREEMENT_EXIT = {
    Agreement.CONSISTENT: EXIT_OK,
    Agreement.INCONSISTENT: EXIT_NEGATIVE,
    Agreement.UNDECIDED: EXIT_INCONCLUSIVE,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _rational(text: str) -> Fraction:
    try:
        return parse_rational(text)
    except FormatError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be positive, got {value}")
    return value


# ============================================================
# REPORTING
# ============================================================

class Context:
    """Parsed arguments plus the effective settings for one run."""

    def __init__(self, args: argparse.Namespace, settings: Settings):
        self.args = args
        self.settings = settings

    def budget(self) -> SearchBudget:
        return SearchBudget(self.settings.default_budget)

    def emit(self, report: dict) -> None:
        if self.args.json:
            sys.stdout.write(dump_json(report))
            return
        for key in sorted(report):
            value = report[key]
            if isinstance(value, (dict, list)):
                continue
            print(f"{key}: {value}")
        if report.get("violation"):
            print(f"violation: {report['violation'].get('description', report['violation'])}")


def _violation_json(violation) -> dict | None:
    if violation is None:
        return None
    out = violation.to_json()
    out["description"] = violation.describe()
    return out


def _verdict_report(command: str, verdict: SearchVerdict, certificate: dict | None) -> dict:
    return {
        "command": command,
        "verdict": verdict.kind.value,
        "expansions": verdict.expansions,
        "certificate": certificate,
    }


def _write_certificate(path: str | None, certificate: dict) -> None:
    if path:
        write_text(path, dump_json(certificate))


def _check_report(command: str, violation, **extra) -> tuple[dict, int]:
    report = {
        "command": command,
        "verdict": VERDICT_OK if violation is None else "violation",
        "violation": _violation_json(violation),
    }
    report.update(extra)
    return report, EXIT_OK if violation is None else EXIT_NEGATIVE


# ============================================================
# CONSTRUCT / WITNESS
# ============================================================

def _assembly_params(args) -> AssemblyParams:
    if args.q is not None:
        return paper_params(args.q)
    missing = [name for name in ("n", "d", "s", "t", "c") if getattr(args, name) is None]
    if missing:
        raise UsageError(f"give --q or all of --n --d --s --t --c (missing {', '.join('--' + m for m in missing)})")
    return AssemblyParams(args.n, args.d, args.s, args.t, args.c)


def _gadget_params(args) -> GadgetParams:
    if args.q is not None:
        return paper_params(args.q).gadget
    if args.d is None or args.s is None:
        raise UsageError("give --q or both --d and --s")
    return GadgetParams(args.d, args.s)


def _require(args, *names: str) -> None:
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError(f"missing {', '.join('--' + n for n in missing)}")


def cmd_construct(ctx: Context) -> int:
    args = ctx.args
    limit = ctx.settings.max_vertices
    if args.kind == "tree-leaf-path":
        _require(args, "d")
        built = build_tree_leaf_path(args.d)
        graph, labels = built.graph, {"root": built.root, "leaves": list(built.leaves)}
    elif args.kind == "n-gadget":
        gadget = build_n_gadget(_gadget_params(args), max_vertices=limit)
        graph, labels = gadget.graph, gadget.labels.to_json()
    elif args.kind == "h":
        _require(args, "n")
        h = build_h_twisted(args.n) if args.twisted else build_h(args.n)
        graph, labels = h.graph, {"x": list(h.x), "y": list(h.y)}
    else:
        assembly = build_g(_assembly_params(args), max_vertices=limit)
        graph, labels = assembly.graph, assembly.labels()

    if args.out:
        write_graph(graph, args.out)
    elif not args.json:
        sys.stdout.write(format_graph(graph))
    if args.labels:
        write_text(args.labels, dump_json(labels))
    if args.out or args.json:
        ctx.emit({
            "command": "construct",
            "kind": args.kind,
            "vertices": graph.vertex_count,
            "edges": graph.edge_count,
            "out": args.out,
            "labels": args.labels,
        })
    return EXIT_OK


def cmd_witness_2fat(ctx: Context) -> int:
    args = ctx.args
    assembly = build_g(_assembly_params(args), max_vertices=ctx.settings.max_vertices)
    witness = build_2fat_witness(assembly)
    if args.as_h:
        pattern, model = build_h(witness.pattern.n).graph, witness.as_model_of_h()
    else:
        pattern, model = witness.pattern.graph, witness.model
    certificate = model_to_json(pattern, model)
    _write_certificate(args.out, certificate)
    ctx.emit({
        "command": "witness-2fat",
        "verdict": VERDICT_OK,
        "vertices": assembly.graph.vertex_count,
        "twisted": not args.as_h,
        "tight_pairs": [
            {"first": p.first.to_json(), "second": p.second.to_json(), "distance": distance_to_json(p.distance)}
            for p in witness.tight_pairs
        ],
        "tight_pair_count": len(witness.tight_pairs),
        "certificate": certificate,
    })
    return EXIT_OK


# ============================================================
# FAT MINORS
# ============================================================

def cmd_verify_model(ctx: Context) -> int:
    args = ctx.args
    host = read_graph(args.host)
    pattern, model = model_from_json(read_json(args.model), args.model)
    violation = verify_model(host, pattern, model, args.k, threads=ctx.settings.threads)
    k = model.fatness if args.k is None else args.k
    extra = {"fatness": format_rational(k)}
    if args.profile:
        extra["close_pairs"] = [
            {"first": p.first.label(), "second": p.second.label(), "distance": distance_to_json(p.distance)}
            for p in separation_profile(host, pattern, model, cutoff=k, threads=ctx.settings.threads)
        ]
    report, code = _check_report("verify-model", violation, **extra)
    ctx.emit(report)
    return code


def cmd_find_fat_minor(ctx: Context) -> int:
    args = ctx.args
    host = read_graph(args.host)
    pattern = pattern_by_name(args.pattern)
    if args.oracle:
        verdict = exhaustive_oracle(host, pattern, args.k)
    else:
        verdict = find_fat_minor(host, pattern, args.k, ctx.budget(), threads=ctx.settings.threads)
    certificate = model_to_json(pattern, verdict.witness) if verdict.is_found else None
    if certificate:
        _write_certificate(args.out, certificate)
    ctx.emit(_verdict_report("find-fat-minor", verdict, certificate))
    return verdict.exit_code


def cmd_inflate(ctx: Context) -> int:
    args = ctx.args
    host = read_graph(args.host)
    pattern, model = model_from_json(read_json(args.model), args.model)
    inflated = inflate_model(host, args.k, model, pattern, threads=ctx.settings.threads)
    certificate = model_to_json(pattern, inflated)
    _write_certificate(args.out, certificate)
    ctx.emit({"command": "inflate", "verdict": VERDICT_OK, "fatness": args.k, "certificate": certificate})
    return EXIT_OK


def cmd_merge_sets(ctx: Context) -> int:
    args = ctx.args
    host = read_graph(args.host)
    table = read_labels(args.sets)
    names = sorted(table)
    result = merge_close_sets(host, [table[name] for name in names], args.eps)
    merged = {str(i): sorted(part) for i, part in enumerate(result.sets)}
    if args.out:
        write_text(args.out, dump_json(merged))
    ctx.emit({
        "command": "merge-sets",
        "verdict": VERDICT_OK,
        "input_sets": len(names),
        "output_sets": len(result.sets),
        "assignment": {name: result.index_map[i] for i, name in enumerate(names)},
        "radius_used": format_rational(result.radius_used),
        "sets": merged,
    })
    return EXIT_OK


# ============================================================
# QUASI-ISOMETRIES
# ============================================================

def cmd_check_qi(ctx: Context) -> int:
    args = ctx.args
    domain = read_graph(args.domain)
    codomain = read_graph(args.codomain)
    vertex_map = map_from_json(read_json(args.map), domain, codomain, args.map)
    violation = check_quasi_isometry(vertex_map, threads=ctx.settings.threads)
    report, code = _check_report("check-qi", violation, q=format_rational(vertex_map.q))
    ctx.emit(report)
    return code


def cmd_power_qi(ctx: Context) -> int:
    args = ctx.args
    host = read_graph(args.host)
    vertex_map = identity_into_power(host, args.k)
    if args.power_out:
        write_graph(vertex_map.codomain, args.power_out)
    certificate = map_to_json(vertex_map)
    _write_certificate(args.out, certificate)
    violation = check_quasi_isometry(vertex_map, threads=ctx.settings.threads)
    report, code = _check_report("power-qi", violation, certificate=certificate, k=args.k)
    ctx.emit(report)
    return code


# ============================================================
# TREE DECOMPOSITIONS
# ============================================================

def cmd_tree_decomp(ctx: Context) -> int:
    args = ctx.args
    action = args.action
    if action == "build":
        _require(args, "family")
        if args.family == "tree-leaf-path":
            _require(args, "d")
            g = build_tree_leaf_path(args.d).graph
            td = decompose_tree_leaf_path(args.d)
        else:
            gadget = build_n_gadget(_gadget_params(args), max_vertices=ctx.settings.max_vertices)
            g, td = gadget.graph, decompose_n_gadget(gadget)
        if args.graph_out:
            write_graph(g, args.graph_out)
        certificate = decomposition_to_json(td)
        _write_certificate(args.out, certificate)
        report, code = _check_report("tree-decomp build", validate(g, td), width=width(td), nodes=len(td.bags))
        if args.json and not args.out:
            report["certificate"] = certificate
    elif action == "validate":
        _require(args, "graph", "decomp")
        g = read_graph(args.graph)
        td = decomposition_from_json(read_json(args.decomp), args.decomp)
        report, code = _check_report("tree-decomp validate", validate(g, td), width=width(td))
    elif action == "width":
        _require(args, "decomp")
        td = decomposition_from_json(read_json(args.decomp), args.decomp)
        report, code = {"command": "tree-decomp width", "width": width(td), "nodes": len(td.bags)}, EXIT_OK
    else:
        _require(args, "graph")
        g = read_graph(args.graph)
        tw, order = optimal_elimination_order(g, ctx.settings.treewidth_cap)
        certificate = decomposition_to_json(decomposition_from_order(g, order)) if order else None
        if certificate:
            _write_certificate(args.out, certificate)
        report = {"command": "tree-decomp exact", "treewidth": tw, "order": order, "certificate": certificate}
        code = EXIT_OK
    ctx.emit(report)
    return code


# ============================================================
# SPREAD PATHS
# ============================================================

def cmd_spread_paths(ctx: Context) -> int:
    args = ctx.args
    g = read_graph(args.graph)
    labels = read_labels(args.labels)
    query = SpreadPathQuery(
        label_set(labels, args.s_labels, args.labels),
        label_set(labels, args.t_labels, args.labels),
        args.k,
        args.dist,
    )
    if args.oracle:
        verdict = triple_oracle(g, query, args.length_cap)
    else:
        verdict = find_spread_paths(g, query, ctx.budget())
    certificate = verdict.witness.to_json() if verdict.is_found else None
    if certificate:
        _write_certificate(args.out, certificate)
    report = _verdict_report("spread-paths", verdict, certificate)
    report["query"] = query_to_json(query)
    ctx.emit(report)
    return verdict.exit_code


# ============================================================
# PIPELINE, CERTIFY, SWEEP
# ============================================================

def cmd_pipeline(ctx: Context) -> int:
    args = ctx.args
    host = read_graph(args.host)
    report = power_pipeline(host, pattern_by_name(args.pattern), args.k, ctx.budget())
    body = report.to_json()
    verdict = VERDICT_OK if report.consistent else report.agreement.value
    body.update({"command": "pipeline-theorem13", "pattern": args.pattern, "verdict": verdict})
    ctx.emit(body)
    return _AGREEMENT_EXIT[report.agreement]


def _certify_inputs(args) -> tuple[dict, dict, dict]:
    kind = args.kind
    if kind in ("model", "witness-2fat"):
        _require(args, "host", "model")
        return read_json(args.model), {"host": args.host}, {}
    if kind == "qi-map":
        _require(args, "domain", "codomain", "map")
        return read_json(args.map), {"domain": args.domain, "codomain": args.codomain}, {}
    if kind == "tree-decomposition":
        _require(args, "graph", "decomp")
        return read_json(args.decomp), {"graph": args.graph}, {}
    _require(args, "graph", "paths", "labels", "k", "dist")
    labels = read_labels(args.labels)
    query = SpreadPathQuery(
        label_set(labels, args.s_labels, args.labels),
        label_set(labels, args.t_labels, args.labels),
        args.k,
        args.dist,
    )
    return read_json(args.paths), {"graph": args.graph}, query_to_json(query)


def cmd_certify(ctx: Context) -> int:
    args = ctx.args
    if args.check:
        bundle = bundle_from_json(read_json(args.check), args.check)
        reproduced = recheck_bundle(bundle, ctx.settings.threads)
        same = reproduced == bundle.verdict
        ctx.emit({
            "command": "certify --check",
            "kind": bundle.kind,
            "recorded": bundle.verdict,
            "reproduced": reproduced,
            "verdict": VERDICT_OK if same else "mismatch",
        })
        return EXIT_OK if same else EXIT_NEGATIVE
    if args.kind is None:
        raise UsageError("certify needs a certificate kind or --check BUNDLE")
    payload, inputs, parameters = _certify_inputs(args)
    bundle = make_bundle(args.kind, payload, inputs, parameters, ctx.settings.threads)
    document = bundle.to_json()
    if args.out:
        write_text(args.out, dump_json(document))
    ctx.emit({"command": "certify", "kind": bundle.kind, "verdict": bundle.verdict, "bundle": document})
    return EXIT_OK if bundle.verdict == VERDICT_OK else EXIT_NEGATIVE


def cmd_sweep(ctx: Context) -> int:
    args = ctx.args
    graphs = connected_corpus(args.max_vertices)
    if args.random:
        graphs += random_corpus(args.random, args.random_low, args.random_high, args.seed)
    logger.info("Sweep %s over %d graphs", args.sweep, len(graphs))
    if args.sweep == "theorem13":
        table = sweep_power_pipeline(
            graphs, args.patterns or PIPELINE_PATTERNS, args.powers or PIPELINE_POWERS, ctx.settings.default_budget
        )
    else:
        table = sweep_qi(graphs, args.powers or QI_POWERS)
    summary = summarize(args.sweep, table)
    if args.out:
        try:
            table.to_csv(args.out, index=False)
        except OSError as e:
            raise FormatError(f"cannot write file: {e.strerror}", source=args.out) from None
    if args.summary:
        write_text(args.summary, dump_json(summary))
    summary["command"] = f"sweep {args.sweep}"
    ctx.emit(summary)
    if summary.get("inconsistent", summary.get("failures", 0)):
        return EXIT_NEGATIVE
    return EXIT_INCONCLUSIVE if summary.get("undecided") else EXIT_OK


# ============================================================
# ARGUMENT PARSER
# ============================================================

def _add_params(p: argparse.ArgumentParser, *names: str) -> None:
    for name in names:
        p.add_argument(f"--{name}", type=_positive_int)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="coarsegraph", description="Coarse graph theory toolkit: gadgets, fat minors, certificates")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "--threads", type=_positive_int,
        help="worker threads for model and map verification, including the check of every found model; "
        "searches and path verification run on one thread (default from settings)",
    )
    parser.add_argument("--json", action="store_true", help="machine-readable report on stdout")
    parser.add_argument("--log-level", choices=LOG_LEVELS, help="stderr log level")
    parser.add_argument("--budget", type=_positive_int, help="node expansions per search")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("construct", help="build a named construction")
    p.add_argument("kind", choices=["tree-leaf-path", "n-gadget", "h", "g"])
    _add_params(p, "q", "n", "d", "s", "t", "c")
    p.add_argument("--twisted", action="store_true", help="for h: the twisted crossing")
    p.add_argument("--out", help="graph text output (stdout if omitted)")
    p.add_argument("--labels", help="labels JSON output")
    p.set_defaults(handler=cmd_construct)

    p = sub.add_parser("witness-2fat", help="2-fat model of H in the assembly")
    _add_params(p, "q", "n", "d", "s", "t", "c")
    p.add_argument("--as-h", action="store_true", help="relabel the model onto H instead of its twist")
    p.add_argument("--out", help="model certificate output")
    p.set_defaults(handler=cmd_witness_2fat)

    p = sub.add_parser("verify-model", help="verify a model certificate")
    p.add_argument("--host", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--k", type=_rational, help="fatness to check (default: the certificate's)")
    p.add_argument("--profile", action="store_true", help="list separated pairs at distance <= k")
    p.set_defaults(handler=cmd_verify_model)

    p = sub.add_parser("find-fat-minor", help="search for a k-fat model")
    p.add_argument("--host", required=True)
    p.add_argument("--pattern", required=True, help="k3, p4, c4, h15, ...")
    p.add_argument("--k", type=_rational, required=True)
    p.add_argument("--oracle", action="store_true", help="use the brute-force oracle")
    p.add_argument("--out")
    p.set_defaults(handler=cmd_find_fat_minor)

    p = sub.add_parser("inflate", help="inflate a 3-fat model of G^k into a k-fat model of G")
    p.add_argument("--host", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--k", type=_positive_int, required=True)
    p.add_argument("--out")
    p.set_defaults(handler=cmd_inflate)

    p = sub.add_parser("merge-sets", help="merge connected sets closer than eps")
    p.add_argument("--host", required=True)
    p.add_argument("--sets", required=True, help="label table of connected sets")
    p.add_argument("--eps", type=_rational, required=True)
    p.add_argument("--out")
    p.set_defaults(handler=cmd_merge_sets)

    p = sub.add_parser("check-qi", help="check a vertex-map certificate")
    p.add_argument("--domain", required=True)
    p.add_argument("--codomain", required=True)
    p.add_argument("--map", required=True)
    p.set_defaults(handler=cmd_check_qi)

    p = sub.add_parser("power-qi", help="identity map into the k-th power")
    p.add_argument("--host", required=True)
    p.add_argument("--k", type=_positive_int, required=True)
    p.add_argument("--out", help="map certificate output")
    p.add_argument("--power-out", help="power graph output")
    p.set_defaults(handler=cmd_power_qi)

    p = sub.add_parser("tree-decomp", help="build, validate or measure tree decompositions")
    p.add_argument("action", choices=["build", "validate", "width", "exact"])
    p.add_argument("family", nargs="?", choices=["tree-leaf-path", "n-gadget"])
    _add_params(p, "q", "d", "s")
    p.add_argument("--graph")
    p.add_argument("--decomp")
    p.add_argument("--out")
    p.add_argument("--graph-out")
    p.set_defaults(handler=cmd_tree_decomp)

    p = sub.add_parser("spread-paths", help="search for k pairwise-far (S,T)-paths")
    p.add_argument("--graph", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--s-labels", default="S", help="label naming S (default S)")
    p.add_argument("--t-labels", default="T", help="label naming T (default T)")
    p.add_argument("--k", type=_positive_int, required=True)
    p.add_argument("--dist", type=_rational, required=True)
    p.add_argument("--oracle", action="store_true", help="use the brute-force path oracle")
    p.add_argument("--length-cap", type=_positive_int)
    p.add_argument("--out")
    p.set_defaults(handler=cmd_spread_paths)

    p = sub.add_parser("pipeline-theorem13", help="host / power graph / inflation cross-check")
    p.add_argument("--host", required=True)
    p.add_argument("--pattern", required=True)
    p.add_argument("--k", type=_positive_int, required=True)
    p.set_defaults(handler=cmd_pipeline)

    p = sub.add_parser("certify", help="bundle a certificate with its inputs, or re-check a bundle")
    p.add_argument("kind", nargs="?", choices=["model", "qi-map", "tree-decomposition", "spread-paths", "witness-2fat"])
    p.add_argument("--check", metavar="BUNDLE")
    for name in ("host", "model", "domain", "codomain", "map", "graph", "decomp", "paths", "labels", "out"):
        p.add_argument(f"--{name}")
    p.add_argument("--s-labels", default="S")
    p.add_argument("--t-labels", default="T")
    p.add_argument("--k", type=_positive_int)
    p.add_argument("--dist", type=_rational)
    p.set_defaults(handler=cmd_certify)

    p = sub.add_parser("sweep", help="run an acceptance grid over a corpus")
    p.add_argument("sweep", choices=["theorem13", "qi"])
    p.add_argument(
        "--max-vertices", type=_positive_int, default=CORPUS_MAX_VERTICES,
        help=f"every connected graph up to this size (at most {CORPUS_MAX_VERTICES})",
    )
    p.add_argument("--random", type=int, default=0, help="extra seeded random graphs")
    p.add_argument("--random-low", type=_positive_int, default=9)
    p.add_argument("--random-high", type=_positive_int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--patterns", nargs="+")
    p.add_argument("--powers", nargs="+", type=_positive_int)
    p.add_argument("--out", help="CSV table")
    p.add_argument("--summary", help="JSON summary")
    p.set_defaults(handler=cmd_sweep)
    return parser


# ============================================================
# ENTRY POINT
# ============================================================

def _configure_logging(level: str) -> None:
    logging.basicConfig(stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    logging.getLogger().setLevel(level)


def _fail(message: str, error: CoarseGraphError, code: int, as_json: bool) -> int:
    sys.stderr.write(f"error: {message}\n")
    if as_json:
        sys.stdout.write(dump_json({"error": message, "kind": type(error).__name__, "exit_code": code}))
    return code


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    as_json = "--json" in argv
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        return _fail(str(e), e, EXIT_USAGE, as_json)

    settings = get_settings().with_overrides(
        threads=args.threads, default_budget=args.budget, log_level=args.log_level
    )
    _configure_logging(settings.log_level)
    handler: Callable[[Context], int] = args.handler
    try:
        return handler(Context(args, settings))
    except FormatError as e:
        return _fail(str(e), e, EXIT_FORMAT, as_json)
    except CoarseGraphError as e:
        return _fail(str(e), e, EXIT_USAGE, as_json)


if __name__ == "__main__":
    sys.exit(main())
