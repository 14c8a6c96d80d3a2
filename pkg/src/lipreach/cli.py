"""Command-line front end: queries, SAT generation, oracle runs, benchmarks.

Subcommands
-----------
range / verify / compare
    Run a reachability query described by a JSON query file (see below) and
    print a machine-readable report to stdout.
gensat
    Compile a DIMACS CNF file into a model file plus a sidecar describing
    its input box and output functional.
oracle
    Brute-force the same query on a lattice, as an independent cross-check.
bench
    Run a suite of networks through the range query and tabulate runtime,
    evaluation counts, and intervals (CSV or JSON).

Query files are JSON objects::

    {"model": "net.json", "base": [0.1, 0.2], "free_dims": [0, 1],
     "bounds": [[0, 1], [0, 1]], "query": "range", "label": 0,
     "tap": "output", "epsilon": 0.01, "mode": "static"}

``compare`` queries add either ``model_b`` (network comparison) or
``base_b``/``free_dims_b``/``bounds_b`` (subspace comparison); ``oracle``
queries add ``grid_steps``.  Relative model paths resolve against the query
file's directory.

Exit codes: 0 safe/converged, 1 unsafe, 2 unknown or not converged, 3 usage,
file, or validation errors, 4 unexpected failures.  Reports are
byte-identical across repeated runs and thread counts; wall-clock timing is
therefore kept off stdout unless ``--timing`` is given (a human-readable
timing line always goes to stderr).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .bench import BENCH_BOUNDS, run_suite, synthetic_suite
from .lipschitz import DEFAULT_ETA, network_constant
from .model import ModelFormatError, load_model_file, save_model
from .oracle import GridSpec, grid_extrema
from .reach import (
    SQRT2,
    QueryError,
    QuerySubspace,
    batch_objective,
    compare_networks,
    compare_subspaces,
    composed_objective,
    ospec_by_name,
    output_range,
    verify_safety,
)
from .satgen import DimacsError, corner_decision, input_box, parse_dimacs, sat_objective, build_network
from .satgen import CORNER_LIMIT

EXIT_OK = 0
EXIT_UNSAFE = 1
EXIT_UNKNOWN = 2
EXIT_ERROR = 3
EXIT_INTERNAL = 4


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; 2 is taken by the unknown verdict
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def _build_parser() -> _Parser:
    parser = _Parser(prog="lipreach", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"lipreach {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def query_flags(p):
        p.add_argument("--query", required=True, help="query JSON file")
        p.add_argument("--model", help="override the query's model path")
        p.add_argument("--epsilon", type=float, help="override tolerance")
        p.add_argument("--mode", choices=["static", "dynamic"], help="constant mode")
        p.add_argument("--eta", type=float, help="dynamic inflation factor (> 1)")
        p.add_argument("--tap", choices=["output", "logit"], help="evaluation tap")
        p.add_argument("--threads", type=int, default=1,
                       help="worker threads for lattice scans (output is identical)")
        p.add_argument("--timing", action="store_true",
                       help="include wall-clock milliseconds in the report")
        fmt = p.add_mutually_exclusive_group()
        fmt.add_argument("--json", dest="fmt", action="store_const", const="json")
        fmt.add_argument("--csv", dest="fmt", action="store_const", const="csv")

    for name in ("range", "verify", "compare"):
        query_flags(sub.add_parser(name, help=f"run a {name} query"))

    p = sub.add_parser("oracle", help="brute-force lattice cross-check of a query")
    query_flags(p)
    p.add_argument("--step", type=float, help="lattice step for every free dimension")

    p = sub.add_parser("gensat", help="compile DIMACS CNF into a model file")
    p.add_argument("--cnf", required=True, help="DIMACS CNF input")
    p.add_argument("--out", required=True, help="model JSON output path")
    p.add_argument("--timing", action="store_true")

    p = sub.add_parser("bench", help="benchmark a suite of networks")
    p.add_argument("--suite", help="suite JSON ({\"models\": [paths...], ...})")
    p.add_argument("--synthetic", action="store_true",
                   help="use the built-in six-network synthetic suite")
    p.add_argument("--epsilon", type=float, default=0.01)
    p.add_argument("--mode", choices=["static", "dynamic"], default="static")
    fmt = p.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="fmt", action="store_const", const="json")
    fmt.add_argument("--csv", dest="fmt", action="store_const", const="csv")
    return parser


def _load_query(args, default_epsilon: float = 0.01) -> dict:
    with open(args.query, "r", encoding="utf-8") as fh:
        query = json.load(fh)
    if not isinstance(query, dict):
        raise QueryError("query file must contain a JSON object")
    base_dir = os.path.dirname(os.path.abspath(args.query))

    def resolve(path):
        return path if os.path.isabs(path) else os.path.join(base_dir, path)

    if args.model:
        query["model"] = args.model
    if "model" not in query:
        raise QueryError("query is missing a 'model' path")
    query["model"] = resolve(query["model"])
    if "model_b" in query:
        query["model_b"] = resolve(query["model_b"])
    for key, override in (
        ("epsilon", args.epsilon),
        ("mode", args.mode),
        ("eta", args.eta),
        ("tap", args.tap),
    ):
        if override is not None:
            query[key] = override
    query.setdefault("epsilon", default_epsilon)
    query.setdefault("mode", "static")
    query.setdefault("eta", DEFAULT_ETA)
    query.setdefault("o", "projection")
    query.setdefault("label", 0)
    return query


def _subspace(query: dict, suffix: str = "") -> QuerySubspace:
    try:
        base = query["base" + suffix]
        free_dims = query["free_dims" + suffix]
        bounds = query["bounds" + suffix]
    except KeyError as exc:
        raise QueryError(f"query is missing field {exc}") from exc
    return QuerySubspace(
        base=np.asarray(base, dtype=np.float64),
        free_dims=tuple(free_dims),
        bounds=tuple((float(a), float(b)) for a, b in bounds),
    )


def _default_tap(query: dict, net) -> str:
    tap = query.get("tap")
    if tap is None:
        tap = "logit" if net.has_softmax else "output"
    return tap


def _budget_summary(net, tap: str, query: dict, o_factor: float = 1.0) -> dict:
    budget = network_constant(net, tap=tap, mode=query["mode"], eta=query["eta"])
    return {
        "per_layer": list(budget.per_layer),
        "network_constant": budget.network_constant,
        "o_factor": o_factor,
        "effective_static": budget.network_constant * o_factor,
        "mode": budget.mode,
        "eta": budget.eta,
        "heuristic": budget.mode == "dynamic",
    }


def _report(command: str, query: dict, result: dict, extra: dict, args, wall_ms: float) -> str:
    report = {
        "tool": {"name": "lipreach", "version": __version__},
        "command": command,
        "query": query,
        "result": result,
    }
    report.update(extra)
    if args.timing:
        report["wall_ms"] = wall_ms
    return json.dumps(report, sort_keys=True)


def _cmd_range(args) -> int:
    query = _load_query(args)
    net = load_model_file(query["model"])
    subspace = _subspace(query)
    tap = _default_tap(query, net)
    o = ospec_by_name(query["o"], int(query["label"]), net.width_at_tap(tap))
    start = time.perf_counter()
    result = output_range(
        net, subspace, tap=tap, epsilon=float(query["epsilon"]),
        mode=query["mode"], eta=float(query["eta"]), o=o,
    )
    wall_ms = 1000.0 * (time.perf_counter() - start)
    print(_report("range", query, result.to_dict(),
                  {"lipschitz": _budget_summary(net, tap, query, o.lipschitz_factor)},
                  args, wall_ms))
    print(f"range query finished in {wall_ms:.1f} ms", file=sys.stderr)
    return EXIT_OK if result.converged else EXIT_UNKNOWN


def _cmd_verify(args) -> int:
    query = _load_query(args, default_epsilon=0.05)
    net = load_model_file(query["model"])
    subspace = _subspace(query)
    tap = _default_tap(query, net)
    start = time.perf_counter()
    verdict = verify_safety(
        net, subspace, epsilon=float(query["epsilon"]),
        tap=tap, mode=query["mode"], eta=float(query["eta"]),
    )
    wall_ms = 1000.0 * (time.perf_counter() - start)
    print(_report("verify", query, verdict.to_dict(),
                  {"lipschitz": _budget_summary(net, tap, query, SQRT2)}, args, wall_ms))
    print(f"verify query finished in {wall_ms:.1f} ms", file=sys.stderr)
    if verdict.verdict == "safe":
        return EXIT_OK
    if verdict.verdict == "unsafe":
        return EXIT_UNSAFE
    return EXIT_UNKNOWN


def _cmd_compare(args) -> int:
    query = _load_query(args)
    net = load_model_file(query["model"])
    subspace = _subspace(query)
    tap = _default_tap(query, net)
    common = dict(
        label=int(query["label"]), tap=tap, epsilon=float(query["epsilon"]),
        mode=query["mode"], eta=float(query["eta"]),
    )
    o = ospec_by_name(query["o"], common["label"], net.width_at_tap(tap))
    start = time.perf_counter()
    if "model_b" in query:
        other = load_model_file(query["model_b"])
        verdict = compare_networks(net, other, subspace, o=o, **common)
    elif "bounds_b" in query:
        second = _subspace(query, "_b") if "base_b" in query else QuerySubspace(
            base=subspace.base,
            free_dims=tuple(query.get("free_dims_b", subspace.free_dims)),
            bounds=tuple((float(a), float(b)) for a, b in query["bounds_b"]),
        )
        verdict = compare_subspaces(net, subspace, second, o=o, **common)
    else:
        raise QueryError("compare query needs 'model_b' or 'bounds_b'")
    wall_ms = 1000.0 * (time.perf_counter() - start)
    print(_report("compare", query, verdict.to_dict(),
                  {"lipschitz": _budget_summary(net, tap, query, o.lipschitz_factor)},
                  args, wall_ms))
    print(f"compare query finished in {wall_ms:.1f} ms", file=sys.stderr)
    converged = verdict.first.converged and verdict.second.converged
    if converged and verdict.relation != "incomparable":
        return EXIT_OK
    return EXIT_UNKNOWN


def _cmd_oracle(args) -> int:
    query = _load_query(args)
    net = load_model_file(query["model"])
    subspace = _subspace(query)
    tap = _default_tap(query, net)
    o = ospec_by_name(query["o"], int(query["label"]), net.width_at_tap(tap))
    steps = query.get("grid_steps")
    if args.step is not None:
        steps = [args.step] * len(subspace.free_dims)
    if not steps:
        raise QueryError("oracle needs 'grid_steps' in the query or --step")
    grid = GridSpec(steps=tuple(float(s) for s in steps))
    k = network_constant(net, tap=tap).network_constant * o.lipschitz_factor
    start = time.perf_counter()
    result = grid_extrema(
        composed_objective(net, subspace, o, tap),
        subspace.bounds,
        grid,
        batch_objective=batch_objective(net, subspace, o, tap),
        lipschitz=k,
        threads=max(1, args.threads),
    )
    wall_ms = 1000.0 * (time.perf_counter() - start)
    payload = {
        "min_value": result.min_value,
        "max_value": result.max_value,
        "argmin": result.argmin.tolist(),
        "argmax": result.argmax.tolist(),
        "points": result.points,
        "lattice_slack": result.lattice_slack,
    }
    print(_report("oracle", query, payload, {}, args, wall_ms))
    print(f"oracle scan of {result.points} points in {wall_ms:.1f} ms", file=sys.stderr)
    return EXIT_OK


def _cmd_gensat(args) -> int:
    with open(args.cnf, "r", encoding="utf-8") as fh:
        formula = parse_dimacs(fh.read())
    net = build_network(formula)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(save_model(net))
    sidecar = {
        "input_box": input_box(formula),
        "o": sat_objective(net).name,
        "num_vars": formula.num_vars,
        "num_clauses": formula.num_clauses,
    }
    if formula.num_vars <= CORNER_LIMIT:
        sidecar["corner_decision"] = corner_decision(formula)
    sidecar_path = args.out + ".meta.json"
    with open(sidecar_path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(sidecar, sort_keys=True))
    report = {
        "tool": {"name": "lipreach", "version": __version__},
        "command": "gensat",
        "model": args.out,
        "sidecar": sidecar_path,
    }
    report.update(sidecar)
    print(json.dumps(report, sort_keys=True))
    return EXIT_OK


def _cmd_bench(args) -> int:
    if args.synthetic:
        nets = synthetic_suite()
        bounds = BENCH_BOUNDS
    elif args.suite:
        with open(args.suite, "r", encoding="utf-8") as fh:
            suite = json.load(fh)
        base_dir = os.path.dirname(os.path.abspath(args.suite))
        nets = [
            load_model_file(p if os.path.isabs(p) else os.path.join(base_dir, p))
            for p in suite.get("models", [])
        ]
        bounds = tuple(
            (float(a), float(b)) for a, b in suite.get("bounds", BENCH_BOUNDS)
        )
    else:
        raise QueryError("bench needs --suite or --synthetic")
    rows = run_suite(nets, bounds=bounds, epsilon=args.epsilon, mode=args.mode)
    if args.fmt == "csv":
        buf = io.StringIO()
        fields = ["name", "layers", "neurons", "lipschitz", "lower", "upper",
                  "evaluations", "converged", "wall_ms"]
        writer = csv.DictWriter(buf, fieldnames=fields)
        writer.writeheader()
        writer.writerows(rows)
        sys.stdout.write(buf.getvalue())
    else:
        print(json.dumps({"command": "bench", "rows": rows}, sort_keys=True))
    return EXIT_OK


_COMMANDS = {
    "range": _cmd_range,
    "verify": _cmd_verify,
    "compare": _cmd_compare,
    "oracle": _cmd_oracle,
    "gensat": _cmd_gensat,
    "bench": _cmd_bench,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (OSError, json.JSONDecodeError, ModelFormatError, DimacsError,
            QueryError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
