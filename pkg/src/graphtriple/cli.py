"""Command line entry point for batch verification.

Subcommands: analyze, trace, ktheory, hochschild, clifford, spectral,
conditions.  Identical inputs and flags produce byte-identical output.
Exit codes follow sysexits conventions: 64 usage, 65 invalid data, 66 no
input; the conditions subcommand exits 0 when all nine hold, 2 when some
fail and 3 when prerequisites were not applicable.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from .clifford import sign_table_check, volume_form
from .conditions import evaluate_all, hypothesis_check, kgraph_hypothesis_check
from .graphs import (GraphFormatError, GraphPresentation, GraphValidationError,
                     graph_from_document)
from .hochschild import (check_orientation_1graph,
                         orientation_cycle_kgraph, pi_D_identity_check,
                         verify_cancellation_steps)
from .kgraphs import kgraph_from_document
from .spectral import (singular_profile, total_multiplicities,
                       vertex_multiplicities)
from .traces import (NoFaithfulTraceError, ktheory_ranks, solve_graph_trace,
                     solve_kgraph_trace)

EX_USAGE = 64
EX_DATAERR = 65
EX_NOINPUT = 66


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        sys.exit(EX_USAGE)


def _load(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"cannot read {path}: {exc}", file=sys.stderr)
        sys.exit(EX_NOINPUT)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        print(
            f"syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}",
            file=sys.stderr,
        )
        sys.exit(EX_DATAERR)
    try:
        if isinstance(doc, dict) and doc.get("k", 1) == 1 and "squares" not in doc:
            return graph_from_document(doc)
        return kgraph_from_document(doc)
    except (GraphFormatError, GraphValidationError) as exc:
        print(f"validation failure: {exc}", file=sys.stderr)
        sys.exit(EX_DATAERR)


def _emit(payload, args) -> None:
    if getattr(args, "format", "json") == "csv" and hasattr(payload, "to_csv"):
        text = payload.to_csv()
    else:
        doc = payload.to_json() if hasattr(payload, "to_json") else payload
        text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if getattr(args, "out", None):
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _parse_end_values(pairs):
    if not pairs:
        return None
    out = {}
    for item in pairs:
        if "=" not in item:
            raise GraphValidationError(f"end value must be END=VALUE: {item!r}")
        key, val = item.split("=", 1)
        out[key] = Fraction(val)
    return out


def _cmd_analyze(args) -> int:
    g = _load(args.input)
    if isinstance(g, GraphPresentation):
        payload = {
            "structural": g.structural_report(),
            "ends": [
                {"kind": e.kind, "id": e.id, "vertices": list(e.vertices)}
                for e in g.find_ends()
            ],
            "single_entry": _jsonable(g.single_entry_check()),
            "classification": {
                "kind": g.classify().kind, "n": g.classify().n,
            },
            "hypotheses": hypothesis_check(g),
        }
    else:
        payload = {
            "k": g.k,
            "single_exit": _jsonable(g.single_exit_check()),
            "connected": g.connected(),
            "unit_degree_paths": [list(p) for p in g.unit_degree_paths()],
            "hypotheses": kgraph_hypothesis_check(g),
        }
    _emit(payload, args)
    return 0


def _cmd_trace(args) -> int:
    g = _load(args.input)
    try:
        if isinstance(g, GraphPresentation):
            trace = solve_graph_trace(g, _parse_end_values(args.end_value))
            payload = {
                "vertices": {v: str(trace.values[v]) for v in g.vertices},
                "ends": {k: str(v) for k, v in trace.end_values.items()},
            }
        else:
            trace = solve_kgraph_trace(g)
            payload = {"vertices": {v: str(trace.values[v]) for v in g.vertices}}
    except (NoFaithfulTraceError, GraphValidationError) as exc:
        print(f"validation failure: {exc}", file=sys.stderr)
        return EX_DATAERR
    _emit(payload, args)
    return 0


def _cmd_ktheory(args) -> int:
    g = _load(args.input)
    if not isinstance(g, GraphPresentation):
        print("K-theory ranks are computed for 1-graphs", file=sys.stderr)
        return EX_DATAERR
    try:
        payload = ktheory_ranks(g)
    except GraphValidationError as exc:
        print(f"validation failure: {exc}", file=sys.stderr)
        return EX_DATAERR
    _emit(payload, args)
    return 0


def _cmd_hochschild(args) -> int:
    g = _load(args.input)
    if isinstance(g, GraphPresentation):
        report = check_orientation_1graph(g, depth=args.level)
        payload = {
            "boundary_coefficients": report["boundary_coefficients"],
            "b_cycle_zero": report["closed_form_zero"],
            "truncated_boundary_is_boundary_residue":
                report["truncated_boundary_is_boundary_residue"],
            "pi_D_identity_on_interior": report["pi_D_identity_on_interior"],
            "orientable": report["orientable"],
        }
    else:
        cancel = verify_cancellation_steps(g)
        cycle = orientation_cycle_kgraph(g)
        pid = pi_D_identity_check(cycle)
        payload = {
            "b_ck_zero": cancel["b_ck_zero"],
            "cancellation_steps": {
                "step1_middle_terms_vanish": cancel["step1_middle_terms_vanish"],
                "step2_elementary_tensors_equal":
                    cancel["step2_elementary_tensors_equal"],
                "step3_ck_cancellation": cancel["step3_ck_cancellation"],
            },
            "witnesses": _jsonable({
                "step1": cancel["step1_witness"],
                "step2": cancel["step2_witness"],
                "step3": cancel["step3_witness"],
            }),
            "pi_D_is_volume_form": pid["pass"],
        }
    _emit(payload, args)
    return 0


def _cmd_clifford(args) -> int:
    report = sign_table_check(args.kmax)
    payload = {
        "pass": report["pass"],
        "table": {
            str(k): entry for k, entry in report["entries"].items()
        },
        "omega_squares": {
            str(k): str(volume_form(k)["omega_sq_scalar"])
            for k in range(1, args.kmax + 1)
        },
    }
    _emit(payload, args)
    return 0 if report["pass"] else 2


def _cmd_spectral(args) -> int:
    g = _load(args.input)
    if not isinstance(g, GraphPresentation):
        print("spectral profiles are computed for 1-graphs", file=sys.stderr)
        return EX_DATAERR
    try:
        trace = solve_graph_trace(g, _parse_end_values(args.end_value))
        if args.vertex:
            if args.vertex not in g.vertices:
                raise GraphValidationError(f"unknown vertex {args.vertex!r}")
            model = vertex_multiplicities(g, trace, args.vertex)
        else:
            model = total_multiplicities(g, trace)
    except (NoFaithfulTraceError, GraphValidationError, ValueError) as exc:
        print(f"validation failure: {exc}", file=sys.stderr)
        return EX_DATAERR
    profile = singular_profile(model, args.window)
    _emit(profile, args)
    return 0


def _cmd_conditions(args) -> int:
    g = _load(args.input)
    try:
        report = evaluate_all(
            g,
            end_values=_parse_end_values(args.end_value),
            level=args.level,
            window=args.window,
            tolerance=args.tolerance,
        )
    except (GraphValidationError, ValueError) as exc:
        print(f"validation failure: {exc}", file=sys.stderr)
        return EX_DATAERR
    _emit(report, args)
    return report.exit_code()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {
            (k if isinstance(k, str) else str(k)): _jsonable(v)
            for k, v in obj.items()
        }
    if isinstance(obj, (list, tuple)):
        return [_jsonable(x) for x in obj]
    return obj if isinstance(obj, (str, int, float, bool, type(None))) else str(obj)


def build_parser() -> _Parser:
    parser = _Parser(prog="graphtriple",
                     description="Verify noncommutative-manifold conditions "
                                 "for graph and k-graph algebras.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, spectralish=False):
        p.add_argument("input", help="presentation document (JSON)")
        p.add_argument("--out", help="write the report to this file")
        p.add_argument("--format", choices=["json", "csv", "text"],
                       default="json")
        p.add_argument("--end-value", action="append", metavar="END=VALUE",
                       help="trace value for an end (default 1)")
        p.add_argument("--level", type=int, default=3,
                       help="truncation level L (default 3)")
        if spectralish:
            p.add_argument("--window", type=int, default=100000,
                           help="spectral window N (default 100000)")
            p.add_argument("--tolerance", type=float, default=0.05)

    common(sub.add_parser("analyze", help="structural report"))
    common(sub.add_parser("trace", help="solve the graph trace"))
    common(sub.add_parser("ktheory", help="K-theory ranks"))
    ho = sub.add_parser("hochschild", help="orientation cycle checks")
    common(ho)
    ho.add_argument("--check-cycle", action="store_true",
                    help="verify b(c) = 0 and the cancellation steps "
                         "(always done; flag kept for scripting clarity)")
    sp = sub.add_parser("spectral", help="singular value profile")
    common(sp, spectralish=True)
    sp.add_argument("--vertex", help="profile p_v instead of (1+D^2)^{-1/2}")
    sp.add_argument("--csv", action="store_true",
                    help="shorthand for --format csv")
    cond = sub.add_parser("conditions", help="evaluate the nine conditions")
    common(cond, spectralish=True)
    cl = sub.add_parser("clifford", help="reality sign table")
    cl.add_argument("--kmax", type=int, default=8)
    cl.add_argument("--out")
    cl.add_argument("--format", choices=["json", "csv", "text"], default="json")
    return parser


_COMMANDS = {
    "analyze": _cmd_analyze,
    "trace": _cmd_trace,
    "ktheory": _cmd_ktheory,
    "hochschild": _cmd_hochschild,
    "clifford": _cmd_clifford,
    "spectral": _cmd_spectral,
    "conditions": _cmd_conditions,
}


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "csv", False):
        args.format = "csv"
    try:
        return _COMMANDS[args.command](args)
    except (GraphFormatError, GraphValidationError) as exc:
        print(f"validation failure: {exc}", file=sys.stderr)
        return EX_DATAERR


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
