"""``attackgame`` command line.

Exit status: 0 on success, 1 on a domain error (invalid graph, no attack
path, bad parameters), 2 on a usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .cvss import CvssError, CvssVector, exploitability, impact, p0_from_exploitability
from .fileformat import GraphFormatError, dump_graph, graph_to_dict, load_graph
from .graph import GraphError, enumerate_paths, validate, DEFAULT_PATH_CAP
from .interventions import KINDS, InterventionSpec, evaluate_intervention
from .reduction import reduce
from .scenarios import FAMILIES, ScenarioConfig, automotive_graph_dict, run as run_scenario
from .solver import METHODS, SolveConfig, solve


class DomainError(Exception):
    pass


def fmt(v: float) -> str:
    return f"{v:.6g}"


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


def _emit_json(obj, path: str | None) -> None:
    text = _dumps(obj) + "\n"
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(t) for t in text.replace(",", " ").split())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a list of numbers, got {text!r}") from None


def _load(path: str):
    if not Path(path).is_file():
        raise FileNotFoundError(path)
    return load_graph(path)


# -- subcommands --------------------------------------------------------------------


def cmd_validate(args) -> int:
    try:
        report = validate(_load(args.graph)).to_dict()
    except GraphFormatError as exc:
        report = {"valid": False, "warnings": [],
                  "violations": [{"kind": "format", "message": str(exc), "nodes": [], "edges": []}]}
    if args.json:
        _emit_json(report, None)
    else:
        if report["valid"]:
            print("valid")
        for v in report["violations"]:
            print(f"violation {v['kind']}: {v['message']}")
        for w in report["warnings"]:
            print(f"warning {w['kind']}: {w['message']}")
    return 0 if report["valid"] else 1


def cmd_paths(args) -> int:
    paths = enumerate_paths(_load(args.graph), cap=args.cap)
    if args.json:
        _emit_json([list(p) for p in paths], None)
    else:
        for p in paths:
            print(" -> ".join(p))
    return 0


def cmd_reduce(args) -> int:
    graph = _load(args.graph)
    reduced, rmap = reduce(graph)
    if args.out:
        dump_graph(reduced, args.out)
        sidecar = Path(args.map_out) if args.map_out else Path(args.out).with_name("reduction_map.json")
    else:
        _emit_json(graph_to_dict(reduced), None)
        sidecar = Path(args.map_out or "reduction_map.json")
    sidecar.write_text(_dumps(rmap.to_dict()) + "\n", encoding="utf-8")
    print(f"reduced {len(graph.investable_nodes())} -> {len(reduced.investable_nodes())} "
          f"investable nodes; map written to {sidecar}", file=sys.stderr)
    return 0


def _solve_config(args) -> SolveConfig:
    kw = {"method": args.method, "tolerance": args.tol}
    if args.max_iter is not None:
        kw["max_iterations"] = args.max_iter
    return SolveConfig(**kw)


def cmd_solve(args) -> int:
    graph = _load(args.graph)
    rep = solve(graph, args.budget, _solve_config(args))
    if args.json_out:
        _emit_json(rep.to_dict(), args.json_out)
    if args.json:
        _emit_json(rep.to_dict(), None)
        return 0
    print(f"budget {fmt(rep.investments.budget)}")
    print(f"loss {fmt(rep.equilibrium_loss)}")
    print("investments")
    for v, x in rep.investments.x.items():
        print(f"  {v} {fmt(x)}")
    print("attacker paths")
    for p in rep.active_paths:
        print("  " + " -> ".join(p))
    if not rep.converged:
        print("warning: solver did not report convergence", file=sys.stderr)
    return 0


def _anchor(text: str):
    for sep in ("->", ","):
        if sep in text:
            u, v = (t.strip() for t in text.split(sep, 1))
            return (u, v)
    return text


def cmd_intervene(args) -> int:
    graph = _load(args.graph)
    join_ids = tuple(args.join_ids.split(",")) if args.join_ids else None
    if join_ids is not None and len(join_ids) != 2:
        raise DomainError("--join-ids takes two comma-separated ids")
    spec = InterventionSpec(args.kind, args.node_id, args.p0, args.loss, _anchor(args.anchor),
                            join_ids, args.join_p0)
    report = evaluate_intervention(graph, spec, args.budget, _solve_config(args))
    _emit_json(report.to_dict(), args.json_out)
    return 0


def cmd_cvss(args) -> int:
    vec = CvssVector(args.av, args.ac, args.pr, args.ui, args.imc, args.imi, args.ima)
    ex = exploitability(vec)
    out = {"exploitability": ex, "p0": p0_from_exploitability(ex)}
    if vec.has_impact:
        out["impact"] = impact(vec)
    if args.json:
        _emit_json(out, None)
        return 0
    print(f"EX {ex:.2f}")
    print(f"p0 {p0_from_exploitability(ex):.3f}")
    if "impact" in out:
        print(f"Im {out['impact']:.3f}")
    return 0


def cmd_casestudy(args) -> int:
    if args.export_graph:
        Path(args.export_graph).write_text(_dumps(automotive_graph_dict()) + "\n", encoding="utf-8")
    kw = {"family": args.scenario, "budget": args.budget, "method": args.method}
    for flag, key in (("added_p0", "added_entry_p0"), ("added_losses", "added_entry_losses"),
                      ("added_anchor", "added_entry_anchor"), ("p_sec_grid", "p_sec_grid"),
                      ("l_sec_grid", "l_sec_grid"), ("sensor_p0", "sensor_p0"),
                      ("max_redundant", "max_redundant"), ("join_p0", "join_p0")):
        value = getattr(args, flag)
        if value is not None:
            kw[key] = value
    if args.locations:
        kw["locations"] = tuple(args.locations.split(","))
    result = run_scenario(ScenarioConfig(**kw))
    if args.csv:
        result.to_csv(args.csv)
    if args.json:
        _emit_json(result.to_dict(), args.json)
    if args.plot_dir:
        from .plotting import render
        print(f"figure written to {render(result, args.plot_dir)}", file=sys.stderr)
    if not args.csv and not args.json:
        sys.stdout.write(result.to_csv())
    return 0


# -- parser -------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="attackgame",
                                description="Security investment games on attack graphs.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", help="check a graph file")
    s.add_argument("graph")
    s.add_argument("--json", action="store_true", help="print the report as JSON")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("paths", help="list entry-to-target paths")
    s.add_argument("graph")
    s.add_argument("--cap", type=int, default=DEFAULT_PATH_CAP)
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_paths)

    s = sub.add_parser("reduce", help="series/parallel reduction")
    s.add_argument("graph")
    s.add_argument("--out", help="reduced graph file (default: stdout)")
    s.add_argument("--map-out", help="reduction map file (default: reduction_map.json next to --out)")
    s.set_defaults(func=cmd_reduce)

    def solver_flags(s):
        s.add_argument("--budget", type=float, help="defaults to the graph file's budget")
        s.add_argument("--method", choices=METHODS, default="numeric")
        s.add_argument("--tol", type=float, default=1e-9)
        s.add_argument("--max-iter", type=int)
        s.add_argument("--json-out", help="write the JSON report to this file")

    s = sub.add_parser("solve", help="optimal defender investment")
    s.add_argument("graph")
    solver_flags(s)
    s.add_argument("--json", action="store_true", help="print the JSON report instead of text")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("intervene", help="evaluate adding one node")
    s.add_argument("graph")
    s.add_argument("--kind", choices=KINDS, required=True)
    s.add_argument("--node-id", required=True)
    s.add_argument("--p0", type=float, required=True)
    s.add_argument("--loss", type=float, required=True)
    s.add_argument("--anchor", required=True, help="node id, or 'U->V' edge for series")
    s.add_argument("--join-ids", help="hybrid only: two comma-separated join node ids")
    s.add_argument("--join-p0", type=float, help="hybrid only: join node p0 (default: anchor's)")
    solver_flags(s)
    s.set_defaults(func=cmd_intervene, method="auto")
    s._option_string_actions["--method"].choices = METHODS

    s = sub.add_parser("cvss", help="CVSS v3 exploitability, p0 and impact")
    s.add_argument("--av", required=True, type=str.upper)
    s.add_argument("--ac", required=True, type=str.upper)
    s.add_argument("--pr", required=True, type=str.upper)
    s.add_argument("--ui", required=True, type=str.upper)
    s.add_argument("--imc", type=str.upper)
    s.add_argument("--imi", type=str.upper)
    s.add_argument("--ima", type=str.upper)
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_cvss)

    s = sub.add_parser("casestudy", help="automotive case-study experiments")
    s.add_argument("--scenario", choices=FAMILIES, default="base")
    s.add_argument("--csv", help="write rows as CSV (default: stdout)")
    s.add_argument("--json", help="write the result as JSON")
    s.add_argument("--plot-dir", help="render the family's figure into this directory")
    s.add_argument("--export-graph", help="also write the case-study graph file here")
    s.add_argument("--budget", type=float, default=10.0)
    s.add_argument("--method", choices=METHODS, default="auto")
    s.add_argument("--added-p0", type=float)
    s.add_argument("--added-losses", type=_floats, help="Case IV and V losses, e.g. '1,10'")
    s.add_argument("--added-anchor")
    s.add_argument("--locations", help="comma-separated subset of before-TELE,before-IVI,before-CAN")
    s.add_argument("--p-sec-grid", type=_floats)
    s.add_argument("--l-sec-grid", type=_floats)
    s.add_argument("--sensor-p0", type=_floats)
    s.add_argument("--max-redundant", type=int)
    s.add_argument("--join-p0", type=float)
    s.set_defaults(func=cmd_casestudy)
    return p


def run(argv: list[str] | None = None) -> int:
    """Parse ``argv`` and dispatch; returns the exit status."""
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        parser.print_usage(sys.stderr)
        print(f"attackgame: error: no such file: {exc.args[0]}", file=sys.stderr)
        return 2
    except (GraphError, GraphFormatError, CvssError, DomainError, ValueError, KeyError) as exc:
        print(f"attackgame: {exc}", file=sys.stderr)
        return 1


def main() -> int:
    return run()


if __name__ == "__main__":
    sys.exit(main())
