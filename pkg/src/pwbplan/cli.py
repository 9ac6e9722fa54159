"""Command line: ``pwbplan {plan,bench,simulate,decompose}``.

Exit codes: 0 success, 1 bad input, 2 infeasible. Failures also print one
JSON object on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, replace
from pathlib import Path
from typing import Optional

from .decomposition import find_channel, triangulate_free_space
from .errors import InfeasibleError, InputError, PwbError
from .planners import PLANNERS, PWB, plan_workspace
from .report import (
    PlannerRow,
    bench,
    decomposition_to_dict,
    dumps,
    fill_row,
    finite_or_null,
    format_table,
    path_to_dict,
    to_csv,
)
from .scenario import BUNDLED, Scenario, load_bundled, load_scenario, random_scenario
from .simulator import simulate
from .svg import render_plan

EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE = 0, 1, 2


def _resolve(args) -> Scenario:
    if args.scenario is None and args.seed is None:
        raise InputError("give a scenario file, a bundled name, or --seed")
    if args.scenario is None:
        sc = random_scenario(args.seed)
    elif not Path(args.scenario).exists() and args.scenario in BUNDLED:
        sc = load_bundled(args.scenario)
    else:
        sc = load_scenario(args.scenario)
    over = {}
    if args.epsilon is not None:
        if not args.epsilon > 0:
            raise InputError(f"--epsilon must be positive, got {args.epsilon}")
        over["epsilon"] = args.epsilon
    if args.lam is not None:
        if not args.lam > 0:
            raise InputError(f"--lambda must be positive, got {args.lam}")
        over["lam"] = args.lam
    return replace(sc, **over) if over else sc


def _write(path: Optional[str], text: str):
    if path is None:
        return
    p = Path(path)
    if p.parent and not p.parent.exists():
        p.parent.mkdir(parents=True)
    p.write_text(text)


def cmd_plan(args) -> int:
    sc = _resolve(args)
    w = sc.workspace
    plan = plan_workspace(w, args.planner, sc.epsilon, sc.lam, sc.steiner_spacing)
    path_json = dumps(path_to_dict(args.planner, plan.result.path))
    if args.out:
        _write(args.out, path_json)
    else:
        sys.stdout.write(path_json)
    row = PlannerRow(args.planner)
    fill_row(row, plan, sc if args.simulate else None)
    _write(args.metrics, dumps(finite_or_null(asdict(row))))
    _write(args.svg, render_plan(w, plan.graph, plan.channel, plan.safe_pairs, plan.result.path))
    return EXIT_OK


def cmd_bench(args) -> int:
    sc = _resolve(args)
    planners = PLANNERS if args.planner is None else (args.planner,)
    rep = bench(sc, planners, run_simulation=args.simulate)
    sys.stdout.write(format_table(rep))
    _write(args.json, dumps(rep.to_dict()))
    _write(args.csv, to_csv(rep))
    if args.paths_dir:
        for name, d in rep.paths.items():
            _write(str(Path(args.paths_dir) / f"{name}.json"), dumps(d))
    for r in rep.rows:
        if not r.ok:
            sys.stderr.write(json.dumps({"planner": r.planner, "status": r.status, "message": r.error}) + "\n")
    return EXIT_OK if any(r.ok for r in rep.rows) else EXIT_INFEASIBLE


def cmd_simulate(args) -> int:
    sc = _resolve(args)
    plan = plan_workspace(sc.workspace, args.planner, sc.epsilon, sc.lam, sc.steiner_spacing)
    sim = simulate(plan.result.path, sc.sim)
    out = {
        "planner": args.planner,
        "execution_time": sim.execution_time,
        "max_deviation": sim.max_deviation,
        "max_curvature": sim.max_steering_curvature,
        "max_reference_curvature": sim.max_reference_curvature,
        "saturation_curvature": sim.saturation_curvature,
        "reached_goal": sim.reached_goal,
    }
    sys.stdout.write(dumps(finite_or_null(out)))
    if args.trajectory:
        lines = ["t,x,y,heading"] + [",".join(repr(float(v)) for v in row) for row in sim.trajectory]
        _write(args.trajectory, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_decompose(args) -> int:
    sc = _resolve(args)
    d = decomposition_to_dict(sc)
    text = dumps(d)
    if args.out:
        _write(args.out, text)
    else:
        sys.stdout.write(text)
    if args.svg:
        g = triangulate_free_space(sc.workspace, sc.steiner_spacing)
        ch = find_channel(g, sc.workspace.start, sc.workspace.goal, sc.epsilon) if d["channel"] is not None else None
        _write(args.svg, render_plan(sc.workspace, g, ch))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pwbplan", description="Safe piece-wise Bezier path planning.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, planner_default: Optional[str] = PWB):
        p.add_argument("scenario", nargs="?", help=f"scenario JSON file or bundled name {BUNDLED}")
        p.add_argument("--seed", type=int, help="use a random workspace instead of a file")
        p.add_argument("--epsilon", type=float, help="override the safety margin [m]")
        p.add_argument("--lambda", dest="lam", type=float, help="override the objective weight")
        p.add_argument("--planner", choices=PLANNERS, default=planner_default)

    p = sub.add_parser("plan", help="plan one path")
    common(p)
    p.add_argument("--out", help="path JSON (default: stdout)")
    p.add_argument("--metrics", help="metrics JSON")
    p.add_argument("--svg", help="SVG overlay")
    p.add_argument("--simulate", action="store_true", help="add tracking metrics")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("bench", help="run both planners and print the comparison table")
    common(p, planner_default=None)
    p.add_argument("--simulate", action="store_true", help="add tracking metrics")
    p.add_argument("--json", help="report JSON")
    p.add_argument("--csv", help="report CSV")
    p.add_argument("--paths-dir", help="directory for one path JSON per planner")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("simulate", help="plan and track with Pure-Pursuit")
    common(p)
    p.add_argument("--trajectory", help="trajectory CSV")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("decompose", help="emit cells and adjacency")
    common(p)
    p.add_argument("--out", help="decomposition JSON (default: stdout)")
    p.add_argument("--svg", help="SVG of the cells")
    p.set_defaults(func=cmd_decompose)
    return ap


def _error(exc: Exception, code: int) -> int:
    payload = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    for attr in ("cell_index", "position", "violations"):
        if getattr(exc, attr, None) is not None:
            payload[attr] = getattr(exc, attr)
    sys.stderr.write(json.dumps(payload) + "\n")
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InfeasibleError as exc:
        return _error(exc, EXIT_INFEASIBLE)
    except (InputError, PwbError) as exc:
        return _error(exc, EXIT_INPUT)
    except OSError as exc:
        return _error(exc, EXIT_INPUT)


if __name__ == "__main__":
    sys.exit(main())
