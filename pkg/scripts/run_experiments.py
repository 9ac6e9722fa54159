#!/usr/bin/env python3
"""Benchmark both planners on the bundled fixtures, with tracking simulation.

Prints one comparison table per fixture and, with --out, writes the report
JSON, CSV and an SVG overlay of each planner's path next to each other.
"""

import argparse
from pathlib import Path

from pwbplan.planners import PLANNERS, plan_workspace
from pwbplan.report import bench, dumps, format_table, to_csv
from pwbplan.scenario import load_bundled
from pwbplan.svg import render_plan


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--fixtures", nargs="+", default=["sparse", "narrow"])
    ap.add_argument("--out", type=Path, help="directory for JSON/CSV/SVG outputs")
    args = ap.parse_args()

    for name in args.fixtures:
        sc = load_bundled(name)
        rep = bench(sc, run_simulation=True)
        print(f"== {name} (epsilon {sc.epsilon}, lambda {sc.lam})")
        print(format_table(rep))
        ok = {r.planner: r for r in rep.rows if r.ok}
        if len(ok) == 2:
            a, b = (ok[p] for p in PLANNERS)
            print(f"length ratio {a.path_length / b.path_length:.3f}, deviation ratio {a.max_deviation / b.max_deviation:.2f}\n")
        if args.out:
            args.out.mkdir(parents=True, exist_ok=True)
            (args.out / f"{name}.json").write_text(dumps(rep.to_dict()))
            (args.out / f"{name}.csv").write_text(to_csv(rep))
            for planner in ok:
                plan = plan_workspace(sc.workspace, planner, sc.epsilon, sc.lam, sc.steiner_spacing)
                svg = render_plan(sc.workspace, plan.graph, plan.channel, plan.safe_pairs, plan.result.path)
                (args.out / f"{name}-{planner}.svg").write_text(svg)


if __name__ == "__main__":
    main()
