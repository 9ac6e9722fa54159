#!/usr/bin/env python3
"""Sweep the PWB weight lambda on one fixture: length, peak curvature, tracking deviation."""

import argparse

import numpy as np

from pwbplan.bezier import path_metrics
from pwbplan.planners import PWB, decompose, plan_workspace
from pwbplan.scenario import load_bundled
from pwbplan.simulator import simulate


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("fixture", nargs="?", default="narrow")
    ap.add_argument("--lambdas", type=float, nargs="+", default=list(np.logspace(-1, 3, 9)))
    args = ap.parse_args()

    sc = load_bundled(args.fixture)
    dec = decompose(sc.workspace, sc.epsilon, sc.steiner_spacing)
    print(f"{'lambda':>9} {'length':>8} {'kappa_max':>10} {'deviation':>10}")
    for lam in args.lambdas:
        plan = plan_workspace(sc.workspace, PWB, sc.epsilon, lam, decomposition=dec)
        m = path_metrics(plan.result.path)
        sim = simulate(plan.result.path, sc.sim)
        print(f"{lam:9.3g} {m.length:8.3f} {m.max_curvature:10.3f} {sim.max_deviation:10.4f}")


if __name__ == "__main__":
    main()
