#!/usr/bin/env python3
"""PWB assembly+solve time against channel length on a zig-zag strip of triangles."""

import argparse

import numpy as np

from pwbplan.corridor import build_safe_pairs
from pwbplan.decomposition import CellGraph, find_channel
from pwbplan.geometry import ConvexPolygon, polygon_to_polytope
from pwbplan.planners import PwbPlanRequest, plan_pwb


def strip(n_cells, width=1.0, height=1.5):
    half = n_cells // 2
    bot = [(i * width, 0.0) for i in range(half + 1)]
    top = [(i * width + width / 2, height) for i in range(half + 1)]
    tris = []
    for i in range(half):
        tris += [[bot[i], bot[i + 1], top[i]], [bot[i + 1], top[i + 1], top[i]]]
    return CellGraph.from_cells([polygon_to_polytope(ConvexPolygon(np.array(t))) for t in tris])


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--cells", type=int, nargs="+", default=[4, 8, 16, 24, 32, 48, 64])
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--epsilon", type=float, default=0.2)
    args = ap.parse_args()

    print(f"{'cells':>6} {'vars':>6} {'cons':>6} {'median ms':>10} {'iters':>6}")
    for n in args.cells:
        g = strip(n)
        s, t = g.centroids[0], g.centroids[-1]
        ch = find_channel(g, s, t, epsilon=args.epsilon)
        req = PwbPlanRequest(tuple(build_safe_pairs(g, ch, args.epsilon, s, t)), s, t)
        runs = [plan_pwb(req) for _ in range(args.repeats + 1)][1:]
        ms = 1e3 * float(np.median([r.solver_time for r in runs]))
        r = runs[-1]
        print(f"{len(ch):6d} {r.n_variables:6d} {r.n_constraints:6d} {ms:10.1f} {r.iterations:6d}")


if __name__ == "__main__":
    main()
