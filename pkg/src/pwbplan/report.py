"""Path JSON, benchmark reports and their table/CSV renderings."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Optional

import numpy as np

from .bezier import PolylinePath, PwbPath, path_metrics
from .decomposition import NoChannelError, find_channel, triangulate_free_space
from .errors import InputError, PwbError
from .geometry import polytope_vertices
from .planners import PLANNERS, Plan, plan_workspace
from .scenario import Scenario
from .simulator import simulate


def path_to_dict(planner: str, path) -> dict[str, Any]:
    m = path_metrics(path)
    out: dict[str, Any] = {"planner": planner}
    if isinstance(path, PwbPath):
        out["segments"] = path.control_points.tolist()
    else:
        out["waypoints"] = path.points.tolist()
    # polyline corners have unbounded curvature, written as null
    kmax = m.max_curvature if isinstance(path, PwbPath) else None
    out["metrics"] = {"length_m": m.length, "max_curvature": kmax}
    return out


def path_from_dict(d: dict[str, Any]):
    if "segments" in d:
        return PwbPath.from_control_points(np.asarray(d["segments"], dtype=float))
    if "waypoints" in d:
        return PolylinePath(np.asarray(d["waypoints"], dtype=float))
    raise InputError("path JSON needs 'segments' or 'waypoints'")


def dumps(obj) -> str:
    # repr-exact floats, stable key order
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


@dataclass
class PlannerRow:
    planner: str
    status: str = "ok"
    computing_time: Optional[float] = None
    path_length: Optional[float] = None
    n_variables: Optional[int] = None
    n_constraints: Optional[int] = None
    execution_time: Optional[float] = None
    max_deviation: Optional[float] = None
    max_curvature: Optional[float] = None
    max_reference_curvature: Optional[float] = None
    reached_goal: Optional[bool] = None
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.status == "ok"


@dataclass
class Report:
    scenario: str
    epsilon: float
    lam: float
    rows: list[PlannerRow] = field(default_factory=list)
    paths: dict[str, dict] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "scenario": self.scenario,
            "epsilon": self.epsilon,
            "lambda": self.lam,
            "planners": [finite_or_null(asdict(r)) for r in self.rows],
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "Report":
        names = {f.name for f in fields(PlannerRow)}
        rows = [PlannerRow(**{k: v for k, v in r.items() if k in names}) for r in d["planners"]]
        return cls(d["scenario"], d["epsilon"], d["lambda"], rows)


def finite_or_null(d: dict) -> dict:
    # JSON has no infinity; an unbounded curvature is reported as null
    return {k: (None if isinstance(v, float) and not np.isfinite(v) else v) for k, v in d.items()}


TABLE_ROWS = (
    ("Computing Time [s]", "computing_time", "{:.3g}"),
    ("Path Length [m]", "path_length", "{:.2f}"),
    ("Nr. of decision variables", "n_variables", "{:d}"),
    ("Nr. of constraints", "n_constraints", "{:d}"),
    ("Execution Time [s]", "execution_time", "{:.2f}"),
    ("Maximum Trajectory Deviation [m]", "max_deviation", "{:.3f}"),
    ("Maximum Curvature [rad/m]", "max_curvature", "{:.2f}"),
)


def format_table(rep: Report) -> str:
    heads = ["Metric"] + [r.planner for r in rep.rows]
    lines = []
    for label, key, fmt in TABLE_ROWS:
        vals = [getattr(r, key) for r in rep.rows]
        if all(v is None for v in vals) and key in ("execution_time", "max_deviation", "max_curvature"):
            continue
        lines.append([label] + ["-" if v is None else fmt.format(v) for v in vals])
    if any(not r.ok for r in rep.rows):
        lines.append(["Status"] + [r.status for r in rep.rows])
    table = [heads] + lines
    widths = [max(len(row[i]) for row in table) for i in range(len(heads))]
    out = []
    for k, row in enumerate(table):
        out.append(" | ".join(c.ljust(w) if i == 0 else c.rjust(w) for i, (c, w) in enumerate(zip(row, widths))))
        if k == 0:
            out.append("-+-".join("-" * w for w in widths))
    return "\n".join(out) + "\n"


def to_csv(rep: Report) -> str:
    buf = io.StringIO()
    names = [f.name for f in fields(PlannerRow)]
    w = csv.DictWriter(buf, fieldnames=names, lineterminator="\n")
    w.writeheader()
    for r in rep.rows:
        w.writerow({k: ("" if v is None else v) for k, v in finite_or_null(asdict(r)).items()})
    return buf.getvalue()


def bench(sc: Scenario, planners=PLANNERS, run_simulation: bool = False) -> Report:
    """Run each planner on one scenario; failures are recorded per planner.

    ``computing_time`` is QP assembly plus solve; decomposition, simulation
    and I/O are excluded.
    """
    w = sc.workspace
    rep = Report(sc.name, sc.epsilon, sc.lam)
    for name in planners:
        row = PlannerRow(name)
        try:
            plan = plan_workspace(w, name, sc.epsilon, sc.lam, sc.steiner_spacing)
        except PwbError as exc:
            row.status = "infeasible" if not isinstance(exc, InputError) else "error"
            row.error = str(exc)
            rep.rows.append(row)
            continue
        fill_row(row, plan, sc if run_simulation else None)
        rep.paths[name] = path_to_dict(name, plan.result.path)
        rep.rows.append(row)
    return rep


def fill_row(row: PlannerRow, plan: Plan, sc: Optional[Scenario] = None):
    res = plan.result
    row.computing_time = res.solver_time
    row.path_length = path_metrics(res.path).length
    row.n_variables = res.n_variables
    row.n_constraints = res.n_constraints
    if sc is not None:
        sim = simulate(res.path, sc.sim)
        row.execution_time = sim.execution_time
        row.max_deviation = sim.max_deviation
        row.max_curvature = sim.max_steering_curvature
        row.max_reference_curvature = sim.max_reference_curvature
        row.reached_goal = sim.reached_goal


def decomposition_to_dict(sc: Scenario) -> dict[str, Any]:
    """Cells, adjacency and (when one exists) the channel; ``channel`` is null otherwise."""
    g = triangulate_free_space(sc.workspace, sc.steiner_spacing)
    try:
        ch = find_channel(g, sc.workspace.start, sc.workspace.goal, epsilon=sc.epsilon)
    except NoChannelError:
        ch = None
    return {
        "cells": [
            {"vertices": (polytope_vertices(c) + 0.0).tolist(), "facet_tags": list(c.facet_tags)} for c in g.cells
        ],
        "adjacency": [
            {"cells": [a.i, a.j], "facets": [a.facet.facet_a, a.facet.facet_b], "segment": [a.facet.p.tolist(), a.facet.q.tolist()]}
            for a in g.adjacency
        ],
        "channel": None if ch is None else list(ch.cell_indices),
    }

