"""Path planners over a channel of convex cells.

``plan_pwb`` places one quadratic Bezier segment per cell and solves for all
control points at once. The cost per segment is

    |P1 - P0|^2 + |P2 - P1|^2 + lam * |P2 - P0|^2

which pulls the middle control point toward the chord midpoint (smoothness)
and shortens chords (length). Control points are kept in the safe polytopes,
and consecutive segments share their junction point and tangent.

``plan_pwl`` is the piece-wise linear baseline: one waypoint per shared facet,
sum of squared leg lengths minimized.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import qp as qpmod
from .bezier import PolylinePath, PwbPath, arc_length, evaluate, max_curvature
from .corridor import MarginTooLargeError, SafePair, build_safe_pairs
from .decomposition import CellGraph, Channel, Workspace, find_channel, triangulate_free_space
from .errors import InfeasibleError, InputError
from .geometry import TOL_FEAS, as_point, contains

DEFAULT_LAMBDA = 10.0
DEFAULT_EPSILON = 0.2
PWB = "pwb-qp"
PWL = "pwl-qp"
PLANNERS = (PWB, PWL)


class InfeasibleCorridorError(InfeasibleError):
    def __init__(self, message: str, cell_index: Optional[int] = None, position: Optional[int] = None):
        self.cell_index = cell_index
        self.position = position
        super().__init__(message)


@dataclass(frozen=True, eq=False)
class PwbPlanRequest:
    safe_pairs: tuple
    start: np.ndarray
    goal: np.ndarray
    lam: float = DEFAULT_LAMBDA

    def __post_init__(self):
        object.__setattr__(self, "safe_pairs", tuple(self.safe_pairs))
        object.__setattr__(self, "start", as_point(self.start))
        object.__setattr__(self, "goal", as_point(self.goal))
        if not self.safe_pairs:
            raise InputError("empty channel")
        if not (np.isfinite(self.lam) and self.lam > 0):
            raise InputError(f"lambda must be > 0, got {self.lam}")
        if not contains(self.safe_pairs[0].safe_in, self.start, TOL_FEAS):
            raise InputError("start is outside the first safe polytope")
        if not contains(self.safe_pairs[-1].safe_out, self.goal, TOL_FEAS):
            raise InputError("goal is outside the last safe polytope")


@dataclass(frozen=True, eq=False)
class PlanResult:
    planner: str
    path: object
    status: str
    objective: float
    solver_time: float
    n_variables: int
    n_constraints: int
    kkt_residual: float = 0.0
    iterations: int = 0

    @property
    def n_segments(self) -> int:
        return len(self.path.segments) if isinstance(self.path, PwbPath) else len(self.path.points) - 1


def segment_cost_matrix(lam: float) -> np.ndarray:
    """3x3 weights on (P0, P1, P2) of one segment's cost, per coordinate."""
    return np.array(
        [
            [1.0 + lam, -1.0, -lam],
            [-1.0, 2.0, -1.0],
            [-lam, -1.0, 1.0 + lam],
        ]
    )


def _var(i: int, j: int, c: int) -> int:
    return 6 * i + 2 * j + c


def _pwb_problem(pairs: Sequence[SafePair], start, goal, lam: float) -> qpmod.QpProblem:
    n_seg = len(pairs)
    n = 6 * n_seg
    D = segment_cost_matrix(lam)
    Q = np.zeros((n, n))
    block = 2.0 * np.kron(D, np.eye(2))
    for i in range(n_seg):
        Q[6 * i : 6 * i + 6, 6 * i : 6 * i + 6] = block

    E_rows, d = [], []

    def eq(coeffs, rhs):
        row = np.zeros(n)
        for idx, val in coeffs:
            row[idx] += val
        E_rows.append(row)
        d.append(rhs)

    for c in range(2):
        eq([(_var(0, 0, c), 1.0)], start[c])
    if goal is not None:
        for c in range(2):
            eq([(_var(n_seg - 1, 2, c), 1.0)], goal[c])
    for i in range(n_seg - 1):
        for c in range(2):
            eq([(_var(i, 2, c), 1.0), (_var(i + 1, 0, c), -1.0)], 0.0)
        for c in range(2):
            eq(
                [
                    (_var(i, 2, c), 1.0),
                    (_var(i, 1, c), -1.0),
                    (_var(i + 1, 1, c), -1.0),
                    (_var(i + 1, 0, c), 1.0),
                ],
                0.0,
            )

    A_rows, b = [], []
    for i, pr in enumerate(pairs):
        H = pr.base.H
        # P1 must satisfy both safe sets, so its two row blocks collapse to the tighter bound.
        bounds = (pr.b_safe_in, np.minimum(pr.b_safe_in, pr.b_safe_out), pr.b_safe_out)
        for j in range(3):
            for k in range(len(H)):
                row = np.zeros(n)
                row[_var(i, j, 0)] = H[k, 0]
                row[_var(i, j, 1)] = H[k, 1]
                A_rows.append(row)
                b.append(bounds[j][k])
    return qpmod.QpProblem(Q, np.zeros(n), np.array(E_rows), np.array(d), np.array(A_rows), np.array(b))


def assemble_pwb_qp(req: PwbPlanRequest) -> qpmod.QpProblem:
    """QP over stacked control points ``[P0x, P0y, P1x, P1y, P2x, P2y]`` per segment."""
    return _pwb_problem(req.safe_pairs, req.start, req.goal, req.lam)


def pwb_objective(path: PwbPath, lam: float) -> float:
    total = 0.0
    for s in path.segments:
        total += float(np.sum((s.p1 - s.p0) ** 2) + np.sum((s.p2 - s.p1) ** 2) + lam * np.sum((s.p2 - s.p0) ** 2))
    return total


def _diagnose(pairs: Sequence[SafePair], start, goal, lam) -> InfeasibleCorridorError:
    # Grow the channel from the start until the control-point constraints stop being satisfiable.
    for k in range(1, len(pairs) + 1):
        sol = qpmod.solve(_pwb_problem(pairs[:k], start, None, lam))
        if not sol.optimal:
            ci = pairs[k - 1].cell_index
            return InfeasibleCorridorError(
                f"no safe C1 path can enter channel cell {ci} (position {k - 1})", ci, k - 1
            )
    ci = pairs[-1].cell_index
    return InfeasibleCorridorError(f"goal cannot be reached within channel cell {ci}", ci, len(pairs) - 1)


def plan_pwb(req: PwbPlanRequest) -> PlanResult:
    t0 = time.perf_counter()
    prob = assemble_pwb_qp(req)
    sol = qpmod.solve(prob)
    elapsed = time.perf_counter() - t0
    if not sol.optimal:
        if sol.status == qpmod.INFEASIBLE:
            raise _diagnose(req.safe_pairs, req.start, req.goal, req.lam)
        raise InfeasibleCorridorError(f"QP solver stopped: {sol.status}")
    path = PwbPath.from_control_points(sol.x)
    return PlanResult(
        planner=PWB,
        path=path,
        status=sol.status,
        objective=pwb_objective(path, req.lam),
        solver_time=elapsed,
        n_variables=prob.n,
        n_constraints=prob.n_eq + prob.n_ineq,
        kkt_residual=sol.kkt_residual,
        iterations=sol.iterations,
    )


def plan_pwl(g: CellGraph, c: Channel, start, goal, epsilon: float) -> PlanResult:
    """Polyline start -> one waypoint per shared facet -> goal.

    Each waypoint slides along its facet, kept ``epsilon`` away from the facet
    end points; the sum of squared leg lengths is minimized.
    """
    start, goal = as_point(start), as_point(goal)
    t0 = time.perf_counter()
    idx = c.cell_indices
    anchors, dirs, lo, hi = [], [], [], []
    for k in range(len(idx) - 1):
        seg = _facet_of(g, idx[k], idx[k + 1])
        v1, v2 = seg.p, seg.q
        L = float(np.linalg.norm(v2 - v1))
        if L <= 2 * epsilon:
            raise MarginTooLargeError(idx[k], f"shared facet to cell {idx[k + 1]} is {L:.3g} m, shorter than 2*epsilon")
        anchors.append(v1)
        dirs.append(v2 - v1)
        lo.append(epsilon / L)
        hi.append(1.0 - epsilon / L)
    m = len(anchors)
    if m == 0:
        path = PolylinePath(np.array([start, goal]))
        return PlanResult(PWL, path, qpmod.OPTIMAL, float(np.sum((goal - start) ** 2)), time.perf_counter() - t0, 0, 0)

    # legs: residual_j = w_{j+1} - w_j = C alpha + e
    pts = [start] + anchors + [goal]
    C = np.zeros((2 * (m + 1), m))
    e = np.zeros(2 * (m + 1))
    for j in range(m + 1):
        e[2 * j : 2 * j + 2] = pts[j + 1] - pts[j]
        if j < m:
            C[2 * j : 2 * j + 2, j] += dirs[j]
        if j > 0:
            C[2 * j : 2 * j + 2, j - 1] -= dirs[j - 1]
    A = np.vstack([np.eye(m), -np.eye(m)])
    b = np.concatenate([hi, -np.asarray(lo)])
    prob = qpmod.QpProblem(2.0 * C.T @ C, 2.0 * C.T @ e, A=A, b=b)
    sol = qpmod.solve(prob)
    elapsed = time.perf_counter() - t0
    if not sol.optimal:
        raise InfeasibleCorridorError(f"PWL QP solver stopped: {sol.status}")
    alpha = sol.x
    way = [a + al * d for a, al, d in zip(anchors, alpha, dirs)]
    path = PolylinePath(np.array([start] + way + [goal]))
    return PlanResult(
        planner=PWL,
        path=path,
        status=sol.status,
        objective=float(np.sum(np.diff(path.points, axis=0) ** 2)),
        solver_time=elapsed,
        n_variables=prob.n,
        n_constraints=prob.n_eq + prob.n_ineq,
        kkt_residual=sol.kkt_residual,
        iterations=sol.iterations,
    )


def _facet_of(g: CellGraph, i: int, j: int):
    key = (min(i, j), max(i, j))
    for e in g.adjacency:
        if (e.i, e.j) == key:
            return e.facet
    raise KeyError(f"cells {i} and {j} are not adjacent")


def ideal_objective(path: PwbPath, lambda_ideal: float) -> float:
    """Length/curvature trade-off ``sum (1 - l) * L_i + l * kappa_max_i^2``; evaluation only."""
    if not 0.0 <= lambda_ideal <= 1.0:
        raise InputError("lambda_ideal must be in [0, 1]")
    total = 0.0
    for s in path.segments:
        total += (1.0 - lambda_ideal) * arc_length(s)
        if lambda_ideal > 0:
            total += lambda_ideal * max_curvature(s)[1] ** 2
    return total


@dataclass(frozen=True)
class SafetyReport:
    min_cell_slack: float
    min_clearance: float
    epsilon: float

    def ok(self, tol: float = 1e-6) -> bool:
        return self.min_cell_slack >= -TOL_FEAS and self.min_clearance >= self.epsilon - tol


def safety_report(path: PwbPath, pairs: Sequence[SafePair], samples: int = 1000) -> SafetyReport:
    """Sampled check that each segment stays in its cell and keeps the margin from unshared facets."""
    t = np.linspace(0.0, 1.0, samples)
    min_slack = np.inf
    min_clear = np.inf
    for s, pr in zip(path.segments, pairs):
        slack = pr.base.slack(evaluate(s, t))
        min_slack = min(min_slack, float(slack.min()))
        keep = [k for k in range(pr.base.n_facets) if k not in pr.shared_facets]
        if keep:
            min_clear = min(min_clear, float(slack[:, keep].min()))
    return SafetyReport(min_slack, min_clear, pairs[0].epsilon)


@dataclass(frozen=True, eq=False)
class Plan:
    """Everything produced by one end-to-end planning run."""

    workspace: Workspace
    graph: CellGraph
    channel: Channel
    result: PlanResult
    safe_pairs: tuple = field(default=())
    epsilon: float = DEFAULT_EPSILON
    lam: float = DEFAULT_LAMBDA


def decompose(w: Workspace, epsilon: float, steiner_spacing: Optional[float] = None) -> tuple[CellGraph, Channel]:
    g = triangulate_free_space(w, steiner_spacing)
    return g, find_channel(g, w.start, w.goal, epsilon=epsilon)


def plan_workspace(
    w: Workspace,
    planner: str = PWB,
    epsilon: float = DEFAULT_EPSILON,
    lam: float = DEFAULT_LAMBDA,
    steiner_spacing: Optional[float] = None,
    decomposition: Optional[tuple[CellGraph, Channel]] = None,
) -> Plan:
    """Decompose, search, build the corridor and run one planner."""
    if planner not in PLANNERS:
        raise InputError(f"unknown planner {planner!r}; expected one of {PLANNERS}")
    g, ch = decomposition if decomposition is not None else decompose(w, epsilon, steiner_spacing)
    if planner == PWB:
        pairs = build_safe_pairs(g, ch, epsilon, w.start, w.goal)
        res = plan_pwb(PwbPlanRequest(tuple(pairs), w.start, w.goal, lam))
        return Plan(w, g, ch, res, tuple(pairs), epsilon, lam)
    res = plan_pwl(g, ch, w.start, w.goal, epsilon)
    return Plan(w, g, ch, res, (), epsilon, lam)
