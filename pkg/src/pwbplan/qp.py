"""Dense convex QP: minimize 1/2 x'Qx + c'x  s.t.  Ex = d,  Ax <= b.

Primal active-set method on the equality-reduced problem. Equalities are
eliminated with an SVD null-space basis, a feasible starting point comes from
a phase-1 LP (``scipy.optimize.linprog``), and the working set is updated with
the usual add-blocking / drop-negative-multiplier rules. After a degenerate
(zero-length) step the drop rule switches to Bland's smallest-index choice so
the method cannot cycle.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import linprog

from .errors import InputError

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
ITERATION_LIMIT = "iteration-limit"

KKT_TOL = 1e-8
FEAS_TOL = 1e-9
REG = 1e-9


@dataclass(frozen=True, eq=False)
class QpProblem:
    Q: np.ndarray
    c: np.ndarray
    E: np.ndarray = None
    d: np.ndarray = None
    A: np.ndarray = None
    b: np.ndarray = None

    def __post_init__(self):
        Q = np.atleast_2d(np.asarray(self.Q, dtype=float))
        n = Q.shape[0]
        c = np.asarray(self.c, dtype=float).reshape(-1)
        E = np.zeros((0, n)) if self.E is None else np.asarray(self.E, dtype=float).reshape(-1, n)
        d = np.zeros(0) if self.d is None else np.asarray(self.d, dtype=float).reshape(-1)
        A = np.zeros((0, n)) if self.A is None else np.asarray(self.A, dtype=float).reshape(-1, n)
        b = np.zeros(0) if self.b is None else np.asarray(self.b, dtype=float).reshape(-1)
        if Q.shape != (n, n) or c.shape != (n,) or E.shape[0] != d.shape[0] or A.shape[0] != b.shape[0]:
            raise InputError("inconsistent QP dimensions")
        scale = max(1.0, float(np.abs(Q).max(initial=0.0)))
        if np.abs(Q - Q.T).max(initial=0.0) > 1e-12 * scale:
            raise InputError("Q is not symmetric")
        if n and np.linalg.eigvalsh(Q).min() < -1e-10 * scale:
            raise InputError("Q is not positive semidefinite")
        for name, val in (("Q", Q), ("c", c), ("E", E), ("d", d), ("A", A), ("b", b)):
            if not np.all(np.isfinite(val)):
                raise InputError(f"{name} has non-finite entries")
            object.__setattr__(self, name, val)

    @property
    def n(self) -> int:
        return self.Q.shape[0]

    @property
    def n_eq(self) -> int:
        return self.E.shape[0]

    @property
    def n_ineq(self) -> int:
        return self.A.shape[0]

    def objective(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(0.5 * x @ self.Q @ x + self.c @ x)


@dataclass(frozen=True, eq=False)
class KktReport:
    stationarity: float
    eq_residual: float
    ineq_violation: float
    complementarity: float
    min_multiplier: float

    @property
    def dual_feasible(self) -> bool:
        return self.min_multiplier >= -1e-10

    @property
    def residual(self) -> float:
        """Largest of the four residuals, counting a negative multiplier as a violation."""
        return max(
            self.stationarity,
            self.eq_residual,
            self.ineq_violation,
            self.complementarity,
            max(0.0, -self.min_multiplier),
        )


@dataclass(frozen=True, eq=False)
class QpSolution:
    x: np.ndarray
    objective: float
    status: str
    kkt_residual: float
    iterations: int
    eq_multipliers: np.ndarray = field(default_factory=lambda: np.zeros(0))
    ineq_multipliers: np.ndarray = field(default_factory=lambda: np.zeros(0))
    active_set: tuple = ()
    regularized: bool = False

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


def check_kkt(p: QpProblem, x, mu=None, nu=None) -> KktReport:
    """Residuals of the KKT conditions at ``x``.

    ``mu`` are inequality multipliers (``>= 0`` at an optimum), ``nu``
    equality multipliers. A missing ``nu`` is filled in by least squares,
    which is the best any equality multiplier can do for stationarity.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    mu = np.zeros(p.n_ineq) if mu is None else np.asarray(mu, dtype=float).reshape(-1)
    if x.shape != (p.n,) or mu.shape != (p.n_ineq,):
        raise InputError("multiplier/solution dimensions do not match the problem")
    grad = p.Q @ x + p.c + p.A.T @ mu
    if nu is None:
        if p.n_eq:
            nu = np.linalg.lstsq(p.E.T, -grad, rcond=None)[0]
        else:
            nu = np.zeros(0)
    nu = np.asarray(nu, dtype=float).reshape(-1)
    r = grad + p.E.T @ nu
    slack = p.A @ x - p.b
    return KktReport(
        stationarity=float(np.abs(r).max(initial=0.0)),
        eq_residual=float(np.abs(p.E @ x - p.d).max(initial=0.0)),
        ineq_violation=float(np.maximum(slack, 0.0).max(initial=0.0)),
        complementarity=float(np.abs(mu * slack).max(initial=0.0)),
        min_multiplier=float(mu.min(initial=0.0)),
    )


def _nullspace(E: np.ndarray, d: np.ndarray, n: int):
    if E.shape[0] == 0:
        return np.zeros(n), np.eye(n), True
    U, S, Vt = np.linalg.svd(E)
    tol = max(E.shape) * np.finfo(float).eps * (S[0] if len(S) else 0.0)
    r = int(np.sum(S > tol))
    x0 = Vt[:r].T @ ((U[:, :r].T @ d) / S[:r])
    consistent = np.abs(E @ x0 - d).max() <= FEAS_TOL * (1.0 + np.abs(d).max())
    return x0, Vt[r:].T, consistent


def _phase1(Ar: np.ndarray, br: np.ndarray) -> Optional[np.ndarray]:
    """A point with ``Ar y <= br``, or None when the polyhedron is empty."""
    m, k = Ar.shape
    if m == 0 or np.all(br >= 0):
        return np.zeros(k)
    # min s  s.t.  Ar y - s <= br,  s >= 0
    cost = np.zeros(k + 1)
    cost[-1] = 1.0
    res = linprog(
        cost,
        A_ub=np.hstack([Ar, -np.ones((m, 1))]),
        b_ub=br,
        bounds=[(None, None)] * k + [(0, None)],
        method="highs",
    )
    if res.status != 0 or res.x[-1] > FEAS_TOL * (1.0 + np.abs(br).max()):
        return None
    return res.x[:k]


def _solve_eqp(G, g, Aw):
    k = G.shape[0]
    w = Aw.shape[0]
    K = np.zeros((k + w, k + w))
    K[:k, :k] = G
    K[:k, k:] = Aw.T
    K[k:, :k] = Aw
    rhs = np.concatenate([-g, np.zeros(w)])
    try:
        sol = np.linalg.solve(K, rhs)
    except np.linalg.LinAlgError:
        sol = np.linalg.lstsq(K, rhs, rcond=None)[0]
    return sol[:k], sol[k:]


def solve(p: QpProblem, x0: Optional[np.ndarray] = None, max_iter: Optional[int] = None) -> QpSolution:
    """Solve ``p``; never raises for infeasibility, reports it in ``status``.

    ``x0`` is an optional starting point; it is used only if it satisfies the
    constraints (equalities are re-imposed by projection onto their affine set).
    """
    n, m = p.n, p.n_ineq
    if max_iter is None:
        max_iter = 10 * (n + m)

    xp, Z, consistent = _nullspace(p.E, p.d, n)
    if not consistent:
        return QpSolution(xp, np.nan, INFEASIBLE, np.inf, 0)
    k = Z.shape[1]
    G = Z.T @ p.Q @ Z
    g0 = Z.T @ (p.Q @ xp + p.c)
    Ar = p.A @ Z
    br = p.b - p.A @ xp
    scale = 1.0 + np.abs(br).max(initial=0.0)
    regularized = False
    if k and np.linalg.eigvalsh(G).min() <= 1e-10 * max(1.0, np.abs(G).max()):
        G = G + REG * np.eye(k)
        regularized = True

    # Rows that do not involve free variables are either always satisfied or infeasible.
    live = np.linalg.norm(Ar, axis=1) > 1e-12 if m else np.zeros(0, dtype=bool)
    if m and np.any(br[~live] < -FEAS_TOL * scale):
        return QpSolution(xp, np.nan, INFEASIBLE, np.inf, 0, regularized=regularized)

    y = None
    if x0 is not None:
        y0 = Z.T @ (np.asarray(x0, dtype=float) - xp)
        if m == 0 or np.all(Ar @ y0 <= br + FEAS_TOL * scale):
            y = y0
    if y is None:
        y = _phase1(Ar[live], br[live])
        if y is None:
            return QpSolution(xp, np.nan, INFEASIBLE, np.inf, 0, regularized=regularized)

    W: list[int] = []
    lam = np.zeros(0)
    status = ITERATION_LIMIT
    degenerate = False
    it = 0
    live_idx = np.flatnonzero(live)
    while it < max_iter:
        it += 1
        Aw = Ar[W] if W else np.zeros((0, k))
        pstep, lam = _solve_eqp(G, G @ y + g0, Aw)
        if np.abs(pstep).max(initial=0.0) <= 1e-12 * (1.0 + np.abs(y).max(initial=0.0)):
            neg = [(lam[q], W[q]) for q in range(len(W)) if lam[q] < -1e-12]
            if not neg:
                status = OPTIMAL
                break
            if degenerate:
                drop = min(i for _, i in neg)
            else:
                drop = min(neg)[1]
            W.remove(drop)
            continue
        # ratio test over non-working rows moving toward their bound
        alpha, block = 1.0, None
        inW = set(W)
        Ap = Ar[live_idx] @ pstep
        slack = br[live_idx] - Ar[live_idx] @ y
        for row, ap, s in zip(live_idx, Ap, slack):
            if row in inW or ap <= 1e-12:
                continue
            a = max(s, 0.0) / ap
            if a < alpha:
                alpha, block = a, row
        y = y + alpha * pstep
        degenerate = alpha <= 1e-14
        if block is not None:
            W.append(int(block))

    x = xp + Z @ y
    mu = np.zeros(m)
    for q, row in enumerate(W):
        if q < len(lam):
            mu[row] = max(lam[q], 0.0) if status == OPTIMAL else lam[q]
    x, mu, nu = _polish(p, x, W, mu)
    rep = check_kkt(p, x, mu, nu)
    return QpSolution(
        x=x,
        objective=p.objective(x),
        status=status,
        kkt_residual=rep.residual,
        iterations=it,
        eq_multipliers=nu,
        ineq_multipliers=mu,
        active_set=tuple(sorted(W)),
        regularized=regularized,
    )


def _polish(p: QpProblem, x, W, mu):
    """Re-solve the full KKT system on the final working set to tighten residuals.

    The reduced solve is exact in exact arithmetic; this pass only removes
    round-off introduced by the null-space projection. The polished point is
    kept when it is no worse than the original.
    """
    n = p.n
    Aw = p.A[W] if W else np.zeros((0, n))
    C = np.vstack([p.E, Aw])
    rhs_c = np.concatenate([p.d, p.b[W] if W else np.zeros(0)])
    r = C.shape[0]
    K = np.zeros((n + r, n + r))
    K[:n, :n] = p.Q
    K[:n, n:] = C.T
    K[n:, :n] = C
    rhs = np.concatenate([-p.c, rhs_c])
    nu0 = _ls_multipliers(p, x, mu)
    try:
        sol = np.linalg.lstsq(K, rhs, rcond=None)[0]
    except np.linalg.LinAlgError:
        return x, mu, nu0
    xn = sol[:n]
    nun = sol[n : n + p.n_eq]
    mun = np.zeros(p.n_ineq)
    if W:
        mun[W] = sol[n + p.n_eq :]
    before = check_kkt(p, x, mu, nu0).residual
    after = check_kkt(p, xn, mun, nun).residual
    if np.all(np.isfinite(xn)) and after <= before and np.all(mun >= -1e-10):
        return xn, np.maximum(mun, 0.0), nun
    return x, mu, nu0


def _ls_multipliers(p: QpProblem, x, mu) -> np.ndarray:
    if not p.n_eq:
        return np.zeros(0)
    grad = p.Q @ x + p.c + p.A.T @ mu
    return np.linalg.lstsq(p.E.T, -grad, rcond=None)[0]
