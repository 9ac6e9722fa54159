import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import enumerate_qp, grid_qp
from pwbplan.errors import InputError
from pwbplan.qp import INFEASIBLE, ITERATION_LIMIT, OPTIMAL, QpProblem, check_kkt, solve


def random_box_qp(seed, n, extra_rows=0, psd_only=False):
    rng = np.random.default_rng(seed)
    M = rng.normal(size=(n, n))
    Q = M @ M.T + (0.0 if psd_only else 0.1) * np.eye(n)
    c = rng.normal(size=n) * 2
    lo = rng.uniform(-1.0, -0.2, n)
    hi = rng.uniform(0.2, 1.0, n)
    A = np.vstack([np.eye(n), -np.eye(n)])
    b = np.concatenate([hi, -lo])
    if extra_rows:
        G = rng.normal(size=(extra_rows, n))
        A = np.vstack([A, G])
        b = np.concatenate([b, rng.uniform(0.1, 0.5, extra_rows)])
    return QpProblem(Q, c, A=A, b=b)


def test_single_active_bound():
    sol = solve(QpProblem([[2.0]], [0.0], A=[[-1.0]], b=[-1.0]))
    assert sol.status == OPTIMAL
    assert sol.x[0] == pytest.approx(1.0, abs=1e-12)
    assert sol.objective == pytest.approx(1.0, abs=1e-12)
    assert sol.ineq_multipliers[0] == pytest.approx(2.0, abs=1e-10)


def test_equality_symmetry():
    sol = solve(QpProblem(2 * np.eye(2), [-2.0, -2.0], E=[[1.0, 1.0]], d=[1.0]))
    assert np.allclose(sol.x, [0.5, 0.5], atol=1e-12)


def test_one_sided_bound_and_free_variable():
    sol = solve(QpProblem(np.eye(2), [0.0, 0.0], A=[[1.0, 0.0]], b=[-2.0]))
    assert np.allclose(sol.x, [-2.0, 0.0], atol=1e-12)


def test_infeasible_reported_not_raised():
    sol = solve(QpProblem(np.eye(1), [0.0], A=[[1.0], [-1.0]], b=[-1.0, -1.0]))
    assert sol.status == INFEASIBLE


def test_inconsistent_equalities_infeasible():
    sol = solve(QpProblem(np.eye(2), [0.0, 0.0], E=[[1.0, 0.0], [1.0, 0.0]], d=[0.0, 1.0]))
    assert sol.status == INFEASIBLE


def test_iteration_limit_status():
    p = random_box_qp(3, 6)
    sol = solve(p, max_iter=1)
    assert sol.status in (ITERATION_LIMIT, OPTIMAL)
    if solve(p).iterations > 1:
        assert sol.status == ITERATION_LIMIT


def test_rejects_nonsymmetric_and_indefinite():
    with pytest.raises(InputError):
        QpProblem([[1.0, 1.0], [0.0, 1.0]], [0.0, 0.0])
    with pytest.raises(InputError):
        QpProblem([[1.0, 0.0], [0.0, -1.0]], [0.0, 0.0])


def test_kkt_report_examples():
    p = QpProblem([[2.0]], [0.0], A=[[-1.0]], b=[-1.0])
    # hand-assembled: Qx + c + A^T mu = 2 - 2 = 0, slack 0
    rep = check_kkt(p, [1.0], [2.0])
    assert rep.residual <= 1e-12
    assert check_kkt(p, [1.1], [2.0]).stationarity >= 0.1 - 1e-12
    bad = check_kkt(p, [1.0], [-0.5])
    assert not bad.dual_feasible


def test_semidefinite_objective_is_regularized():
    # only x0 is penalized; x1 is pinned by a bound
    sol = solve(QpProblem([[2.0, 0.0], [0.0, 0.0]], [-2.0, 1.0], A=[[0.0, -1.0]], b=[0.0]))
    assert sol.status == OPTIMAL
    assert sol.regularized
    assert np.allclose(sol.x, [1.0, 0.0], atol=1e-8)


@pytest.mark.parametrize("seed", range(6))
def test_matches_grid_oracle_small(seed):
    n = 1 + seed % 2
    p = random_box_qp(seed, n)
    sol = solve(p)
    ref = grid_qp(p.Q, p.c, p.A, p.b, -1.0, 1.0, 1e-3)
    assert sol.status == OPTIMAL
    assert np.abs(sol.x - ref).max() <= 5e-3
    assert sol.kkt_residual <= 1e-8


@pytest.mark.parametrize("seed", range(12))
def test_matches_enumeration_oracle(seed):
    n = 3 + seed % 4
    p = random_box_qp(100 + seed, n, extra_rows=seed % 3)
    sol = solve(p)
    ref = enumerate_qp(p.Q, p.c, p.A, p.b)
    assert sol.status == OPTIMAL
    assert np.abs(sol.x - ref).max() <= 1e-8
    assert sol.kkt_residual <= 1e-8


@settings(max_examples=30)
@given(st.integers(0, 10**6), st.integers(2, 8))
def test_equality_constrained_kkt(seed, n):
    rng = np.random.default_rng(seed)
    p0 = random_box_qp(seed, n, extra_rows=2)
    E = rng.normal(size=(1, n))
    p = QpProblem(p0.Q, p0.c, E=E, d=[0.0], A=p0.A, b=p0.b)
    sol = solve(p)
    assert sol.status == OPTIMAL
    assert sol.kkt_residual <= 1e-8
    assert np.abs(E @ sol.x).max() <= 1e-9
    assert np.all(p.A @ sol.x <= p.b + 1e-9)


@settings(max_examples=30)
@given(st.integers(0, 10**6), st.integers(1, 6))
def test_row_permutation_invariance(seed, n):
    rng = np.random.default_rng(seed)
    p = random_box_qp(seed, n, extra_rows=2)
    E = rng.normal(size=(1, n))
    # the origin is strictly feasible for the box and extra rows, so d = 0 keeps it feasible
    p = QpProblem(p.Q, p.c, E=E, d=[0.0], A=p.A, b=p.b)
    perm = rng.permutation(p.n_ineq)
    q = QpProblem(p.Q, p.c, E=p.E, d=p.d, A=p.A[perm], b=p.b[perm])
    a, b = solve(p), solve(q)
    assert a.status == b.status == OPTIMAL
    assert np.abs(a.x - b.x).max() <= 1e-8


@settings(max_examples=30)
@given(st.integers(0, 10**6), st.integers(1, 6))
def test_warm_start_is_a_fixed_point(seed, n):
    p = random_box_qp(seed, n, extra_rows=1)
    a = solve(p)
    b = solve(p, x0=a.x)
    assert np.abs(a.x - b.x).max() <= 1e-10


@settings(max_examples=30)
@given(st.integers(0, 10**6), st.integers(1, 6))
def test_reported_objective_recomputed(seed, n):
    p = random_box_qp(seed, n, extra_rows=1)
    sol = solve(p)
    f = 0.5 * sol.x @ p.Q @ sol.x + p.c @ sol.x
    assert sol.objective == pytest.approx(f, rel=1e-10, abs=1e-12)


def test_deterministic():
    p = random_box_qp(9, 6, extra_rows=3)
    a, b = solve(p), solve(p)
    assert np.array_equal(a.x, b.x) and a.iterations == b.iterations
