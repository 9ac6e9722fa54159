import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import bezier_point, circle_fit_curvature, dense_curvature_max, polyline_length
from pwbplan.bezier import (
    BezierSegment,
    ContinuityError,
    CuspError,
    PolylinePath,
    PwbPath,
    arc_length,
    bernstein,
    curvature,
    derivative,
    evaluate,
    max_curvature,
    max_curvature_analytic,
    path_metrics,
)

ARCH = BezierSegment.from_array([[0, 0], [1, 1], [2, 0]])

coord = st.floats(-10, 10, allow_nan=False)
points = st.lists(st.tuples(coord, coord), min_size=3, max_size=3).map(lambda p: np.array(p, float))


def _regular(P):
    """Reject control polygons whose curve comes close to stopping."""
    # B'(t) = a + t * dd is linear in t, so its smallest norm has a closed form
    a, dd = 2 * (P[1] - P[0]), 2 * (P[2] - 2 * P[1] + P[0])
    t = np.clip(-(a @ dd) / (dd @ dd), 0, 1) if dd @ dd > 0 else 0.0
    return np.linalg.norm(a + t * dd) > 1e-2


def test_bernstein_values():
    assert bernstein(2, 0, 0.5) == pytest.approx(0.25)
    assert bernstein(2, 1, 0.5) == pytest.approx(0.5)
    assert bernstein(2, 2, 1.0) == 1.0
    with pytest.raises(ValueError):
        bernstein(2, 3, 0.5)


def test_evaluate_examples():
    assert np.allclose(evaluate(ARCH, 0.0), [0, 0])
    assert np.allclose(evaluate(ARCH, 0.5), [1.0, 0.5])
    assert np.allclose(evaluate(ARCH, 0.25), [0.5, 0.375])
    assert np.allclose(evaluate(ARCH, 1.0), [2, 0])
    with pytest.raises(ValueError):
        evaluate(ARCH, 1.5)


def test_derivative_matches_finite_difference():
    h = 1e-6
    for t in (0.1, 0.5, 0.9):
        fd = (bezier_point(ARCH.control_points, t + h) - bezier_point(ARCH.control_points, t - h)) / (2 * h)
        assert np.allclose(derivative(ARCH, t), fd, atol=1e-8)


def test_curvature_of_arch_apex():
    # B'(1/2) = (2, 0) and B'' = (0, -4): |cross| / speed^3 = 8 / 8
    assert curvature(ARCH, 0.5) == pytest.approx(1.0, rel=1e-12)
    a, b, c = (bezier_point(ARCH.control_points, t) for t in (0.5 - 1e-4, 0.5, 0.5 + 1e-4))
    assert circle_fit_curvature(a, b, c) == pytest.approx(1.0, rel=1e-6)


def test_scaling_halves_curvature():
    big = ARCH.transformed(2 * np.eye(2))
    assert curvature(big, 0.5) == pytest.approx(0.5, rel=1e-12)
    assert max_curvature(big)[1] == pytest.approx(0.5 * max_curvature(ARCH)[1], rel=1e-9)


def test_straight_segment_has_zero_curvature():
    s = BezierSegment.from_array([[0, 0], [1, 0], [2, 0]])
    assert max_curvature(s) == (0.0, 0.0)
    assert arc_length(s) == pytest.approx(2.0, abs=1e-12)


def test_cusp_raises():
    folded = BezierSegment.from_array([[0, 0], [1, 0], [0, 0]])
    with pytest.raises(CuspError):
        max_curvature(folded)
    with pytest.raises(CuspError):
        curvature(BezierSegment.from_array([[0, 0], [0, 0], [1, 1]]), 0.0)


def test_symmetric_arch_peaks_at_middle():
    t, k = max_curvature(ARCH)
    assert t == pytest.approx(0.5, abs=1e-8)
    assert k == pytest.approx(1.0, rel=1e-9)


@pytest.mark.parametrize(
    "P",
    [
        [[0, 0], [3, 0], [3, 1]],
        [[0, 0], [1, 2], [4, 0.5]],
        [[1, -1], [0.2, 0.3], [2.5, 2.0]],
    ],
)
def test_max_curvature_against_dense_grid(P):
    t, k = max_curvature(BezierSegment.from_array(P))
    t_ref, k_ref = dense_curvature_max(P)
    assert abs(t - t_ref) <= 1e-5
    assert k == pytest.approx(k_ref, rel=1e-6)
    assert k >= k_ref * (1 - 1e-12)


@pytest.mark.parametrize("P", [[[0, 0], [1, 1], [2, 0]], [[0, 0], [3, 0], [3, 1]], [[1, -1], [0.2, 0.3], [2.5, 2.0]]])
def test_arc_length_against_dense_polyline(P):
    s = BezierSegment.from_array(P)
    ref = polyline_length(bezier_point(P, np.linspace(0, 1, 1_000_001)))
    assert arc_length(s) == pytest.approx(ref, abs=1e-9)


@given(points, st.floats(0, 1))
def test_point_lies_in_control_hull(P, t):
    x = evaluate(BezierSegment.from_array(P), t)
    assert np.allclose(x, bezier_point(P, t), atol=1e-9)
    # barycentric weights are the Bernstein values, all non-negative
    w = np.array([bernstein(2, i, t) for i in range(3)])
    assert np.all(w >= 0) and w.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.all(x >= P.min(axis=0) - 1e-9) and np.all(x <= P.max(axis=0) + 1e-9)


@given(points, st.floats(-np.pi, np.pi), st.floats(0.2, 5), coord, coord)
def test_affine_invariance(P, theta, scale, vx, vy):
    R = scale * np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    v = np.array([vx, vy])
    s = BezierSegment.from_array(P)
    t = np.linspace(0, 1, 11)
    assert np.allclose(evaluate(s.transformed(R, v), t), evaluate(s, t) @ R.T + v, atol=1e-9)
    if _regular(P):
        k0 = curvature(s, t)
        k1 = curvature(s.transformed(R, v), t)
        assert np.allclose(k1, k0 / scale, rtol=1e-7, atol=1e-9)


@given(points)
def test_analytic_and_numeric_peak_agree(P):
    if not _regular(P):
        return
    s = BezierSegment.from_array(P)
    _, k_num = max_curvature(s)
    _, k_cf = max_curvature_analytic(s)
    assert k_num == pytest.approx(k_cf, rel=1e-7)


def test_path_continuity_checked():
    a = [[0, 0], [1, 0], [2, 0]]
    b = [[2, 0], [3, 0], [4, 1]]
    p = PwbPath.from_control_points([a, b])
    assert p.junction_residuals() == (0.0, 0.0)
    with pytest.raises(ContinuityError):
        PwbPath.from_control_points([a, [[2.1, 0], [3, 0], [4, 1]]])
    with pytest.raises(ContinuityError):
        PwbPath.from_control_points([a, [[2, 0], [3, 0.5], [4, 1]]])


def test_path_metrics():
    p = PwbPath.from_control_points([[[0, 0], [1, 0], [2, 0]], [[2, 0], [3, 0], [4, 1]]])
    m = path_metrics(p)
    assert m.length == pytest.approx(arc_length(p.segments[0]) + arc_length(p.segments[1]), abs=1e-12)
    assert m.max_curvature == pytest.approx(max_curvature(p.segments[1])[1])
    poly = PolylinePath([[0, 0], [3, 4], [3, 5]])
    assert path_metrics(poly).length == pytest.approx(6.0)
    assert path_metrics(poly).max_curvature == 0.0
