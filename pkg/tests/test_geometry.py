import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import square
from oracles import halfplane_vertices, same_point_set, shoelace
from pwbplan.geometry import (
    ConvexPolygon,
    GeometryError,
    Polytope,
    UnboundedError,
    contains,
    polygon_to_polytope,
    polytope_area,
    polytope_vertices,
    shared_facet,
)


@st.composite
def convex_polygons(draw, min_k=3, max_k=8):
    k = draw(st.integers(min_k, max_k))
    gaps = np.array(draw(st.lists(st.floats(0.3, 1.0), min_size=k, max_size=k)))
    ang = np.cumsum(gaps) / gaps.sum() * 2 * np.pi
    r = draw(st.floats(0.5, 5.0))
    cx, cy = draw(st.floats(-10, 10)), draw(st.floats(-10, 10))
    return np.column_stack([cx + r * np.cos(ang), cy + r * np.sin(ang)])


def test_unit_square_rows(unit_square):
    rows = {(tuple(np.round(h, 12)), round(b, 12)) for h, b in zip(unit_square.H, unit_square.b)}
    assert rows == {((-1.0, 0.0), 0.0), ((1.0, 0.0), 1.0), ((0.0, -1.0), 0.0), ((0.0, 1.0), 1.0)}
    # each corner sits on exactly two facets
    for v in square():
        on = np.abs(unit_square.H @ v - unit_square.b) < 1e-12
        assert on.sum() == 2


def test_triangle_centroid_is_strictly_inside():
    p = polygon_to_polytope(ConvexPolygon(np.array([[0, 0], [1, 0], [0, 1]], float)))
    assert p.n_facets == 3
    assert np.all(p.H @ np.array([1 / 3, 1 / 3]) < p.b)


def test_collinear_polygon_rejected():
    with pytest.raises(GeometryError):
        ConvexPolygon(np.array([[0, 0], [1, 0], [2, 0]], float))


def test_nonconvex_polygon_rejected():
    with pytest.raises(GeometryError):
        ConvexPolygon(np.array([[0, 0], [2, 0], [1, 0.5], [2, 2], [0, 2]], float))


def test_clockwise_input_is_reoriented():
    poly = ConvexPolygon(square()[::-1])
    assert shoelace(poly.vertices) > 0


def test_contains_examples(unit_square):
    assert contains(unit_square, (0.5, 0.5), 0.0)
    assert not contains(unit_square, (1.0 + 1e-6, 0.5), 1e-9)
    assert contains(unit_square, (1.0 + 1e-6, 0.5), 1e-3)


@given(st.floats(-2, 3), st.floats(-2, 3), st.floats(0, 1), st.floats(0, 1))
def test_contains_monotone_in_tol(x, y, t1, dt):
    p = polygon_to_polytope(ConvexPolygon(square()))
    if contains(p, (x, y), t1):
        assert contains(p, (x, y), t1 + dt)


def test_unit_square_vertices_match_oracle(unit_square):
    got = polytope_vertices(unit_square)
    want = halfplane_vertices(unit_square.H, unit_square.b)
    assert len(got) == 4
    assert same_point_set(got, want, 1e-12)
    assert shoelace(got) > 0


def test_conflicting_constraints_give_empty_set():
    # x <= -1 together with -x <= 0
    p = Polytope(np.array([[1, 0], [-1, 0], [0, 1], [0, -1]], float), np.array([-1, 0, 1, 0], float))
    assert polytope_vertices(p).shape == (0, 2)


def test_parallel_halfplanes_are_unbounded():
    p = Polytope(np.array([[1, 0], [-1, 0]], float), np.array([1, 0], float))
    with pytest.raises(UnboundedError):
        polytope_vertices(p)


def test_rows_are_normalized_with_their_offsets():
    p = Polytope(np.array([[3.0, 4.0]]), np.array([10.0]))
    assert np.allclose(p.H, [[0.6, 0.8]])
    assert p.b[0] == pytest.approx(2.0)


@given(convex_polygons())
def test_round_trip_vertices(pts):
    poly = ConvexPolygon(pts)
    p = polygon_to_polytope(poly)
    assert same_point_set(polytope_vertices(p), poly.vertices, 1e-9)


@given(convex_polygons())
def test_unit_normals_and_area(pts):
    poly = ConvexPolygon(pts)
    p = polygon_to_polytope(poly)
    assert np.allclose(np.linalg.norm(p.H, axis=1), 1.0, atol=1e-12)
    assert polytope_area(p) == pytest.approx(shoelace(poly.vertices), rel=1e-9)
    for v in poly.vertices:
        assert np.all(p.H @ v <= p.b + 1e-9)


@given(convex_polygons(), st.floats(0.0, 0.3))
def test_shrunk_polytope_matches_oracle(pts, eps):
    p = polygon_to_polytope(ConvexPolygon(pts))
    q = p.with_offsets(p.b - eps)
    got = polytope_vertices(q)
    want = halfplane_vertices(q.H, q.b)
    if len(got) == 0:
        assert len(want) < 3 or abs(shoelace(want)) < 1e-12
    else:
        assert same_point_set(got, want, 1e-8)


def test_shared_facet_side_by_side():
    a = polygon_to_polytope(ConvexPolygon(square(0, 0)))
    b = polygon_to_polytope(ConvexPolygon(square(1, 0)))
    sf = shared_facet(a, b)
    assert sf is not None
    assert np.allclose(a.H[sf.facet_a], [1, 0])
    assert np.allclose(b.H[sf.facet_b], [-1, 0])
    assert same_point_set([sf.p, sf.q], [[1, 0], [1, 1]], 1e-12)
    assert sf.length == pytest.approx(1.0)


def test_shared_facet_partial_overlap():
    a = polygon_to_polytope(ConvexPolygon(square(0, 0)))
    b = polygon_to_polytope(ConvexPolygon(square(1, 0.5)))
    sf = shared_facet(a, b)
    assert same_point_set([sf.p, sf.q], [[1, 0.5], [1, 1]], 1e-12)


def test_corner_contact_is_not_a_facet():
    a = polygon_to_polytope(ConvexPolygon(square(0, 0)))
    b = polygon_to_polytope(ConvexPolygon(square(1, 1)))
    assert shared_facet(a, b) is None


def test_disjoint_cells_share_nothing():
    a = polygon_to_polytope(ConvexPolygon(square(0, 0)))
    b = polygon_to_polytope(ConvexPolygon(square(3, 0)))
    assert shared_facet(a, b) is None
