import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import box, square
from oracles import halfplane_vertices, same_point_set
from pwbplan.corridor import (
    EndpointInsideMarginError,
    MarginTooLargeError,
    build_safe_pairs,
    corridor_bound,
    make_safe_pair,
)
from pwbplan.decomposition import Workspace, find_channel, triangulate_free_space
from pwbplan.geometry import ConvexPolygon, polygon_to_polytope, polytope_vertices


def _facet(p, normal):
    return int(np.argmin(np.linalg.norm(p.H - np.asarray(normal, float), axis=1)))


def test_no_shared_facets_shrinks_everything(unit_square):
    pr = make_safe_pair(unit_square, 0.2)
    want = square(0.2, 0.2, 0.6)
    for poly in (pr.safe_in, pr.safe_out):
        got = polytope_vertices(poly)
        assert same_point_set(got, want, 1e-12)
        assert same_point_set(got, halfplane_vertices(poly.H, poly.b), 1e-12)


def test_exit_facet_keeps_its_offset(unit_square):
    k = _facet(unit_square, (1, 0))
    pr = make_safe_pair(unit_square, 0.2, exit=k)
    assert same_point_set(polytope_vertices(pr.safe_out), box(0.2, 0.2, 1.0, 0.8), 1e-12)
    assert same_point_set(polytope_vertices(pr.safe_in), square(0.2, 0.2, 0.6), 1e-12)
    assert pr.b_safe_out[k] == unit_square.b[k]


def test_thin_triangle_margin_too_large():
    thin = polygon_to_polytope(ConvexPolygon(np.array([[0, 0], [4, 0], [2, 0.3]], float)))
    with pytest.raises(MarginTooLargeError) as ei:
        make_safe_pair(thin, 0.2, cell_index=7)
    assert ei.value.cell_index == 7


def test_corridor_bound(unit_square):
    e, x = _facet(unit_square, (-1, 0)), _facet(unit_square, (1, 0))
    pr = make_safe_pair(unit_square, 0.2, entry=e, exit=x)
    other = _facet(unit_square, (0, 1))
    assert corridor_bound(pr, other) == pytest.approx(unit_square.b[other] - 0.2, abs=0)
    assert corridor_bound(pr, e) == unit_square.b[e]
    assert corridor_bound(pr, x) == unit_square.b[x]


@given(st.one_of(st.just(0.0), st.floats(1e-6, 0.45)), st.integers(0, 3), st.integers(0, 3))
def test_offsets_take_only_two_values(eps, entry, exit_):
    cell = polygon_to_polytope(ConvexPolygon(square()))
    pr = make_safe_pair(cell, eps, entry=entry, exit=exit_)
    for k in range(4):
        assert pr.b_safe_in[k] in (cell.b[k], cell.b[k] - eps)
        assert pr.b_safe_out[k] in (cell.b[k], cell.b[k] - eps)
        assert (pr.b_safe_in[k] == cell.b[k]) == (k == entry or eps == 0)
        assert (pr.b_safe_out[k] == cell.b[k]) == (k == exit_ or eps == 0)


def test_zero_margin_is_identity(unit_square):
    pr = make_safe_pair(unit_square, 0.0)
    assert np.array_equal(pr.b_safe_in, unit_square.b)
    assert np.array_equal(pr.b_safe_out, unit_square.b)


def _lcorridor():
    return Workspace(ConvexPolygon(box(0, 0, 4, 4)), (ConvexPolygon(box(1.5, 1.5, 4, 4)),), (0.75, 3.5), (3.5, 0.75))


def test_pairs_follow_channel_and_ends_are_closed():
    w = _lcorridor()
    g = triangulate_free_space(w)
    c = find_channel(g, w.start, w.goal, 0.2)
    pairs = build_safe_pairs(g, c, 0.2, w.start, w.goal)
    assert len(pairs) == len(c)
    assert pairs[0].entry_facet is None and pairs[-1].exit_facet is None
    first, last = pairs[0], pairs[-1]
    assert np.allclose(first.b_safe_in, first.base.b - 0.2)
    assert np.allclose(last.b_safe_out, last.base.b - 0.2)
    for k, pr in enumerate(pairs):
        assert pr.cell_index == c.cell_indices[k]
        assert pr.entry_facet == c.entry_facets[k] and pr.exit_facet == c.exit_facets[k]


def test_endpoint_inside_margin_is_reported():
    w = Workspace(ConvexPolygon(box(0, 0, 4, 4)), (), (0.1, 2.0), (3.0, 3.5))
    g = triangulate_free_space(w)
    c = find_channel(g, w.start, w.goal, 0.2)
    with pytest.raises(EndpointInsideMarginError) as ei:
        build_safe_pairs(g, c, 0.2, w.start, w.goal)
    assert ei.value.which == "start"


def test_nonpositive_margin_rejected():
    w = _lcorridor()
    g = triangulate_free_space(w)
    c = find_channel(g, w.start, w.goal)
    with pytest.raises(ValueError):
        build_safe_pairs(g, c, 0.0)


@given(
    st.lists(st.floats(0, 1), min_size=3, max_size=3),
    st.lists(st.floats(0, 1), min_size=3, max_size=3),
    st.floats(0, 1),
)
def test_hull_certificate(w0, w1, t):
    """Points drawn from the hull of P0 in safe_in, P1 in both, P2 in safe_out respect the row-wise bound."""
    cell = polygon_to_polytope(ConvexPolygon(square(0, 0, 2)))
    pr = make_safe_pair(cell, 0.2, entry=_facet(cell, (-1, 0)), exit=_facet(cell, (1, 0)))
    vin = polytope_vertices(pr.safe_in)
    vout = polytope_vertices(pr.safe_out)
    both = polytope_vertices(cell.with_offsets(np.minimum(pr.b_safe_in, pr.b_safe_out)))

    def pick(v, wts):
        wts = np.resize(np.asarray(wts) + 1e-3, len(v))
        return (wts / wts.sum()) @ v

    P0, P1, P2 = pick(vin, w0), pick(both, w1), pick(vout, w0[::-1])
    x = (1 - t) ** 2 * P0 + 2 * (1 - t) * t * P1 + t**2 * P2
    bound = np.array([corridor_bound(pr, k) for k in range(cell.n_facets)])
    assert np.all(cell.H @ x <= bound + 1e-12)
