"""2D geometry primitives: convex polygons and H-representation polytopes.

Every ``Polytope`` carries unit-norm facet normals, so subtracting a scalar
from an offset moves that facet by exactly that many meters. The safety
margin construction downstream relies on this.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import InputError

# Tolerance hierarchy: construction/degeneracy, containment/feasibility, user checks.
TOL_CONSTRUCT = 1e-12
TOL_FEAS = 1e-9
TOL_USER = 1e-6


class GeometryError(InputError):
    """Invalid or degenerate geometric input."""


class UnboundedError(GeometryError):
    pass


def as_point(x) -> np.ndarray:
    p = np.asarray(x, dtype=float).reshape(-1)
    if p.shape != (2,) or not np.all(np.isfinite(p)):
        raise GeometryError(f"expected a finite 2D point, got {x!r}")
    return p


def cross2(a, b):
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def signed_area(vertices: np.ndarray) -> float:
    v = np.asarray(vertices, dtype=float)
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ConvexPolygon:
    """Strictly convex polygon, vertices stored counter-clockwise.

    Clockwise input is reoriented; anything non-convex, degenerate or with
    repeated vertices raises ``GeometryError``.
    """

    vertices: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
            raise GeometryError("a polygon needs at least 3 two-dimensional vertices")
        if not np.all(np.isfinite(v)):
            raise GeometryError("polygon vertices must be finite")
        if signed_area(v) < 0:
            v = v[::-1]
        edges = np.roll(v, -1, axis=0) - v
        if np.any(np.linalg.norm(edges, axis=1) <= TOL_CONSTRUCT):
            raise GeometryError("polygon has duplicate consecutive vertices")
        turns = cross2(edges, np.roll(edges, -1, axis=0))
        if np.any(turns <= TOL_CONSTRUCT):
            raise GeometryError("polygon is not strictly convex (collinear or reflex vertex)")
        # A star-shaped self-intersecting loop can have all-left turns; its total turning exceeds 2*pi.
        angles = np.arctan2(turns, np.einsum("ij,ij->i", edges, np.roll(edges, -1, axis=0)))
        if abs(angles.sum() - 2 * np.pi) > 1e-6:
            raise GeometryError("polygon winds more than once")
        object.__setattr__(self, "vertices", _frozen(v))

    @property
    def area(self) -> float:
        return signed_area(self.vertices)

    @property
    def centroid(self) -> np.ndarray:
        v = self.vertices
        w = np.roll(v, -1, axis=0)
        c = cross2(v, w)
        a = c.sum() / 2.0
        return ((v + w) * c[:, None]).sum(axis=0) / (6.0 * a)

    def edges(self):
        v = self.vertices
        return list(zip(v, np.roll(v, -1, axis=0)))

    def __len__(self):
        return len(self.vertices)


@dataclass(frozen=True, eq=False)
class Polytope:
    """Convex region ``{x | H x <= b}`` with unit-norm rows of ``H``.

    Rows passed in with a non-unit norm are rescaled together with their
    offset, which leaves the set unchanged. ``facet_tags`` are optional labels
    (one per row) used to recognise facets shared between cells.
    """

    H: np.ndarray
    b: np.ndarray
    facet_tags: tuple = ()

    def __post_init__(self):
        H = np.asarray(self.H, dtype=float)
        b = np.asarray(self.b, dtype=float).reshape(-1)
        if H.ndim != 2 or H.shape[1] != 2 or H.shape[0] != b.shape[0]:
            raise GeometryError(f"inconsistent H {H.shape} / b {b.shape}")
        norms = np.linalg.norm(H, axis=1)
        if np.any(norms <= TOL_CONSTRUCT):
            raise GeometryError("zero facet normal")
        H = H / norms[:, None]
        b = b / norms
        tags = tuple(self.facet_tags) if self.facet_tags else (None,) * len(b)
        if len(tags) != len(b):
            raise GeometryError("facet_tags must have one entry per row")
        object.__setattr__(self, "H", _frozen(H))
        object.__setattr__(self, "b", _frozen(b))
        object.__setattr__(self, "facet_tags", tags)

    @property
    def n_facets(self) -> int:
        return len(self.b)

    def with_offsets(self, b) -> "Polytope":
        return Polytope(self.H, b, self.facet_tags)

    def translated(self, v) -> "Polytope":
        return Polytope(self.H, self.b + self.H @ as_point(v), self.facet_tags)

    def slack(self, x) -> np.ndarray:
        """``b - H x`` for one point or a ``(n, 2)`` batch (one row per point)."""
        x = np.asarray(x, dtype=float)
        return self.b - x @ self.H.T


def polygon_to_polytope(poly: ConvexPolygon, tags: Optional[Sequence] = None) -> Polytope:
    """One outward unit-normal half-plane per polygon edge, in edge order."""
    if not isinstance(poly, ConvexPolygon):
        poly = ConvexPolygon(np.asarray(poly, dtype=float))
    v = poly.vertices
    e = np.roll(v, -1, axis=0) - v
    # CCW interior is on the left of each edge, so the outward normal is the right perpendicular.
    n = np.column_stack([e[:, 1], -e[:, 0]])
    n /= np.linalg.norm(n, axis=1)[:, None]
    b = np.einsum("ij,ij->i", n, v)
    return Polytope(n, b, tuple(tags) if tags is not None else ())


def contains(p: Polytope, x, tol: float = 0.0) -> bool:
    if tol < 0:
        raise ValueError("tol must be non-negative")
    x = as_point(x)
    return bool(np.max(p.H @ x - p.b) <= tol)


def _check_bounded(H: np.ndarray) -> None:
    ang = np.sort(np.arctan2(H[:, 1], H[:, 0]))
    gaps = np.diff(np.concatenate([ang, [ang[0] + 2 * np.pi]]))
    if len(ang) < 3 or gaps.max() >= np.pi - TOL_CONSTRUCT:
        raise UnboundedError("half-plane normals do not positively span the plane; region is unbounded")


def _sort_ccw(pts: np.ndarray) -> np.ndarray:
    c = pts.mean(axis=0)
    order = np.argsort(np.arctan2(pts[:, 1] - c[1], pts[:, 0] - c[0]), kind="stable")
    return pts[order]


def polytope_vertices(p: Polytope) -> np.ndarray:
    """CCW vertices of the feasible region, shape ``(k, 2)``.

    Returns an empty ``(0, 2)`` array when the region is empty or has area
    below 1e-12 m^2. Raises ``UnboundedError`` if the normals leave the region
    unbounded.
    """
    H, b = p.H, p.b
    _check_bounded(H)
    K = len(b)
    i, j = np.triu_indices(K, k=1)
    det = H[i, 0] * H[j, 1] - H[i, 1] * H[j, 0]
    ok = np.abs(det) > TOL_CONSTRUCT
    i, j, det = i[ok], j[ok], det[ok]
    xs = (b[i] * H[j, 1] - b[j] * H[i, 1]) / det
    ys = (H[i, 0] * b[j] - H[j, 0] * b[i]) / det
    cand = np.column_stack([xs, ys])
    if len(cand) == 0:
        return np.zeros((0, 2))
    feas = np.all(cand @ H.T - b <= TOL_FEAS * (1.0 + np.abs(b)), axis=1)
    cand = cand[feas]
    pts: list[np.ndarray] = []
    for c in cand:
        if not any(np.linalg.norm(c - q) <= TOL_FEAS for q in pts):
            pts.append(c)
    if len(pts) < 3:
        return np.zeros((0, 2))
    out = _sort_ccw(np.array(pts))
    if signed_area(out) < TOL_CONSTRUCT:
        return np.zeros((0, 2))
    return out


def polytope_area(p: Polytope) -> float:
    v = polytope_vertices(p)
    return signed_area(v) if len(v) else 0.0


def facet_segment(p: Polytope, k: int, others: Sequence[Polytope] = ()) -> Optional[tuple[np.ndarray, np.ndarray]]:
    """Segment of the line ``H_k x = b_k`` lying inside ``p`` (and all ``others``).

    Returns ``None`` when the clipped piece is shorter than ``TOL_FEAS``.
    """
    n = p.H[k]
    x0 = n * p.b[k]
    d = np.array([-n[1], n[0]])
    lo, hi = -np.inf, np.inf
    rows = [(p.H[m], p.b[m]) for m in range(p.n_facets) if m != k]
    for q in others:
        rows.extend(zip(q.H, q.b))
    for h, bb in rows:
        hd = float(h @ d)
        r = float(bb - h @ x0)
        if abs(hd) <= TOL_CONSTRUCT:
            # parallel to the facet line: either the whole line or nothing
            if r < -TOL_FEAS:
                return None
            continue
        s = r / hd
        if hd > 0:
            hi = min(hi, s)
        else:
            lo = max(lo, s)
    if not (np.isfinite(lo) and np.isfinite(hi)) or hi - lo <= TOL_FEAS:
        return None
    return x0 + lo * d, x0 + hi * d


@dataclass(frozen=True, eq=False)
class SharedFacet:
    facet_a: int
    facet_b: int
    p: np.ndarray
    q: np.ndarray

    @property
    def length(self) -> float:
        return float(np.linalg.norm(self.q - self.p))


def shared_facet(a: Polytope, b: Polytope) -> Optional[SharedFacet]:
    """Common 1D boundary piece of two cells, or ``None``.

    Facets must be anti-parallel and lie on the same line; the shared segment
    is the facet line clipped against both polytopes. Corner contacts and
    overlaps shorter than 1e-9 m do not count.
    """
    for i in range(a.n_facets):
        for j in range(b.n_facets):
            if a.H[i] @ b.H[j] > -1.0 + TOL_FEAS:
                continue
            if abs(a.b[i] + b.b[j]) > TOL_FEAS * (1.0 + abs(a.b[i])):
                continue
            seg = facet_segment(a, i, [b])
            if seg is not None:
                return SharedFacet(i, j, seg[0], seg[1])
    return None


def clip_polygon(subject: np.ndarray, p: Polytope) -> np.ndarray:
    """Sutherland-Hodgman clip of a polygon against every half-plane of ``p``."""
    out = np.asarray(subject, dtype=float)
    for h, bb in zip(p.H, p.b):
        if len(out) == 0:
            break
        s = bb - out @ h
        nxt = []
        for k in range(len(out)):
            a, c = out[k], out[(k + 1) % len(out)]
            sa, sc = s[k], s[(k + 1) % len(out)]
            if sa >= 0:
                nxt.append(a)
            if (sa >= 0) != (sc >= 0):
                t = sa / (sa - sc)
                nxt.append(a + t * (c - a))
        out = np.array(nxt) if nxt else np.zeros((0, 2))
    return out


def overlap_area(a: ConvexPolygon, b: ConvexPolygon) -> float:
    clipped = clip_polygon(a.vertices, polygon_to_polytope(b))
    return abs(signed_area(clipped)) if len(clipped) >= 3 else 0.0


def point_segment_distance(x, p, q) -> float:
    x, p, q = (np.asarray(v, dtype=float) for v in (x, p, q))
    d = q - p
    L2 = float(d @ d)
    t = 0.0 if L2 == 0 else min(1.0, max(0.0, float((x - p) @ d) / L2))
    return float(np.linalg.norm(x - (p + t * d)))


def point_polygon_distance(x, poly: ConvexPolygon) -> float:
    """Distance from ``x`` to a convex polygon; zero inside."""
    x = as_point(x)
    if contains(polygon_to_polytope(poly), x):
        return 0.0
    return min(point_segment_distance(x, a, c) for a, c in poly.edges())


def inscribed_radius(p: Polytope) -> float:
    """Radius of the largest disc inside ``p`` (Chebyshev radius), via a small LP."""
    from scipy.optimize import linprog

    # max r s.t. H c + r <= b  (rows are unit norm)
    A = np.column_stack([p.H, np.ones(p.n_facets)])
    res = linprog([0, 0, -1], A_ub=A, b_ub=p.b, bounds=[(None, None), (None, None), (None, None)], method="highs")
    if res.status != 0:
        return -np.inf
    return float(res.x[2])
