"""Free-space cell decomposition, cell adjacency graph and channel search.

Free space (boundary minus obstacles) is split into triangles by a constrained
Delaunay triangulation in which every obstacle and boundary edge is forced to
be a triangle edge. The initial unconstrained triangulation comes from
``scipy.spatial.Delaunay``; missing constraint edges are recovered by edge
flips and the result is then made constrained-Delaunay by Lawson flips.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.spatial import Delaunay

from .errors import InfeasibleError, InputError
from .geometry import (
    TOL_CONSTRUCT,
    TOL_FEAS,
    ConvexPolygon,
    GeometryError,
    Polytope,
    SharedFacet,
    as_point,
    contains,
    facet_segment,
    overlap_area,
    point_polygon_distance,
    polygon_to_polytope,
    polytope_area,
    polytope_vertices,
    shared_facet,
    signed_area,
)


class InfeasibleWorkspaceError(InputError):
    """Start or goal is not in free space."""


class PointNotInFreeSpaceError(InputError):
    pass


class NoChannelError(InfeasibleError):
    pass


@dataclass(frozen=True, eq=False)
class Workspace:
    boundary: ConvexPolygon
    obstacles: tuple = ()
    start: np.ndarray = field(default_factory=lambda: np.zeros(2))
    goal: np.ndarray = field(default_factory=lambda: np.zeros(2))

    def __post_init__(self):
        boundary = self.boundary if isinstance(self.boundary, ConvexPolygon) else ConvexPolygon(self.boundary)
        obstacles = tuple(o if isinstance(o, ConvexPolygon) else ConvexPolygon(o) for o in self.obstacles)
        object.__setattr__(self, "boundary", boundary)
        object.__setattr__(self, "obstacles", obstacles)
        object.__setattr__(self, "start", as_point(self.start))
        object.__setattr__(self, "goal", as_point(self.goal))
        problems = self.geometry_problems()
        if problems:
            raise GeometryError("; ".join(problems))

    def geometry_problems(self) -> list[str]:
        out = []
        bpoly = polygon_to_polytope(self.boundary)
        for k, ob in enumerate(self.obstacles):
            if any(not contains(bpoly, v, TOL_FEAS) for v in ob.vertices):
                out.append(f"obstacle {k} is not inside the boundary")
        for i in range(len(self.obstacles)):
            for j in range(i + 1, len(self.obstacles)):
                if overlap_area(self.obstacles[i], self.obstacles[j]) >= 1e-9:
                    out.append(f"obstacles {i} and {j} overlap")
        return out

    def point_in_free_space(self, x) -> bool:
        x = as_point(x)
        if not contains(polygon_to_polytope(self.boundary), x, TOL_FEAS):
            return False
        for ob in self.obstacles:
            P = polygon_to_polytope(ob)
            if np.max(P.H @ x - P.b) < -TOL_FEAS:
                return False
        return True

    def check_endpoints(self) -> None:
        for name, x in (("start", self.start), ("goal", self.goal)):
            if not self.point_in_free_space(x):
                raise InfeasibleWorkspaceError(f"{name} {tuple(x)} is not in free space")

    @property
    def free_area(self) -> float:
        return self.boundary.area - sum(o.area for o in self.obstacles)

    def translated(self, v) -> "Workspace":
        v = as_point(v)
        return Workspace(
            ConvexPolygon(self.boundary.vertices + v),
            tuple(ConvexPolygon(o.vertices + v) for o in self.obstacles),
            self.start + v,
            self.goal + v,
        )

    def mirrored_y(self) -> "Workspace":
        """Reflection across the x axis."""
        m = np.array([1.0, -1.0])
        return Workspace(
            ConvexPolygon(self.boundary.vertices * m),
            tuple(ConvexPolygon(o.vertices * m) for o in self.obstacles),
            self.start * m,
            self.goal * m,
        )


@dataclass(frozen=True)
class Adjacency:
    i: int
    j: int
    facet: SharedFacet


@dataclass(frozen=True, eq=False)
class CellGraph:
    """Convex cells plus their facet-sharing adjacency.

    ``vertices``/``triangles`` are populated when the graph comes from a
    triangulation and are only used for plotting and serialization.
    """

    cells: tuple
    adjacency: tuple
    vertices: Optional[np.ndarray] = None
    triangles: Optional[np.ndarray] = None

    def __post_init__(self):
        nbrs: dict[int, list] = {k: [] for k in range(len(self.cells))}
        for e in self.adjacency:
            nbrs[e.i].append((e.j, e.facet.facet_a, e.facet.facet_b))
            nbrs[e.j].append((e.i, e.facet.facet_b, e.facet.facet_a))
        for v in nbrs.values():
            v.sort()
        object.__setattr__(self, "_nbrs", nbrs)
        object.__setattr__(self, "_centroids", np.array([_centroid(c) for c in self.cells]))

    @classmethod
    def from_cells(cls, cells: Sequence[Polytope]) -> "CellGraph":
        """Adjacency by pairwise facet matching; O(n^2), meant for small hand-built graphs."""
        adj = []
        for i in range(len(cells)):
            for j in range(i + 1, len(cells)):
                sf = shared_facet(cells[i], cells[j])
                if sf is not None:
                    adj.append(Adjacency(i, j, sf))
        return cls(tuple(cells), tuple(adj))

    def neighbors(self, i: int) -> list[tuple[int, int, int]]:
        """``(j, facet index in i, facet index in j)`` for every neighbour of ``i``."""
        return self._nbrs[i]

    def facet_between(self, i: int, j: int) -> tuple[int, int]:
        for n, fi, fj in self._nbrs[i]:
            if n == j:
                return fi, fj
        raise KeyError(f"cells {i} and {j} are not adjacent")

    @property
    def centroids(self) -> np.ndarray:
        return self._centroids

    def areas(self) -> np.ndarray:
        return np.array([polytope_area(c) for c in self.cells])

    def __len__(self):
        return len(self.cells)


def _centroid(p: Polytope) -> np.ndarray:
    v = polytope_vertices(p)
    return ConvexPolygon(v).centroid if len(v) >= 3 else np.full(2, np.nan)


@dataclass(frozen=True)
class Channel:
    cell_indices: tuple
    entry_facets: tuple
    exit_facets: tuple

    def __len__(self):
        return len(self.cell_indices)

    @property
    def M(self) -> int:
        return len(self.cell_indices) - 1

    def validate(self, g: CellGraph, start=None, goal=None) -> None:
        idx = self.cell_indices
        if len(set(idx)) != len(idx):
            raise InputError("channel repeats a cell")
        if self.entry_facets[0] is not None or self.exit_facets[-1] is not None:
            raise InputError("channel ends must have no entry/exit facet")
        for k in range(len(idx) - 1):
            fi, fj = g.facet_between(idx[k], idx[k + 1])
            if self.exit_facets[k] != fi or self.entry_facets[k + 1] != fj:
                raise InputError(f"channel facets disagree with graph at step {k}")
        if start is not None and not contains(g.cells[idx[0]], start, TOL_FEAS):
            raise InputError("first channel cell does not contain start")
        if goal is not None and not contains(g.cells[idx[-1]], goal, TOL_FEAS):
            raise InputError("last channel cell does not contain goal")


# --------------------------------------------------------------------------
# constrained triangulation
# --------------------------------------------------------------------------


def _orient(p, a, b, c) -> float:
    pa, pb, pc = p[a], p[b], p[c]
    return (pb[0] - pa[0]) * (pc[1] - pa[1]) - (pb[1] - pa[1]) * (pc[0] - pa[0])


def _incircle(p, a, b, c, d) -> float:
    """> 0 iff ``d`` is strictly inside the circumcircle of CCW triangle ``abc``."""
    m = np.array([p[a] - p[d], p[b] - p[d], p[c] - p[d]])
    return float(np.linalg.det(np.column_stack([m, (m**2).sum(axis=1)])))


class _Mesh:
    def __init__(self, pts: np.ndarray):
        self.p = pts
        self.opp: dict[tuple[int, int], int] = {}  # directed edge (a, b) -> third vertex of CCW (a, b, c)

    def add(self, a, b, c):
        if _orient(self.p, a, b, c) < 0:
            b, c = c, b
        self.opp[(a, b)] = c
        self.opp[(b, c)] = a
        self.opp[(c, a)] = b

    def remove(self, a, b, c):
        for e in ((a, b), (b, c), (c, a)):
            del self.opp[e]

    def has_edge(self, a, b) -> bool:
        return (a, b) in self.opp or (b, a) in self.opp

    def flip(self, a, b):
        c = self.opp[(a, b)]
        d = self.opp[(b, a)]
        self.remove(a, b, c)
        self.remove(b, a, d)
        self.add(d, b, c)
        self.add(c, a, d)
        return c, d

    def triangles(self):
        seen = set()
        out = []
        for (a, b), c in self.opp.items():
            key = tuple(sorted((a, b, c)))
            if key not in seen:
                seen.add(key)
                out.append((a, b, c))
        return out

    def undirected_edges(self):
        return sorted({(min(a, b), max(a, b)) for a, b in self.opp})


def _crosses(p, a, b, u, v, tol) -> bool:
    if len({a, b, u, v}) < 4:
        return False
    o1, o2 = _orient(p, u, v, a), _orient(p, u, v, b)
    o3, o4 = _orient(p, a, b, u), _orient(p, a, b, v)
    return ((o1 > tol and o2 < -tol) or (o1 < -tol and o2 > tol)) and (
        (o3 > tol and o4 < -tol) or (o3 < -tol and o4 > tol)
    )


def _merge_vertices(loops: Sequence[np.ndarray], extra: np.ndarray) -> tuple[np.ndarray, list[list[int]]]:
    pts: list[np.ndarray] = []
    index_loops = []

    def idx(q):
        for k, r in enumerate(pts):
            if np.linalg.norm(q - r) <= TOL_CONSTRUCT * (1.0 + np.abs(q).max()):
                return k
        pts.append(np.asarray(q, dtype=float))
        return len(pts) - 1

    for loop in loops:
        index_loops.append([idx(q) for q in loop])
    for q in extra:
        idx(q)
    return np.array(pts), index_loops


def _split_constraints(p: np.ndarray, loops: list[list[int]]) -> list[tuple[int, int]]:
    """Loop edges, split wherever another vertex lies on them, deduplicated."""
    out = set()
    for loop in loops:
        for k in range(len(loop)):
            u, v = loop[k], loop[(k + 1) % len(loop)]
            d = p[v] - p[u]
            L2 = float(d @ d)
            on = []
            for w in range(len(p)):
                if w in (u, v):
                    continue
                t = float((p[w] - p[u]) @ d) / L2
                if TOL_FEAS < t < 1 - TOL_FEAS:
                    dist = abs(d[0] * (p[w, 1] - p[u, 1]) - d[1] * (p[w, 0] - p[u, 0])) / np.sqrt(L2)
                    if dist <= TOL_FEAS:
                        on.append((t, w))
            chain = [u] + [w for _, w in sorted(on)] + [v]
            for a, b in zip(chain, chain[1:]):
                out.add((min(a, b), max(a, b)))
    return sorted(out)


def steiner_points(boundary: ConvexPolygon, obstacles: Sequence[ConvexPolygon], spacing: float) -> np.ndarray:
    """Hexagonal lattice of interior points kept at least ``spacing / 2`` from all walls."""
    if spacing <= 0:
        raise InputError("steiner spacing must be positive")
    lo = boundary.vertices.min(axis=0)
    hi = boundary.vertices.max(axis=0)
    bpoly = polygon_to_polytope(boundary)
    clear = 0.5 * spacing
    pts = []
    dy = spacing * np.sqrt(3) / 2
    for r, y in enumerate(np.arange(lo[1] + dy / 2, hi[1], dy)):
        off = 0.5 * spacing if r % 2 else 0.0
        for x in np.arange(lo[0] + off + spacing / 2, hi[0], spacing):
            q = np.array([x, y])
            if np.min(bpoly.slack(q)) < clear:
                continue
            if any(point_polygon_distance(q, ob) < clear for ob in obstacles):
                continue
            pts.append(q)
    return np.array(pts).reshape(-1, 2)


def _constrained_delaunay(pts: np.ndarray, constraints: list[tuple[int, int]]) -> _Mesh:
    n = len(pts)
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    center = (lo + hi) / 2
    R = max(float(np.max(hi - lo)), 1.0)
    ang = np.deg2rad([90.0, 210.0, 330.0])
    sup = center + 20 * R * np.column_stack([np.cos(ang), np.sin(ang)])
    allp = np.vstack([pts, sup])
    tri = Delaunay(allp)
    if len(tri.coplanar):
        raise GeometryError("triangulation dropped near-duplicate vertices")
    mesh = _Mesh(allp)
    for a, b, c in tri.simplices:
        mesh.add(int(a), int(b), int(c))

    otol = 1e-14 * R * R
    cset = set(constraints)
    for u, v in constraints:
        if mesh.has_edge(u, v):
            continue
        queue = deque(e for e in mesh.undirected_edges() if _crosses(allp, e[0], e[1], u, v, otol))
        guard = 0
        while queue:
            guard += 1
            if guard > 100000:
                raise GeometryError(f"failed to recover constraint edge {u}-{v}")
            a, b = queue.popleft()
            if (a, b) not in mesh.opp:
                a, b = b, a
            c, d = mesh.opp[(a, b)], mesh.opp[(b, a)]
            if _orient(allp, c, d, a) * _orient(allp, c, d, b) < 0:
                mesh.flip(a, b)
                if _crosses(allp, c, d, u, v, otol):
                    queue.append((c, d))
            else:
                queue.append((a, b))
        if not mesh.has_edge(u, v):
            raise GeometryError(f"failed to recover constraint edge {u}-{v}")

    ctol = 1e-12 * R**4
    stack = [e for e in mesh.undirected_edges() if e not in cset]
    while stack:
        a, b = stack.pop()
        if (min(a, b), max(a, b)) in cset or (a, b) not in mesh.opp or (b, a) not in mesh.opp:
            continue
        c, d = mesh.opp[(a, b)], mesh.opp[(b, a)]
        if _incircle(allp, a, b, c, d) > ctol:
            mesh.flip(a, b)
            stack.extend([(a, d), (d, b), (b, c), (c, a)])
    mesh.n_real = n
    return mesh


def triangulate_free_space(w: Workspace, steiner_spacing: Optional[float] = None) -> CellGraph:
    """Constrained triangulation of free space as a ``CellGraph`` of triangles.

    Obstacle and boundary edges are always cell facets. ``steiner_spacing``
    adds a lattice of interior vertices for better-shaped cells; without it the
    only vertices are the polygon corners.
    """
    w.check_endpoints()
    loops = [w.boundary.vertices] + [o.vertices for o in w.obstacles]
    extra = steiner_points(w.boundary, w.obstacles, steiner_spacing) if steiner_spacing else np.zeros((0, 2))
    pts, iloops = _merge_vertices(loops, extra)
    constraints = _split_constraints(pts, iloops)
    mesh = _constrained_delaunay(pts, constraints)

    bpoly = polygon_to_polytope(w.boundary)
    opolys = [polygon_to_polytope(o) for o in w.obstacles]
    kept = []
    for a, b, c in mesh.triangles():
        if max(a, b, c) >= mesh.n_real:
            continue
        cen = (pts[a] + pts[b] + pts[c]) / 3
        if np.max(bpoly.H @ cen - bpoly.b) > 0:
            continue
        if any(np.max(P.H @ cen - P.b) < 0 for P in opolys):
            continue
        if signed_area(pts[[a, b, c]]) <= TOL_CONSTRUCT:
            raise GeometryError("degenerate triangle in decomposition")
        r = int(np.argmin((a, b, c)))
        kept.append(tuple(np.roll((a, b, c), -r).tolist()))
    kept.sort()
    tris = np.array(kept, dtype=int).reshape(-1, 3)

    cells = []
    owner: dict[tuple[int, int], list[tuple[int, int]]] = {}
    for ci, (a, b, c) in enumerate(tris):
        edges = [(a, b), (b, c), (c, a)]
        tags = tuple(f"v{min(e)}-v{max(e)}" for e in edges)
        cells.append(polygon_to_polytope(ConvexPolygon(pts[[a, b, c]]), tags))
        for k, e in enumerate(edges):
            owner.setdefault((min(e), max(e)), []).append((ci, k))
    adj = []
    for key in sorted(owner):
        sides = owner[key]
        if len(sides) == 2:
            (i, fi), (j, fj) = sorted(sides)
            seg = shared_facet(cells[i], cells[j])
            if seg is None:
                continue
            adj.append(Adjacency(i, j, SharedFacet(fi, fj, seg.p, seg.q)))
    adj.sort(key=lambda e: (e.i, e.j))
    verts = pts.copy()
    verts.setflags(write=False)
    tris.setflags(write=False)
    return CellGraph(tuple(cells), tuple(adj), verts, tris)


# --------------------------------------------------------------------------
# search
# --------------------------------------------------------------------------


def locate_cell(g: CellGraph, x) -> int:
    """Lowest-index cell containing ``x`` (1e-9 tolerance)."""
    x = as_point(x)
    for k, c in enumerate(g.cells):
        if contains(c, x, TOL_FEAS):
            return k
    raise PointNotInFreeSpaceError(f"point {tuple(x)} is not in any free-space cell")


def margin_fits(cell: Polytope, epsilon: float) -> bool:
    """Whether the cell shrunk by ``epsilon`` on every facet keeps positive area."""
    return polytope_area(cell.with_offsets(cell.b - epsilon)) > 1e-9


def facet_passable(g: CellGraph, i: int, j: int, epsilon: float) -> bool:
    """Whether a junction point fits on the i|j facet, ``epsilon`` clear of every other facet of both cells."""
    fi, fj = g.facet_between(i, j)
    a, b = g.cells[i], g.cells[j]
    ba = a.b - epsilon
    ba[fi] = a.b[fi]
    bb = b.b - epsilon
    bb[fj] = b.b[fj]
    return facet_segment(a.with_offsets(ba), fi, [b.with_offsets(bb)]) is not None


def find_channel(g: CellGraph, start, goal, epsilon: Optional[float] = None) -> Channel:
    """A* over cell adjacency with centroid-to-centroid edge cost.

    Ties in cost resolve to the lexicographically smaller cell sequence. When
    ``epsilon`` is given the search is margin-aware: intermediate cells too
    thin to hold a control point behind the margin on every facet are skipped,
    and so are facets too short for a junction point. The start and goal cells
    are always kept so that an unusable endpoint cell is reported downstream
    by name.
    """
    s = locate_cell(g, start)
    t = locate_cell(g, goal)
    cen = g.centroids
    usable: dict[int, bool] = {}

    def ok(k):
        if epsilon is None or k in (s, t):
            return True
        if k not in usable:
            usable[k] = margin_fits(g.cells[k], epsilon)
        return usable[k]

    def h(k):
        return float(np.linalg.norm(cen[k] - cen[t]))

    heap = [(h(s), (s,), 0.0)]
    closed = set()
    while heap:
        f, path, gcost = heapq.heappop(heap)
        k = path[-1]
        if k in closed:
            continue
        closed.add(k)
        if k == t:
            entry = [None] + [g.facet_between(path[m], path[m - 1])[0] for m in range(1, len(path))]
            exit_ = [g.facet_between(path[m], path[m + 1])[0] for m in range(len(path) - 1)] + [None]
            return Channel(tuple(path), tuple(entry), tuple(exit_))
        for j, _, _ in g.neighbors(k):
            if j in closed or not ok(j):
                continue
            if epsilon is not None and not facet_passable(g, k, j, epsilon):
                continue
            gj = gcost + float(np.linalg.norm(cen[j] - cen[k]))
            heapq.heappush(heap, (gj + h(j), path + (j,), gj))
    raise NoChannelError(f"no channel connects cell {s} to cell {t}")
