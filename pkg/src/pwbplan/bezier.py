"""Quadratic Bezier segments, piece-wise paths and their metrics."""

from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Sequence

import numpy as np

from .errors import InputError
from .geometry import as_point, cross2

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0
_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


class CuspError(InputError):
    """Curvature requested where the curve has (near) zero speed."""


class ContinuityError(InputError):
    pass


def bernstein(n: int, i: int, t):
    if not 0 <= i <= n:
        raise ValueError(f"Bernstein index {i} outside 0..{n}")
    t = np.asarray(t, dtype=float)
    return comb(n, i) * (1.0 - t) ** (n - i) * t**i


@dataclass(frozen=True, eq=False)
class BezierSegment:
    p0: np.ndarray
    p1: np.ndarray
    p2: np.ndarray

    def __post_init__(self):
        for name in ("p0", "p1", "p2"):
            v = as_point(getattr(self, name))
            v.setflags(write=False)
            object.__setattr__(self, name, v)

    @classmethod
    def from_array(cls, pts) -> "BezierSegment":
        pts = np.asarray(pts, dtype=float).reshape(3, 2)
        return cls(pts[0], pts[1], pts[2])

    @property
    def control_points(self) -> np.ndarray:
        return np.array([self.p0, self.p1, self.p2])

    def transformed(self, M, v=(0.0, 0.0)) -> "BezierSegment":
        M = np.asarray(M, dtype=float)
        return BezierSegment.from_array(self.control_points @ M.T + np.asarray(v, dtype=float))


def _check_t(t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0.0) or np.any(t > 1.0) or not np.all(np.isfinite(t)):
        raise ValueError("t must lie in [0, 1]")
    return t


def evaluate(s: BezierSegment, t):
    """Point(s) on the segment; ``t`` may be a scalar or an array."""
    t = _check_t(t)
    u = 1.0 - t
    out = np.multiply.outer(u * u, s.p0) + np.multiply.outer(2 * u * t, s.p1) + np.multiply.outer(t * t, s.p2)
    return out


def derivative(s: BezierSegment, t):
    t = _check_t(t)
    return np.multiply.outer(2 * (1.0 - t), s.p1 - s.p0) + np.multiply.outer(2 * t, s.p2 - s.p1)


def second_derivative(s: BezierSegment) -> np.ndarray:
    return 2.0 * (s.p2 - 2.0 * s.p1 + s.p0)


def _min_speed_t(s: BezierSegment) -> float:
    # B'(t) = a + t*dd is linear, so |B'| is minimized at the clamped projection.
    a = 2.0 * (s.p1 - s.p0)
    dd = second_derivative(s)
    den = float(dd @ dd)
    if den == 0.0:
        return 0.0
    return float(np.clip(-(a @ dd) / den, 0.0, 1.0))


def _speed_floor(s: BezierSegment) -> float:
    scale = max(1.0, float(np.abs(s.control_points).max()))
    return 1e-12 * scale


def curvature(s: BezierSegment, t):
    """Unsigned curvature ``|B' x B''| / |B'|^3`` in 1/m."""
    d1 = derivative(s, t)
    speed = np.linalg.norm(d1, axis=-1)
    if np.any(speed <= _speed_floor(s)):
        raise CuspError("curve speed vanishes; curvature undefined")
    return np.abs(cross2(d1, second_derivative(s))) / speed**3


def max_curvature(s: BezierSegment) -> tuple[float, float]:
    """``(t*, kappa_max)``: 1001-point grid, then golden-section refinement to 1e-9 in t."""
    ts = _min_speed_t(s)
    if np.linalg.norm(derivative(s, ts)) <= _speed_floor(s):
        raise CuspError("curve has a cusp")
    grid = np.linspace(0.0, 1.0, 1001)
    k = curvature(s, grid)
    i = int(np.argmax(k))
    if k[i] == 0.0:
        return 0.0, 0.0
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, 1000)]
    f = lambda t: float(curvature(s, t))  # noqa: E731
    x1 = hi - GOLDEN * (hi - lo)
    x2 = lo + GOLDEN * (hi - lo)
    f1, f2 = f(x1), f(x2)
    while hi - lo > 1e-9:
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + GOLDEN * (hi - lo)
            f2 = f(x2)
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - GOLDEN * (hi - lo)
            f1 = f(x1)
    cands = [(k[i], grid[i]), (f1, x1), (f2, x2)]
    best_k, best_t = max(cands)
    return float(best_t), float(best_k)


def max_curvature_analytic(s: BezierSegment) -> tuple[float, float]:
    """Closed form: ``|B' x B''|`` is constant, so curvature peaks where speed is smallest."""
    t = _min_speed_t(s)
    return t, float(curvature(s, t))


def _gl(s: BezierSegment, a: float, b: float) -> float:
    t = 0.5 * (b - a) * _GL_X + 0.5 * (a + b)
    return 0.5 * (b - a) * float(_GL_W @ np.linalg.norm(derivative(s, t), axis=-1))


def arc_length(s: BezierSegment, tol: float = 1e-9) -> float:
    """Length by adaptive 16-point Gauss-Legendre with interval halving."""

    def rec(a, b, whole, tol, depth):
        m = 0.5 * (a + b)
        left, right = _gl(s, a, m), _gl(s, m, b)
        if abs(left + right - whole) <= tol or depth >= 40:
            return left + right
        return rec(a, m, left, tol / 2, depth + 1) + rec(m, b, right, tol / 2, depth + 1)

    return rec(0.0, 1.0, _gl(s, 0.0, 1.0), tol, 0)


@dataclass(frozen=True, eq=False)
class PwbPath:
    """Chain of quadratic segments with C0 and C1 junctions."""

    segments: tuple

    def __post_init__(self):
        segs = tuple(self.segments)
        if not segs:
            raise InputError("a path needs at least one segment")
        object.__setattr__(self, "segments", segs)
        c0, c1 = self.junction_residuals()
        if c0 > 1e-9 or c1 > 1e-6:
            raise ContinuityError(f"junction residuals C0={c0:.3g}, C1={c1:.3g} exceed 1e-9 / 1e-6")

    @classmethod
    def from_control_points(cls, pts) -> "PwbPath":
        pts = np.asarray(pts, dtype=float).reshape(-1, 3, 2)
        return cls(tuple(BezierSegment.from_array(p) for p in pts))

    @property
    def control_points(self) -> np.ndarray:
        return np.array([s.control_points for s in self.segments])

    @property
    def start(self) -> np.ndarray:
        return self.segments[0].p0

    @property
    def end(self) -> np.ndarray:
        return self.segments[-1].p2

    def junction_residuals(self) -> tuple[float, float]:
        c0 = c1 = 0.0
        for a, b in zip(self.segments, self.segments[1:]):
            c0 = max(c0, float(np.linalg.norm(a.p2 - b.p0)))
            c1 = max(c1, float(np.linalg.norm((a.p2 - a.p1) - (b.p1 - b.p0))))
        return c0, c1

    def sample(self, per_segment: int) -> np.ndarray:
        t = np.linspace(0.0, 1.0, per_segment)
        return np.concatenate([evaluate(s, t) for s in self.segments])

    def __len__(self):
        return len(self.segments)


@dataclass(frozen=True, eq=False)
class PolylinePath:
    points: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.points, dtype=float).reshape(-1, 2)
        if len(p) < 2:
            raise InputError("a polyline needs at least two points")
        p.setflags(write=False)
        object.__setattr__(self, "points", p)

    @property
    def start(self) -> np.ndarray:
        return self.points[0]

    @property
    def end(self) -> np.ndarray:
        return self.points[-1]

    @property
    def length(self) -> float:
        return float(np.linalg.norm(np.diff(self.points, axis=0), axis=1).sum())


@dataclass(frozen=True)
class PathMetrics:
    length: float
    max_curvature: float


def path_metrics(path: PwbPath | PolylinePath | Sequence[BezierSegment]) -> PathMetrics:
    """Total length and largest curvature; a polyline has zero curvature between corners."""
    if isinstance(path, PolylinePath):
        return PathMetrics(path.length, 0.0)
    segs = path.segments if isinstance(path, PwbPath) else tuple(path)
    return PathMetrics(
        length=float(sum(arc_length(s) for s in segs)),
        max_curvature=max(max_curvature(s)[1] for s in segs),
    )
