"""Kinematic bicycle robot tracking a reference path with Pure-Pursuit.

The reference is resampled at a fixed arc-length spacing; the look-ahead is a
number of samples ahead of the nearest sample. The robot drives at constant
speed, steering is held over each RK4 step.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .bezier import PolylinePath, PwbPath, derivative, evaluate, path_metrics
from .errors import InputError


def wrap_angle(a):
    """Wrap to (-pi, pi]."""
    w = np.mod(np.asarray(a, dtype=float) + np.pi, 2 * np.pi) - np.pi
    w = np.where(w == -np.pi, np.pi, w)
    return float(w) if np.ndim(w) == 0 else w


@dataclass(frozen=True)
class RobotState:
    x: float
    y: float
    heading: float
    time: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "heading", wrap_angle(self.heading))

    @property
    def position(self) -> np.ndarray:
        return np.array([self.x, self.y])


@dataclass(frozen=True)
class SimConfig:
    v_max: float = 1.0
    steer_max: float = float(np.deg2rad(35.0))
    lookahead_steps: int = 15
    # tan(35 deg) / 0.35 ~= 2.0 rad/m, the saturation curvature reported for every planner
    wheelbase: float = 0.35
    dt: float = 0.01
    sample_spacing: float = 0.05
    goal_tolerance: float = 0.05

    def __post_init__(self):
        for name in ("v_max", "steer_max", "wheelbase", "dt", "sample_spacing", "goal_tolerance"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise InputError(f"{name} must be positive, got {v}")
        if self.steer_max >= np.pi / 2:
            raise InputError("steer_max must be below 90 degrees")
        if int(self.lookahead_steps) != self.lookahead_steps or self.lookahead_steps < 1:
            raise InputError("lookahead_steps must be a positive integer")

    @property
    def max_curvature(self) -> float:
        """Tightest curvature the steering limit allows."""
        return float(np.tan(self.steer_max) / self.wheelbase)

    def with_(self, **kw) -> "SimConfig":
        return replace(self, **kw)


@dataclass(frozen=True, eq=False)
class SimResult:
    trajectory: np.ndarray  # (n, 4): time, x, y, heading
    execution_time: float
    max_deviation: float
    max_reference_curvature: float
    saturation_curvature: float
    reached_goal: bool
    steering: np.ndarray = field(default_factory=lambda: np.zeros(0))
    wheelbase: float = 0.35

    @property
    def max_steering_curvature(self) -> float:
        """Largest commanded path curvature, ``tan(delta) / wheelbase``."""
        return float(np.max(np.abs(np.tan(self.steering)))) / self.wheelbase if len(self.steering) else 0.0


def discretize_reference(path, spacing: float) -> np.ndarray:
    """Points every ``spacing`` meters of arc length, both ends included exactly.

    The number of intervals is ``round(length / spacing)``, so the actual
    spacing is within half an interval of the request.
    """
    if spacing <= 0:
        raise InputError("spacing must be positive")
    if isinstance(path, PwbPath):
        dense = _dense_bezier(path)
    else:
        pts = path.points if isinstance(path, PolylinePath) else np.asarray(path, dtype=float).reshape(-1, 2)
        dense = pts
    seg = np.linalg.norm(np.diff(dense, axis=0), axis=1)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    total = s[-1]
    if total <= 1e-12:
        raise InputError("reference path has zero length")
    n = max(1, int(round(total / spacing)))
    targets = np.linspace(0.0, total, n + 1)
    out = np.column_stack([np.interp(targets, s, dense[:, 0]), np.interp(targets, s, dense[:, 1])])
    out[0], out[-1] = dense[0], dense[-1]
    return out


def _dense_bezier(path: PwbPath, per_meter: int = 2000) -> np.ndarray:
    """Fine polyline through each segment; chord error is far below the sample spacing."""
    chunks = []
    for k, s in enumerate(path.segments):
        approx = float(np.linalg.norm(s.p1 - s.p0) + np.linalg.norm(s.p2 - s.p1))
        m = max(50, int(approx * per_meter))
        t = np.linspace(0.0, 1.0, m + 1)
        pts = evaluate(s, t)
        chunks.append(pts if k == 0 else pts[1:])
    return np.concatenate(chunks)


def nearest_index(samples: np.ndarray, pos, lo: int = 0, hi: Optional[int] = None) -> int:
    hi = len(samples) if hi is None else min(hi, len(samples))
    d = np.linalg.norm(samples[lo:hi] - pos, axis=1)
    return lo + int(np.argmin(d))


def pure_pursuit_step(state: RobotState, samples: np.ndarray, cfg: SimConfig, nearest: Optional[int] = None):
    """Steering angle and target sample index for one control step."""
    samples = np.asarray(samples, dtype=float)
    if len(samples) == 0:
        raise InputError("no reference samples")
    if nearest is None:
        nearest = nearest_index(samples, state.position)
    target = min(nearest + int(cfg.lookahead_steps), len(samples) - 1)
    dx, dy = samples[target] - state.position
    Ld = float(np.hypot(dx, dy))
    if Ld <= 1e-12:
        return 0.0, target
    alpha = wrap_angle(np.arctan2(dy, dx) - state.heading)
    delta = float(np.arctan2(2.0 * cfg.wheelbase * np.sin(alpha), Ld))
    return float(np.clip(delta, -cfg.steer_max, cfg.steer_max)), target


def _rhs(z, v, L, delta):
    return np.array([v * np.cos(z[2]), v * np.sin(z[2]), v / L * np.tan(delta)])


def rk4_step(z: np.ndarray, v: float, L: float, delta: float, dt: float) -> np.ndarray:
    k1 = _rhs(z, v, L, delta)
    k2 = _rhs(z + 0.5 * dt * k1, v, L, delta)
    k3 = _rhs(z + 0.5 * dt * k2, v, L, delta)
    k4 = _rhs(z + dt * k3, v, L, delta)
    return z + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


def distance_to_polyline(points: np.ndarray, poly: np.ndarray) -> np.ndarray:
    """Euclidean distance from each point to the polyline (not just its vertices)."""
    points = np.atleast_2d(points)
    a = poly[:-1]
    d = poly[1:] - a
    L2 = np.einsum("ij,ij->i", d, d)
    L2 = np.where(L2 == 0, 1.0, L2)
    out = np.empty(len(points))
    for k, p in enumerate(points):
        t = np.clip(np.einsum("ij,ij->i", p - a, d) / L2, 0.0, 1.0)
        proj = a + t[:, None] * d
        out[k] = np.sqrt(np.min(np.einsum("ij,ij->i", p - proj, p - proj)))
    return out


def _initial_heading(path, samples) -> float:
    if isinstance(path, PwbPath):
        s = path.segments[0]
        d = derivative(s, 0.0)
        if np.linalg.norm(d) > 1e-12:
            return float(np.arctan2(d[1], d[0]))
    d = samples[1] - samples[0]
    return float(np.arctan2(d[1], d[0]))


def _reference_curvature(path) -> float:
    if isinstance(path, PwbPath):
        return path_metrics(path).max_curvature
    # polyline corners have unbounded curvature
    pts = path.points if isinstance(path, PolylinePath) else np.asarray(path)
    d = np.diff(pts, axis=0)
    turns = np.abs(np.diff(np.unwrap(np.arctan2(d[:, 1], d[:, 0]))))
    return float(np.inf) if np.any(turns > 1e-9) else 0.0


def simulate(path, cfg: SimConfig = SimConfig()) -> SimResult:
    samples = discretize_reference(path, cfg.sample_spacing)
    length = float(np.linalg.norm(np.diff(samples, axis=0), axis=1).sum())
    budget = 10.0 * length / cfg.v_max
    goal = samples[-1]
    z = np.array([samples[0, 0], samples[0, 1], _initial_heading(path, samples)])
    t = 0.0
    traj = [(t, z[0], z[1], wrap_angle(z[2]))]
    steer = []
    nearest = 0
    window = 4 * int(cfg.lookahead_steps) + 10
    reached = False
    n_last = len(samples) - 1
    while t < budget:
        nearest = nearest_index(samples, z[:2], nearest, nearest + window)
        state = RobotState(z[0], z[1], z[2], t)
        if nearest >= n_last - cfg.lookahead_steps and np.linalg.norm(z[:2] - goal) <= cfg.goal_tolerance:
            reached = True
            break
        delta, _ = pure_pursuit_step(state, samples, cfg, nearest)
        steer.append(delta)
        z = rk4_step(z, cfg.v_max, cfg.wheelbase, delta, cfg.dt)
        t += cfg.dt
        traj.append((t, z[0], z[1], wrap_angle(z[2])))
    traj = np.array(traj)
    dev = distance_to_polyline(traj[:, 1:3], samples)
    return SimResult(
        trajectory=traj,
        execution_time=float(traj[-1, 0]),
        max_deviation=float(dev.max()),
        max_reference_curvature=_reference_curvature(path),
        saturation_curvature=cfg.max_curvature,
        reached_goal=reached,
        steering=np.array(steer),
        wheelbase=cfg.wheelbase,
    )
