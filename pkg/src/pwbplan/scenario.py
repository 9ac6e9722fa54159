"""Scenario files (JSON) and randomized workspaces.

A scenario file looks like::

    {
      "boundary": [[0, 0], [10, 0], [10, 8], [0, 8]],
      "obstacles": [[[2, 2], [3, 2], [3, 3]]],
      "start": [0.5, 0.5],
      "goal": [9.5, 7.5],
      "epsilon": 0.2,
      "lambda": 10,
      "sim": {"v_max": 1.0, "steer_max_deg": 35, "lookahead_steps": 15}
    }

Coordinates are meters; the steering limit is the only angle and is given in
degrees. Unknown keys are rejected.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Optional

import numpy as np

from .decomposition import NoChannelError, Workspace, find_channel, locate_cell, triangulate_free_space
from .errors import InputError
from .geometry import ConvexPolygon, GeometryError, contains, point_polygon_distance
from .planners import DEFAULT_EPSILON, DEFAULT_LAMBDA
from .simulator import SimConfig

TOP_KEYS = {"name", "description", "boundary", "obstacles", "start", "goal", "epsilon", "lambda", "sim", "steiner_spacing"}
SIM_KEYS = {"v_max", "steer_max_deg", "lookahead_steps", "wheelbase", "dt", "sample_spacing", "goal_tolerance"}
BUNDLED = ("sparse", "narrow", "margin_too_large")


class ScenarioParseError(InputError):
    pass


class ScenarioValidationError(InputError):
    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("invalid scenario: " + "; ".join(self.violations))


@dataclass(frozen=True, eq=False)
class Scenario:
    workspace: Workspace
    epsilon: float = DEFAULT_EPSILON
    lam: float = DEFAULT_LAMBDA
    sim: SimConfig = field(default_factory=SimConfig)
    steiner_spacing: Optional[float] = None
    name: str = ""
    description: str = ""


def _points(val, what: str, problems: list[str]) -> Optional[np.ndarray]:
    try:
        a = np.asarray(val, dtype=float)
    except (TypeError, ValueError):
        problems.append(f"{what}: expected a list of [x, y] pairs")
        return None
    if a.ndim != 2 or a.shape[1] != 2 or not np.all(np.isfinite(a)):
        problems.append(f"{what}: expected a list of finite [x, y] pairs")
        return None
    return a


def _point(val, what: str, problems: list[str]) -> Optional[np.ndarray]:
    try:
        a = np.asarray(val, dtype=float)
    except (TypeError, ValueError):
        a = None
    if a is None or a.shape != (2,) or not np.all(np.isfinite(a)):
        problems.append(f"{what}: expected a finite [x, y] pair")
        return None
    return a


def _positive(val, what: str, problems: list[str]) -> Optional[float]:
    if isinstance(val, bool) or not isinstance(val, (int, float)) or not np.isfinite(val) or val <= 0:
        problems.append(f"{what}: must be a positive number, got {val!r}")
        return None
    return float(val)


def scenario_from_dict(data: dict[str, Any]) -> Scenario:
    """Validate a decoded scenario; every violation found is reported together."""
    if not isinstance(data, dict):
        raise ScenarioValidationError(["top level must be a JSON object"])
    problems: list[str] = []
    unknown = sorted(set(data) - TOP_KEYS)
    if unknown:
        problems.append(f"unknown fields: {', '.join(unknown)}")
    for key in ("boundary", "start", "goal"):
        if key not in data:
            problems.append(f"missing field: {key}")

    boundary = obstacles = None
    if "boundary" in data:
        pts = _points(data["boundary"], "boundary", problems)
        if pts is not None:
            try:
                boundary = ConvexPolygon(pts)
            except GeometryError as exc:
                problems.append(f"boundary: {exc}")
    obstacles = []
    for k, ob in enumerate(data.get("obstacles", [])):
        pts = _points(ob, f"obstacles[{k}]", problems)
        if pts is not None:
            try:
                obstacles.append(ConvexPolygon(pts))
            except GeometryError as exc:
                problems.append(f"obstacles[{k}]: {exc}")
    start = _point(data["start"], "start", problems) if "start" in data else None
    goal = _point(data["goal"], "goal", problems) if "goal" in data else None
    eps = _positive(data.get("epsilon", DEFAULT_EPSILON), "epsilon", problems)
    lam = _positive(data.get("lambda", DEFAULT_LAMBDA), "lambda", problems)
    steiner = data.get("steiner_spacing")
    if steiner is not None:
        steiner = _positive(steiner, "steiner_spacing", problems)

    sim = SimConfig()
    raw_sim = data.get("sim", {})
    if not isinstance(raw_sim, dict):
        problems.append("sim: must be an object")
        raw_sim = {}
    bad_sim = sorted(set(raw_sim) - SIM_KEYS)
    if bad_sim:
        problems.append(f"unknown sim fields: {', '.join(bad_sim)}")
    kw = {}
    for key in sorted(SIM_KEYS & set(raw_sim)):
        v = _positive(raw_sim[key], f"sim.{key}", problems)
        if v is None:
            continue
        if key == "steer_max_deg":
            kw["steer_max"] = float(np.deg2rad(v))
        elif key == "lookahead_steps":
            if int(v) != v:
                problems.append("sim.lookahead_steps: must be an integer")
                continue
            kw[key] = int(v)
        else:
            kw[key] = v
    try:
        sim = SimConfig(**kw)
    except InputError as exc:
        problems.append(f"sim: {exc}")

    ws = None
    if boundary is not None and start is not None and goal is not None and not problems:
        try:
            ws = Workspace(boundary, tuple(obstacles), start, goal)
        except GeometryError as exc:
            problems.append(str(exc))
        else:
            for name, x in (("start", ws.start), ("goal", ws.goal)):
                if not ws.point_in_free_space(x):
                    problems.append(f"{name} {list(x)} is not in free space")
    if problems:
        raise ScenarioValidationError(problems)
    return Scenario(
        workspace=ws,
        epsilon=eps,
        lam=lam,
        sim=sim,
        steiner_spacing=steiner,
        name=str(data.get("name", "")),
        description=str(data.get("description", "")),
    )


def parse_scenario(text: str, source: str = "<string>") -> Scenario:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioParseError(f"{source}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return scenario_from_dict(data)


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioParseError(f"cannot read {path}: {exc.strerror}") from exc
    sc = parse_scenario(text, str(path))
    if not sc.name:
        object.__setattr__(sc, "name", path.stem)
    return sc


def bundled_path(name: str) -> Path:
    if name not in BUNDLED:
        raise InputError(f"no bundled scenario {name!r}; have {BUNDLED}")
    return Path(str(resources.files("pwbplan") / "data" / f"{name}.json"))


def load_bundled(name: str) -> Scenario:
    return load_scenario(bundled_path(name))


def scenario_to_dict(sc: Scenario) -> dict[str, Any]:
    w = sc.workspace
    cfg = sc.sim
    out: dict[str, Any] = {}
    if sc.name:
        out["name"] = sc.name
    if sc.description:
        out["description"] = sc.description
    out.update(
        boundary=w.boundary.vertices.tolist(),
        obstacles=[o.vertices.tolist() for o in w.obstacles],
        start=w.start.tolist(),
        goal=w.goal.tolist(),
        epsilon=sc.epsilon,
        **{"lambda": sc.lam},
        sim={
            "v_max": cfg.v_max,
            "steer_max_deg": float(np.rad2deg(cfg.steer_max)),
            "lookahead_steps": cfg.lookahead_steps,
            "wheelbase": cfg.wheelbase,
            "dt": cfg.dt,
            "sample_spacing": cfg.sample_spacing,
            "goal_tolerance": cfg.goal_tolerance,
        },
    )
    if sc.steiner_spacing is not None:
        out["steiner_spacing"] = sc.steiner_spacing
    return out


# --------------------------------------------------------------------------
# random workspaces
# --------------------------------------------------------------------------


def _random_obstacle(rng: np.random.Generator, center, radius) -> Optional[ConvexPolygon]:
    k = int(rng.integers(3, 7))
    ang = np.sort(rng.uniform(0, 2 * np.pi) + 2 * np.pi * (np.arange(k) + rng.uniform(-0.2, 0.2, k)) / k)
    r = radius * rng.uniform(0.75, 1.0, k)
    pts = np.column_stack([center[0] + r * np.cos(ang), center[1] + r * np.sin(ang)])
    # short obstacle edges only produce cells too thin for the margin
    if np.min(np.linalg.norm(np.roll(pts, -1, axis=0) - pts, axis=1)) < 0.5:
        return None
    return ConvexPolygon(pts)


def random_workspace(
    seed: int,
    n_obstacles: Optional[int] = None,
    size: float = 12.0,
    epsilon: float = DEFAULT_EPSILON,
    steiner_spacing: Optional[float] = None,
    max_tries: int = 2000,
) -> Workspace:
    """Square workspace with 3-8 random convex obstacles and far-apart start/goal.

    Obstacles keep 1 m from each other and from the walls. Start and goal are
    redrawn until each sits ``epsilon`` inside its own cell and a margin-aware
    channel joins them; these are preconditions of planning, not of any
    particular planner.
    """
    rng = np.random.default_rng(seed)
    if n_obstacles is None:
        n_obstacles = int(rng.integers(3, 9))
    boundary = ConvexPolygon(np.array([[0, 0], [size, 0], [size, size], [0, size]], dtype=float))
    obstacles: list[ConvexPolygon] = []
    disks: list[tuple[np.ndarray, float]] = []
    gap = 1.0
    for _ in range(max_tries):
        if len(obstacles) == n_obstacles:
            break
        r = float(rng.uniform(0.6, 1.3))
        c = rng.uniform(r + gap, size - r - gap, 2)
        if any(np.linalg.norm(c - c2) < r + r2 + gap for c2, r2 in disks):
            continue
        ob = _random_obstacle(rng, c, r)
        if ob is not None:
            disks.append((c, r))
            obstacles.append(ob)
    if len(obstacles) < n_obstacles:
        raise InputError(f"could not place {n_obstacles} obstacles")

    corner = boundary.vertices[0]
    probe = Workspace(boundary, tuple(obstacles), corner, corner)
    g = triangulate_free_space(probe, steiner_spacing)

    def good(x):
        if any(point_polygon_distance(x, o) < 0.5 for o in obstacles):
            return False
        cell = g.cells[locate_cell(g, x)]
        return contains(cell.with_offsets(cell.b - epsilon), x, 0.0)

    for _ in range(max_tries):
        s = rng.uniform(0.5, size - 0.5, 2)
        t = rng.uniform(0.5, size - 0.5, 2)
        if np.linalg.norm(s - t) < 0.5 * size or not (good(s) and good(t)):
            continue
        try:
            find_channel(g, s, t, epsilon=epsilon)
        except NoChannelError:
            continue
        return Workspace(boundary, tuple(obstacles), s, t)
    raise InputError("could not place start and goal")


def random_scenario(seed: int, **kw) -> Scenario:
    ws = random_workspace(seed, **kw)
    return Scenario(ws, steiner_spacing=kw.get("steiner_spacing"), name=f"random-{seed}")
