"""Deterministic SVG overlays of workspaces, cells, safe polytopes and paths."""

from __future__ import annotations

from typing import Iterable, Optional, Sequence
from xml.sax.saxutils import quoteattr

import numpy as np

from .bezier import PolylinePath, PwbPath, evaluate
from .decomposition import CellGraph, Workspace
from .geometry import UnboundedError, polytope_vertices

STYLE = """
.boundary { fill: #ffffff; stroke: #000000; stroke-width: 0.04 }
.obstacle { fill: #555555; stroke: none }
.cell { fill: none; stroke: #b0b0b0; stroke-width: 0.01 }
.channel { fill: #e8f0ff; stroke: #7090d0; stroke-width: 0.015 }
.safe-in { fill: none; stroke: #2a9d4a; stroke-width: 0.012; stroke-dasharray: 0.05 0.03 }
.safe-out { fill: none; stroke: #d08020; stroke-width: 0.012; stroke-dasharray: 0.03 0.05 }
.segment { fill: none; stroke: #c01010; stroke-width: 0.03 }
.waypoints { fill: none; stroke: #1030c0; stroke-width: 0.03 }
.control { fill: #c01010 }
.start { fill: #10a010 }
.goal { fill: #a01010 }
""".strip()


def _fmt(v: float) -> str:
    # fixed precision keeps the output byte-stable across platforms
    s = f"{v:.6f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def _pts(pts: np.ndarray) -> str:
    return " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in pts)


class SvgCanvas:
    """Collects elements in insertion order; y is flipped so +y points up."""

    def __init__(self, lo: Sequence[float], hi: Sequence[float], pad: float = 0.5, px_per_m: float = 50.0):
        self.lo = np.asarray(lo, dtype=float) - pad
        self.hi = np.asarray(hi, dtype=float) + pad
        self.px_per_m = px_per_m
        self.items: list[str] = []

    def polygon(self, pts, cls: str, ident: Optional[str] = None):
        extra = f" id={quoteattr(ident)}" if ident else ""
        self.items.append(f'<polygon class="{cls}"{extra} points="{_pts(np.asarray(pts))}"/>')

    def polyline(self, pts, cls: str, ident: Optional[str] = None):
        extra = f" id={quoteattr(ident)}" if ident else ""
        self.items.append(f'<polyline class="{cls}"{extra} points="{_pts(np.asarray(pts))}"/>')

    def circle(self, c, r: float, cls: str):
        self.items.append(f'<circle class="{cls}" cx="{_fmt(c[0])}" cy="{_fmt(c[1])}" r="{_fmt(r)}"/>')

    def render(self) -> str:
        w, h = self.hi - self.lo
        head = (
            '<svg xmlns="http://www.w3.org/2000/svg" '
            f'width="{_fmt(w * self.px_per_m)}" height="{_fmt(h * self.px_per_m)}" '
            f'viewBox="{_fmt(self.lo[0])} {_fmt(-self.hi[1])} {_fmt(w)} {_fmt(h)}">'
        )
        body = "\n".join(self.items)
        return f'{head}\n<style>\n{STYLE}\n</style>\n<g transform="scale(1,-1)">\n{body}\n</g>\n</svg>\n'


def _canvas_for(w: Workspace) -> SvgCanvas:
    v = w.boundary.vertices
    return SvgCanvas(v.min(axis=0), v.max(axis=0))


def _draw_workspace(cv: SvgCanvas, w: Workspace):
    cv.polygon(w.boundary.vertices, "boundary")
    for k, o in enumerate(w.obstacles):
        cv.polygon(o.vertices, "obstacle", f"obstacle-{k}")


def _draw_cells(cv: SvgCanvas, g: CellGraph, channel: Iterable[int] = ()):
    chan = set(channel)
    for i, c in enumerate(g.cells):
        cv.polygon(polytope_vertices(c), "channel" if i in chan else "cell", f"cell-{i}")


def _draw_path(cv: SvgCanvas, path, per_segment: int = 50):
    if isinstance(path, PwbPath):
        t = np.linspace(0.0, 1.0, per_segment)
        for k, s in enumerate(path.segments):
            cv.polyline(evaluate(s, t), "segment", f"segment-{k}")
        for k, s in enumerate(path.segments):
            cv.circle(s.p1, 0.04, "control")
    elif isinstance(path, PolylinePath):
        cv.polyline(path.points, "waypoints", "waypoints")


def render_plan(w: Workspace, g: Optional[CellGraph] = None, channel=None, safe_pairs=(), path=None) -> str:
    """Workspace, then cells, then safe polytopes, then the path, then endpoints."""
    cv = _canvas_for(w)
    _draw_workspace(cv, w)
    if g is not None:
        _draw_cells(cv, g, channel.cell_indices if channel is not None else ())
    for k, pr in enumerate(safe_pairs):
        for name, poly in (("safe-in", pr.safe_in), ("safe-out", pr.safe_out)):
            try:
                v = polytope_vertices(poly)
            except UnboundedError:
                continue
            if len(v):
                cv.polygon(v, name, f"{name}-{k}")
    if path is not None:
        _draw_path(cv, path)
    cv.circle(w.start, 0.08, "start")
    cv.circle(w.goal, 0.08, "goal")
    return cv.render()
