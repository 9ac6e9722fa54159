"""Safe polytope pairs for the cells of a channel.

Each channel cell gets two shrunken copies. ``safe_in`` pulls every facet in
by the margin except the facet the path enters through; ``safe_out`` does the
same except for the exit facet. The first two control points of a segment live
in ``safe_in``, the last two in ``safe_out``, so segments can meet on the
shared facet while staying a full margin away from everything else.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .decomposition import CellGraph, Channel
from .errors import InfeasibleError, InputError
from .geometry import TOL_FEAS, Polytope, as_point, contains, polytope_area

MIN_SAFE_AREA = 1e-9


class MarginTooLargeError(InfeasibleError):
    def __init__(self, cell_index: int, detail: str = ""):
        self.cell_index = cell_index
        msg = f"safety margin leaves no room in cell {cell_index}"
        super().__init__(f"{msg}: {detail}" if detail else msg)


class EndpointInsideMarginError(InfeasibleError):
    def __init__(self, which: str, cell_index: int):
        self.which = which
        self.cell_index = cell_index
        super().__init__(f"{which} point is within the safety margin of cell {cell_index}")


@dataclass(frozen=True, eq=False)
class SafePair:
    base: Polytope
    b_safe_in: np.ndarray
    b_safe_out: np.ndarray
    epsilon: float
    cell_index: int = -1
    entry_facet: Optional[int] = None
    exit_facet: Optional[int] = None

    @property
    def safe_in(self) -> Polytope:
        return self.base.with_offsets(self.b_safe_in)

    @property
    def safe_out(self) -> Polytope:
        return self.base.with_offsets(self.b_safe_out)

    @property
    def shared_facets(self) -> tuple:
        return tuple(k for k in (self.entry_facet, self.exit_facet) if k is not None)

    def translated(self, v) -> "SafePair":
        shift = self.base.H @ as_point(v)
        return SafePair(
            self.base.translated(v),
            self.b_safe_in + shift,
            self.b_safe_out + shift,
            self.epsilon,
            self.cell_index,
            self.entry_facet,
            self.exit_facet,
        )


def make_safe_pair(
    cell: Polytope,
    epsilon: float,
    entry: Optional[int] = None,
    exit: Optional[int] = None,
    cell_index: int = -1,
) -> SafePair:
    if not epsilon >= 0:
        raise InputError("epsilon must be non-negative")
    b_in = cell.b - epsilon
    b_out = cell.b - epsilon
    if entry is not None:
        b_in[entry] = cell.b[entry]
    if exit is not None:
        b_out[exit] = cell.b[exit]
    pair = SafePair(cell, b_in, b_out, float(epsilon), cell_index, entry, exit)
    for name, poly in (("safe_in", pair.safe_in), ("safe_out", pair.safe_out)):
        if polytope_area(poly) <= MIN_SAFE_AREA:
            raise MarginTooLargeError(cell_index, f"{name} is empty at epsilon={epsilon:g}")
    return pair


def build_safe_pairs(g: CellGraph, c: Channel, epsilon: float, start=None, goal=None) -> list[SafePair]:
    """One ``SafePair`` per channel cell.

    When ``start``/``goal`` are given they must already sit inside the first
    ``safe_in`` / last ``safe_out``; the margin is never relaxed to make them fit.
    """
    if not epsilon > 0:
        raise InputError("epsilon must be positive")
    pairs = [
        make_safe_pair(g.cells[ci], epsilon, c.entry_facets[k], c.exit_facets[k], ci)
        for k, ci in enumerate(c.cell_indices)
    ]
    if start is not None and not contains(pairs[0].safe_in, start, TOL_FEAS):
        raise EndpointInsideMarginError("start", c.cell_indices[0])
    if goal is not None and not contains(pairs[-1].safe_out, goal, TOL_FEAS):
        raise EndpointInsideMarginError("goal", c.cell_indices[-1])
    return pairs


def corridor_bound(pair: SafePair, k: int) -> float:
    """Row-wise bound satisfied by the whole segment: ``max(b_safe_in[k], b_safe_out[k])``."""
    return float(max(pair.b_safe_in[k], pair.b_safe_out[k]))
