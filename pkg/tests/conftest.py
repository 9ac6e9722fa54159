import os
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

from pwbplan.decomposition import CellGraph  # noqa: E402
from pwbplan.geometry import ConvexPolygon, polygon_to_polytope  # noqa: E402

settings.register_profile(
    "repo", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow], derandomize=True
)
settings.load_profile("repo")


def square(x0=0.0, y0=0.0, s=1.0):
    return np.array([[x0, y0], [x0 + s, y0], [x0 + s, y0 + s], [x0, y0 + s]], dtype=float)


def box(x0, y0, x1, y1):
    return np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]], dtype=float)


def strip_graph(n_cells, width=1.0, height=1.5):
    """Zig-zag strip of ``n_cells`` triangles along the x axis."""
    half = n_cells // 2
    bot = [(i * width, 0.0) for i in range(half + 1)]
    top = [(i * width + width / 2, height) for i in range(half + 1)]
    tris = []
    for i in range(half):
        tris.append([bot[i], bot[i + 1], top[i]])
        tris.append([bot[i + 1], top[i + 1], top[i]])
    return CellGraph.from_cells([polygon_to_polytope(ConvexPolygon(np.array(t))) for t in tris])


@pytest.fixture
def unit_square():
    return polygon_to_polytope(ConvexPolygon(square()))


# one line per acceptance criterion, printed after the run
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
