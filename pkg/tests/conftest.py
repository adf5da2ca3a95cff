import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

import adsmax as am


@pytest.fixture(scope="session")
def unit_solution():
    """Unit model R = 3 + 4i: the exact solution is u = 0."""
    chart = am.make_chart(3 + 4j)
    grid = am.CylinderGrid.for_chart(chart, 64, 129)
    return am.solve_vortex(chart, grid, am.BoundarySpec(0.0, 0.0))


@pytest.fixture(scope="session")
def perturbed_solution():
    """Flat end R = 1 with tail a_1 = 0.1 on the standard 64 x 129 grid."""
    chart = am.make_chart(1.0, tail=[(1, 0.1)])
    grid = am.CylinderGrid.for_chart(chart, 64, 129)
    return am.solve_vortex(chart, grid)


@pytest.fixture(scope="session")
def cusp_tail_solution():
    """Cusp end with tail a_1 = 0.1 (small principal curvature everywhere)."""
    chart = am.make_chart(0.0, tail=[(1, 0.1)])
    grid = am.CylinderGrid.for_chart(chart, 64, 129)
    return am.solve_vortex(chart, grid)
