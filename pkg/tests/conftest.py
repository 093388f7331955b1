import numpy as np
import pytest

from billiardlab import discretize, geometry
from billiardlab.experiments import solve_domain


@pytest.fixture(scope="session")
def sinai_domain():
    return geometry.TorusMinusObstacle(geometry.Disc((0.5, 0.5), 0.25))


@pytest.fixture(scope="session")
def sinai_small(sinai_domain):
    """Sinai billiard at resolution 48, 40 modes (shared across test modules)."""
    return solve_domain(sinai_domain, 48, 40, seed=0)


@pytest.fixture(scope="session")
def stadium_small():
    """Stadium at resolution 64, 30 modes."""
    return solve_domain(geometry.Stadium(a=1.0), 64, 30, seed=0)


@pytest.fixture(scope="session")
def square_res10():
    dom = geometry.Rectangle()
    grid = discretize.build_grid(dom, 10)
    op = discretize.assemble_laplacian(dom, grid)
    return dom, grid, op


def square_exact_spectrum(resolution):
    """Closed-form discrete Dirichlet spectrum of the unit square."""
    h = 1.0 / (resolution + 1)
    s = (4.0 / h**2) * np.sin(np.arange(1, resolution + 1) * np.pi * h / 2.0) ** 2
    return np.sort((s[:, None] + s[None, :]).ravel())


# --- acceptance-scale fixtures (only touched by tests/test_acceptance.py) ---


@pytest.fixture(scope="session")
def stadium_256():
    return solve_domain(geometry.Stadium(a=1.0), 256, 200, seed=0)


@pytest.fixture(scope="session")
def sinai_256(sinai_domain):
    return solve_domain(sinai_domain, 256, 200, seed=0)
