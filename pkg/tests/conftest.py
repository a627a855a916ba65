import numpy as np
import pytest

from hypflow.harmonic import BoundaryData, harmonic_extend

ACCEPTANCE_LINES = []


def random_disk_points(rng, n, r_max=0.95):
    r = r_max * np.sqrt(rng.uniform(0.0, 1.0, n))
    th = rng.uniform(0.0, 2.0 * np.pi, n)
    return np.stack([r * np.cos(th), r * np.sin(th)], axis=-1)


def random_potential(rng, order):
    return harmonic_extend(BoundaryData.random(order, rng))


@pytest.fixture
def rng():
    return np.random.default_rng(20241016)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def growth3():
    """Growth curve of the ball extension of xi_3, its refined twin and the label (shared; slow)."""
    from hypflow.harmonic import ball_extend_3d
    from hypflow.higher_dim import run_growth

    radii = np.arange(1, 41) * 0.25
    return run_growth(ball_extend_3d(lambda xi: xi[..., 2]), radii, window=(4.0, 10.0))
