import numpy as np
import pytest


def random_ball_points(rng, m, dim, on_sphere=False):
    Z = rng.standard_normal((m, dim))
    Z /= np.linalg.norm(Z, axis=1, keepdims=True)
    if on_sphere:
        return Z
    return Z * rng.uniform(0.0, 1.0, size=(m, 1)) ** (1.0 / dim)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
