"""Shared fixtures: hypothesis profile and cached Monte Carlo ensembles."""
import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from invdpp.kernels import KernelSpec
from invdpp.sampler import sample_many, truncation_choice

settings.register_profile(
    "invdpp", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("invdpp")

ACCEPTANCE_LINES: list[str] = []


def record_acceptance(criterion: int, passed: bool, detail: str) -> None:
    line = f"criterion {criterion:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


# Ensembles shared by the statistics tests and the acceptance suite. Each one
# has its own master seed so the tests stay independent of one another.
SPHERE_SEED, PLANE_SEED, HYPERBOLIC_SEED = 20240601, 20240602, 20240603
PLANE_WINDOW, HYPERBOLIC_WINDOW = 1.0, 0.6
WINDOW_TAIL = 1e-10


@pytest.fixture(scope="session")
def sphere64():
    spec = KernelSpec("sphere", 64)
    return spec, sample_many(spec, SPHERE_SEED, 4000)


@pytest.fixture(scope="session")
def plane64():
    n = truncation_choice(64, PLANE_WINDOW, WINDOW_TAIL, "plane")
    spec = KernelSpec("plane", 64, n)
    return spec, sample_many(spec, PLANE_SEED, 5000, PLANE_WINDOW)


@pytest.fixture(scope="session")
def hyperbolic64():
    n = truncation_choice(64, HYPERBOLIC_WINDOW, WINDOW_TAIL, "hyperbolic")
    spec = KernelSpec("hyperbolic", 64, n)
    return spec, sample_many(spec, HYPERBOLIC_SEED, 2000, HYPERBOLIC_WINDOW)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
