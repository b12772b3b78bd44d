"""Shared fixtures."""

import numpy as np
import pytest
from click.testing import CliRunner

from explosive_ar.models import ModelSpec


def _roots_to_theta(roots: np.ndarray) -> np.ndarray:
    # z^d - theta_1 z^{d-1} - ... - theta_d has these roots
    return -np.real(np.poly(roots))[1:]


def _random_roots(rng: np.random.Generator, d: int, low: float, high: float) -> np.ndarray:
    roots = []
    while len(roots) < d:
        modulus = rng.uniform(low, high)
        if d - len(roots) >= 2 and rng.random() < 0.5:
            angle = rng.uniform(0.3, np.pi - 0.3)
            roots += [modulus * np.exp(1j * angle), modulus * np.exp(-1j * angle)]
        else:
            roots.append(modulus * rng.choice([-1.0, 1.0]))
    return np.array(roots)


@pytest.fixture(scope="session")
def explosive_thetas() -> list[np.ndarray]:
    """Purely explosive coefficients, d = 1..4, roots of modulus 1.2..3."""
    rng = np.random.default_rng(20240611)
    return [_roots_to_theta(_random_roots(rng, int(rng.integers(1, 5)), 1.2, 3.0)) for _ in range(1000)]


@pytest.fixture(scope="session")
def stable_thetas() -> list[np.ndarray]:
    """Stable coefficients with nonzero theta_d, d = 1..3, roots of modulus 0.2..0.7."""
    rng = np.random.default_rng(20240612)
    return [_roots_to_theta(_random_roots(rng, int(rng.integers(1, 4)), 0.2, 0.7)) for _ in range(100)]


@pytest.fixture
def ar1() -> ModelSpec:
    return ModelSpec.of([2.0])


@pytest.fixture
def ar2() -> ModelSpec:
    return ModelSpec.of([0.0, 4.0])


@pytest.fixture
def runner() -> CliRunner:
    # stdout must stay parseable JSON; rich output goes to stderr
    try:
        return CliRunner(mix_stderr=False)
    except TypeError:
        return CliRunner()
