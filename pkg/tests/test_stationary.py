import numpy as np
import pytest

from explosive_ar.companion import build_companion
from explosive_ar.config import Settings
from explosive_ar.errors import BadSpec, HorizonOverflow, NotPurelyExplosive
from explosive_ar.estimation import batch_means_se
from explosive_ar.models import ModelSpec
from explosive_ar.moments import covariance_structure
from explosive_ar.simulate import (
    generate_noise,
    recursion_residual,
    simulate_stationary,
    state_matrix,
    stationary_from_noise,
    truncation_horizon,
)


@pytest.mark.parametrize("theta, k", [([2.0], 40), ([10.0], 12)])
def test_horizon_examples(theta, k):
    horizon = truncation_horizon(build_companion(theta), tol=1e-12)
    assert horizon.k == k
    assert horizon.bound <= 1e-12
    assert horizon.q == pytest.approx(1.0 / theta[0])


def test_horizon_grows_as_tolerance_shrinks(ar2):
    pair = build_companion(ar2)
    assert truncation_horizon(pair, 1e-6).k < truncation_horizon(pair, 1e-12).k


def test_horizon_requires_explosive():
    with pytest.raises(NotPurelyExplosive):
        truncation_horizon(build_companion([0.5]), 1e-12)


def test_horizon_cap():
    with pytest.raises(HorizonOverflow):
        truncation_horizon(build_companion([2.0]), 1e-12, settings=Settings(horizon_cap=5))


def test_nonpositive_tolerance(ar1):
    with pytest.raises(BadSpec):
        truncation_horizon(build_companion(ar1), 0.0)


@pytest.mark.parametrize("theta", [[2.0], [0.0, 4.0], [1.0, 2.0, 3.0], [0.0, -2.0]])
def test_recursion_residual_within_bound(theta):
    path = simulate_stationary(ModelSpec.of(theta), 1000, seed=42, tol=1e-12)
    residual = np.abs(recursion_residual(path)).max()
    assert residual <= path.truncation_bound <= 1e-10


def test_random_explosive_paths(explosive_thetas):
    for i, theta in enumerate(explosive_thetas[:40]):
        path = simulate_stationary(ModelSpec.of(theta), 200, seed=i, tol=1e-12)
        assert np.abs(recursion_residual(path)).max() <= path.truncation_bound


def test_path_layout(ar2):
    path = simulate_stationary(ar2, 100, seed=3)
    assert path.y.size == 102
    assert path.y_start == -1
    u = state_matrix(path)
    assert u.shape == (101, 2)
    np.testing.assert_array_equal(u[:, 0], path.y[1:])
    np.testing.assert_array_equal(u[:, 1], path.y[:-1])
    np.testing.assert_array_equal(path.observed(), path.y[2:])
    assert path.z.size == 100
    assert len(path.noise) == 100 + path.truncation_k
    assert path.truncation_k >= 2


def test_deterministic(ar2):
    first = simulate_stationary(ar2, 500, seed=11)
    second = simulate_stationary(ar2, 500, seed=11)
    np.testing.assert_array_equal(first.y, second.y)


def test_stationary_from_noise_needs_lookahead(ar2):
    pair = build_companion(ar2)
    horizon = truncation_horizon(pair, 1e-12)
    noise = generate_noise(ar2.noise, 101, seed=1)
    with pytest.raises(BadSpec):
        stationary_from_noise(pair, noise, 100, horizon)


def test_rejects_stable():
    with pytest.raises(NotPurelyExplosive):
        simulate_stationary(ModelSpec.of([0.5]), 10, seed=1)


def test_rejects_nonpositive_n(ar1):
    with pytest.raises(BadSpec):
        simulate_stationary(ar1, 0, seed=1)


def test_ar1_variance(ar1):
    y = simulate_stationary(ar1, 100_000, seed=2024).observed()
    assert abs(y.var() - 1.0 / 3.0) <= 0.05 / 3.0


def test_ar2_lag_one_autocovariance(ar2):
    path = simulate_stationary(ar2, 100_000, seed=7)
    gamma = covariance_structure(ar2).gamma
    y = path.observed()
    products = y[:-1] * y[1:]
    assert abs(products.mean() - gamma[1]) <= 5 * batch_means_se(products)
    squares = y * y
    assert abs(squares.mean() - gamma[0]) <= 5 * batch_means_se(squares)


def test_state_independent_of_current_noise(ar1):
    path = simulate_stationary(ar1, 100_000, seed=8)
    # Y_k is built from Z_{k+1}, Z_{k+2}, ... while Y_{k-1} contains -Z_k / 2
    assert abs(np.corrcoef(path.u[1:, 0], path.z)[0, 1]) <= 5 / np.sqrt(path.n)
    assert np.corrcoef(path.u[:-1, 0], path.z)[0, 1] == pytest.approx(-np.sqrt(3.0) / 2, abs=0.02)


def test_scales_with_noise_variance():
    small = simulate_stationary(ModelSpec.of([2.0], sigma2=1.0), 200, seed=4)
    large = simulate_stationary(ModelSpec.of([2.0], sigma2=4.0), 200, seed=4)
    # horizons differ by a term, so only agreement up to the truncation error
    np.testing.assert_allclose(large.y, 2 * small.y, rtol=0, atol=1e-10)
