import numpy as np
import pytest

from explosive_ar.companion import (
    build_companion,
    characteristic_residuals,
    classify_region_d2,
    companion_inverse,
    companion_matrix,
    inverse_power_first_column,
    phi_jacobian,
    phi_map,
    spectral_report,
)
from explosive_ar.errors import BadSpec, DegenerateTheta, WrongOrder
from explosive_ar.models import ModelSpec, Region
from explosive_ar.moments import correction_matrix


def test_companion_layout():
    b = companion_matrix([1.0, 2.0, 3.0])
    np.testing.assert_array_equal(b, [[1, 2, 3], [1, 0, 0], [0, 1, 0]])


def test_closed_form_inverse():
    b_inv = companion_inverse([1.0, 2.0, 3.0])
    np.testing.assert_allclose(b_inv[-1], [1 / 3, -1 / 3, -2 / 3])
    np.testing.assert_allclose(companion_matrix([1.0, 2.0, 3.0]) @ b_inv, np.eye(3), atol=1e-15)


def test_inverse_and_determinant(explosive_thetas):
    for theta in explosive_thetas:
        pair = build_companion(theta)
        d = theta.size
        assert np.linalg.norm(pair.b @ pair.b_inv - np.eye(d)) <= 1e-10
        expected = (-1) ** (d + 1) * theta[-1]
        assert abs(np.linalg.det(pair.b) - expected) <= 1e-10 * max(1.0, abs(expected))


def test_degenerate_theta():
    with pytest.raises(DegenerateTheta):
        build_companion([1.0, 0.0])


def test_pair_is_read_only(ar2):
    pair = build_companion(ar2)
    with pytest.raises(ValueError):
        pair.b_inv[0, 0] = 1.0


@pytest.mark.parametrize(
    "theta, region",
    [
        ([2.0], Region.PURELY_EXPLOSIVE),
        ([0.0, 4.0], Region.PURELY_EXPLOSIVE),
        ([0.0, -2.0], Region.PURELY_EXPLOSIVE),
        ([5.0, -10.0], Region.PURELY_EXPLOSIVE),
        ([0.5, 0.3], Region.STABLE),
        ([0.5], Region.STABLE),
        ([4.0, -2.0], Region.OTHER),
        ([10.0, -8.0], Region.OTHER),
    ],
)
def test_regions(theta, region):
    report = spectral_report(theta)
    assert report.region is region
    assert not report.boundary


def test_eigenvalues_of_ar2(ar2):
    report = build_companion(ar2).spectral
    np.testing.assert_allclose(sorted(report.eigenvalues.real), [-2.0, 2.0])
    assert report.rho == pytest.approx(2.0)
    assert report.rho_lower == pytest.approx(2.0)


@pytest.mark.parametrize("theta", [[1.0], [0.0, 1.0], [-1.0]])
def test_unit_modulus_is_boundary(theta):
    report = spectral_report(theta)
    assert report.region is Region.OTHER
    assert report.boundary


def test_spectral_report_allows_zero_last_coefficient():
    report = spectral_report([0.5, 0.0])
    assert report.region is Region.STABLE
    assert report.rho_lower == pytest.approx(0.0)


def test_characteristic_residuals_small(explosive_thetas):
    for theta in explosive_thetas:
        report = spectral_report(theta)
        assert report.characteristic_residual <= 1e-8
        assert characteristic_residuals(theta, report.eigenvalues).max() <= 1e-8


def test_closed_form_d2_agrees_with_spectrum():
    grid = np.linspace(-6.0, 6.0, 25)
    checked = 0
    for t1 in grid:
        for t2 in grid:
            moduli = np.abs(np.roots([1.0, -t1, -t2]))
            if np.any(np.abs(moduli - 1.0) < 1e-6):
                continue
            assert classify_region_d2([t1, t2]) is spectral_report([t1, t2]).region, (t1, t2)
            checked += 1
    assert checked > 500


def test_closed_form_needs_order_two():
    with pytest.raises(WrongOrder):
        classify_region_d2([2.0])


def test_phi_examples():
    np.testing.assert_allclose(phi_map([2.0]).value, [0.5])
    np.testing.assert_allclose(phi_map([0.0, 4.0]).value, [0.0, 0.25])
    np.testing.assert_allclose(phi_map([1.0, 2.0, 4.0]).value, [-0.5, -0.25, 0.25])


def test_phi_extension_at_zero():
    result = phi_map([1.0, 0.0])
    assert result.extended
    np.testing.assert_array_equal(result.value, [0.0, 0.0])


def test_phi_is_an_involution(explosive_thetas):
    for theta in explosive_thetas:
        twice = phi_map(phi_map(theta).value).value
        np.testing.assert_allclose(twice, theta, rtol=1e-12, atol=1e-12)


def test_phi_swaps_regions(explosive_thetas):
    for theta in explosive_thetas:
        explosive = spectral_report(theta)
        stable = spectral_report(phi_map(theta).value)
        assert explosive.region is Region.PURELY_EXPLOSIVE
        assert stable.region is Region.STABLE
        assert abs(stable.rho * explosive.rho_lower - 1.0) <= 1e-8


def test_phi_jacobian_matches_finite_differences():
    theta = np.array([1.0, 2.0, 3.0])
    jac = phi_jacobian(theta)
    step = 1e-6
    numeric = np.empty((3, 3))
    for j in range(3):
        e = np.zeros(3)
        e[j] = step
        numeric[:, j] = (phi_map(theta + e).value - phi_map(theta - e).value) / (2 * step)
    np.testing.assert_allclose(jac, numeric, atol=1e-6)


def test_phi_jacobian_at_theta_star_is_scaled_correction(explosive_thetas):
    for theta in explosive_thetas[:50]:
        star = phi_map(theta).value
        np.testing.assert_allclose(
            phi_jacobian(star), -theta[-1] * correction_matrix(theta), rtol=1e-10, atol=1e-10
        )


def test_inverse_power_columns():
    pair = build_companion([1.0, 2.0, 3.0])
    np.testing.assert_allclose(inverse_power_first_column(pair, 1), [0.0, 0.0, 1 / 3])
    np.testing.assert_allclose(inverse_power_first_column(pair, 2), [0.0, 1 / 3, -2 / 9])
    col = inverse_power_first_column(pair, 3)
    assert col[0] == pytest.approx(1 / 3)


def test_inverse_power_out_of_range(ar2):
    pair = build_companion(ar2)
    with pytest.raises(BadSpec):
        inverse_power_first_column(pair, 3)
    with pytest.raises(BadSpec):
        inverse_power_first_column(pair, 0)


def test_theta_must_be_finite():
    with pytest.raises(BadSpec):
        ModelSpec.of([np.inf])
    with pytest.raises(BadSpec):
        ModelSpec.of([])


def test_order_two_inverse(ar2):
    pair = build_companion(ar2)
    np.testing.assert_array_equal(pair.b, [[0.0, 4.0], [1.0, 0.0]])
    np.testing.assert_array_equal(pair.b_inv, [[0.0, 1.0], [0.25, 0.0]])
    np.testing.assert_array_equal(inverse_power_first_column(pair, 1), [0.0, 0.25])
    np.testing.assert_array_equal(inverse_power_first_column(pair, 2), [0.25, 0.0])


@pytest.mark.parametrize(
    "theta, region",
    [([0.0, 4.0], Region.PURELY_EXPLOSIVE), ([0.0, 0.25], Region.STABLE), ([3.0, -0.5], Region.OTHER)],
)
def test_closed_form_examples(theta, region):
    assert classify_region_d2(theta) is region
    assert spectral_report(theta).region is region


def test_phi_order_three():
    np.testing.assert_allclose(phi_map([1.0, 2.0, 3.0]).value, [-2 / 3, -1 / 3, 1 / 3])
    np.testing.assert_allclose(phi_map([-2 / 3, -1 / 3, 1 / 3]).value, [1.0, 2.0, 3.0])
