"""Companion matrix algebra, spectral classification and the coefficient involution."""

import logging
from typing import Optional, Sequence, Union

import numpy as np

from .config import Settings
from .errors import BadSpec, DegenerateTheta, NumericalFailure, PatternViolation, WrongOrder
from .models import CompanionPair, ModelSpec, PhiResult, Region, SpectralReport

logger = logging.getLogger(__name__)

ThetaLike = Union[ModelSpec, Sequence[float], np.ndarray]

# Backward-error ceiling for eigenvalues against the characteristic polynomial
CHARACTERISTIC_TOL = 1e-8


def as_theta(theta: ThetaLike) -> np.ndarray:
    if isinstance(theta, ModelSpec):
        return np.asarray(theta.theta, dtype=float)
    return ModelSpec(theta=theta).theta


def companion_matrix(theta: ThetaLike) -> np.ndarray:
    """``theta`` on the first row, identity on the subdiagonal."""
    theta = as_theta(theta)
    d = theta.size
    b = np.zeros((d, d))
    b[0] = theta
    b[1:, :-1] = np.eye(d - 1)
    return b


def companion_inverse(theta: ThetaLike) -> np.ndarray:
    """Closed form inverse; requires ``theta_d != 0``."""
    theta = as_theta(theta)
    d = theta.size
    if theta[-1] == 0:
        raise DegenerateTheta("theta_d is zero: the companion matrix is singular", details=theta.tolist())
    b_inv = np.zeros((d, d))
    b_inv[:-1, 1:] = np.eye(d - 1)
    b_inv[-1, 0] = 1.0 / theta[-1]
    b_inv[-1, 1:] = -theta[:-1] / theta[-1]
    return b_inv


def build_companion(spec: ThetaLike, settings: Optional[Settings] = None) -> CompanionPair:
    """Build ``B(theta)``, its inverse and spectral data."""
    theta = as_theta(spec)
    b = companion_matrix(theta)
    b_inv = companion_inverse(theta)
    pair = CompanionPair(theta=theta, b=b, b_inv=b_inv)
    return pair.model_copy(update={"spectral": spectral_info(pair, settings)})


def characteristic_residuals(theta: ThetaLike, eigenvalues: np.ndarray) -> np.ndarray:
    """
    Scaled residual of each eigenvalue in ``z^d - theta_1 z^{d-1} - ... - theta_d``.
    """
    theta = as_theta(theta)
    coeffs = np.concatenate([[1.0], -theta])
    values = np.abs(np.polyval(coeffs, eigenvalues))
    scale = max(1.0, float(np.abs(theta).sum())) * np.maximum(1.0, np.abs(eigenvalues)) ** theta.size
    return values / scale


def spectral_info(pair: CompanionPair, settings: Optional[Settings] = None) -> SpectralReport:
    """Eigenvalues of ``B``, spectral radius, smallest modulus and region."""
    return spectral_report(pair.theta, settings)


def spectral_report(theta: ThetaLike, settings: Optional[Settings] = None) -> SpectralReport:
    """Spectral data of ``B(theta)``; also defined when ``theta_d = 0``."""
    settings = settings or Settings()
    theta = as_theta(theta)
    try:
        eigenvalues = np.linalg.eigvals(companion_matrix(theta))
    except np.linalg.LinAlgError as e:
        raise NumericalFailure(f"Eigenvalue solver did not converge: {e}")
    if not np.all(np.isfinite(eigenvalues)):
        raise NumericalFailure("Eigenvalue solver returned non-finite values")

    residual = float(np.max(characteristic_residuals(theta, eigenvalues)))
    if residual > CHARACTERISTIC_TOL:
        raise NumericalFailure(
            f"Eigenvalues disagree with the characteristic polynomial (residual {residual:.3e})"
        )

    moduli = np.abs(eigenvalues)
    rho = float(moduli.max())
    rho_lower = float(moduli.min())
    btol = settings.boundary_tol
    boundary = bool(np.any(np.abs(moduli - 1.0) <= btol))

    if rho_lower > 1.0 + btol:
        region = Region.PURELY_EXPLOSIVE
    elif rho < 1.0 - btol:
        region = Region.STABLE
    else:
        region = Region.OTHER

    logger.debug("theta=%s rho=%.6g rho_lower=%.6g region=%s", theta, rho, rho_lower, region.value)
    return SpectralReport(
        eigenvalues=eigenvalues,
        rho=rho,
        rho_lower=rho_lower,
        region=region,
        boundary=boundary,
        characteristic_residual=residual,
    )


def classify_region_d2(theta: ThetaLike) -> Region:
    """Closed-form region of an order-2 coefficient vector."""
    theta = as_theta(theta)
    if theta.size != 2:
        raise WrongOrder(f"closed-form classification needs d = 2, got d = {theta.size}")
    t1, t2 = theta
    if abs(t1) < 2 and -1 < t2 < 1 - abs(t1):
        return Region.STABLE
    if t2 > 1 + abs(t1) or (t2 < -1 and t2 < 1 - abs(t1)):
        return Region.PURELY_EXPLOSIVE
    return Region.OTHER


def phi_map(theta: ThetaLike) -> PhiResult:
    """
    The coefficient involution of the time-reversed recursion.

    ``phi(theta) = (-theta_{d-1}/theta_d, ..., -theta_1/theta_d, 1/theta_d)``,
    extended by zero when ``theta_d = 0``.
    """
    theta = as_theta(theta)
    if theta[-1] == 0:
        return PhiResult(value=np.zeros_like(theta), extended=True)
    value = np.concatenate([-theta[:-1][::-1] / theta[-1], [1.0 / theta[-1]]])
    return PhiResult(value=value)


def phi_jacobian(theta: ThetaLike) -> np.ndarray:
    """Jacobian of ``phi`` at ``theta`` (requires ``theta_d != 0``)."""
    x = as_theta(theta)
    d = x.size
    if x[-1] == 0:
        raise DegenerateTheta("phi is not differentiable where theta_d = 0")
    m = np.zeros((d, d))
    for i in range(d - 1):
        m[i, d - i - 2] = 1.0
        m[i, -1] = -x[d - i - 2] / x[-1]
    m[-1, -1] = 1.0 / x[-1]
    return -m / x[-1]


def inverse_power_first_column(pair: CompanionPair, j: int) -> np.ndarray:
    """
    First column of ``B^{-j}`` for ``1 <= j <= d``.

    It has zeros above position ``d - j + 1`` and ``1/theta_d`` there.
    """
    d = pair.d
    if not 1 <= j <= d:
        raise BadSpec(f"power j must lie in 1..{d}, got {j}")
    col = np.zeros(d)
    col[0] = 1.0
    for _ in range(j):
        col = pair.b_inv @ col

    lead = d - j
    expected = 1.0 / pair.theta[-1]
    if np.any(np.abs(col[:lead]) > 1e-12) or abs(col[lead] - expected) > 1e-12 * abs(expected):
        raise PatternViolation(f"B^-{j} e_1 does not have the triangular pattern", details=col.tolist())
    return col
