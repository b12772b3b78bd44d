"""
Second-order theory of the stationary explosive solution.

Covariance of the state, autocovariances, Yule-Walker identities and the
covariance targets of the limit theorems.
"""

import logging
from typing import Optional

import numpy as np

from .companion import (
    ThetaLike,
    as_theta,
    build_companion,
    inverse_power_first_column,
    phi_jacobian,
    phi_map,
)
from .config import Settings
from .errors import (
    NoConvergence,
    NotPurelyExplosive,
    NumericalFailure,
    PatternViolation,
    SingularSystem,
)
from .models import (
    CltMeanCovariance,
    CompanionPair,
    CovarianceReport,
    CovarianceStructure,
    DefinitenessCertificate,
    ModelSpec,
    Region,
    ResidualReport,
)

logger = logging.getLogger(__name__)

IDENTITY_TOL = 1e-9


def _spec(spec: ThetaLike) -> ModelSpec:
    return spec if isinstance(spec, ModelSpec) else ModelSpec(theta=spec)


def _explosive_pair(spec: ModelSpec, settings: Optional[Settings] = None) -> CompanionPair:
    pair = build_companion(spec, settings)
    _check_region(pair)
    return pair


def _check_region(pair: CompanionPair) -> None:
    if pair.region is not Region.PURELY_EXPLOSIVE:
        raise NotPurelyExplosive(f"theta={pair.theta.tolist()} is not purely explosive")


def _symmetrize(mat: np.ndarray) -> np.ndarray:
    return (mat + mat.T) / 2


# ----- Sigma -----

def sigma_series(pair: CompanionPair, tol: float = 1e-12, settings: Optional[Settings] = None) -> np.ndarray:
    """Partial sums of ``sum_{j>=1} B^{-j} E_11 B^{-jT}`` with a geometric stopping rule."""
    settings = settings or Settings()
    _check_region(pair)
    d = pair.d
    col = np.zeros(d)
    col[0] = 1.0
    total = np.zeros((d, d))
    term_norms: list[float] = []

    for j in range(1, settings.series_cap + 1):
        col = pair.b_inv @ col
        total += np.outer(col, col)
        term = float(col @ col)
        term_norms.append(term)
        if j >= 2 * d:
            # worst d-step decay over the last d terms; oscillating norms must not stop early
            recent = np.array(term_norms[-d:])
            earlier = np.array(term_norms[-2 * d : -d])
            q = float(np.max(recent / earlier)) ** (1.0 / d)
            if q < 1.0 and term <= tol * (1.0 - q) * np.linalg.norm(total):
                logger.debug("sigma series stopped after %d terms (q=%.6f)", j, q)
                return _symmetrize(total)
    raise NoConvergence(f"Covariance series did not settle within {settings.series_cap} terms")


def sigma_fixed_point(pair: CompanionPair) -> np.ndarray:
    """Solve ``(I - B^-1 kron B^-1) vec(Sigma) = vec(B^-1 E_11 B^-T)``."""
    _check_region(pair)
    d = pair.d
    a = pair.b_inv
    rhs = np.outer(a[:, 0], a[:, 0])
    try:
        vec = np.linalg.solve(np.eye(d * d) - np.kron(a, a), rhs.reshape(-1))
    except np.linalg.LinAlgError as e:
        raise SingularSystem(f"Covariance fixed-point system is singular: {e}")
    return _symmetrize(vec.reshape(d, d))


# ----- Autocovariances -----

def covariance_structure(spec: ThetaLike, settings: Optional[Settings] = None) -> CovarianceStructure:
    """Sigma, Gamma, gamma(0..d) and ``theta* = phi(theta)``."""
    spec = _spec(spec)
    pair = _explosive_pair(spec, settings)
    theta = spec.theta
    d = spec.d
    sigma2 = spec.noise.sigma2

    sigma_mat = sigma_fixed_point(pair)
    gamma_mat = sigma2 * sigma_mat
    gamma = np.empty(d + 1)
    gamma[:d] = gamma_mat[0]
    gamma[d] = theta @ gamma[:d][::-1] - sigma2 / theta[-1]

    # gamma(0) = theta_1 gamma(1) + ... + theta_d gamma(d)
    gap = abs(gamma[0] - theta @ gamma[1:])
    if gap > IDENTITY_TOL * gamma[0]:
        raise NumericalFailure(f"gamma(0) identity violated (gap {gap:.3e})")

    min_eig = float(np.linalg.eigvalsh(sigma_mat).min())
    if min_eig <= 0:
        raise NumericalFailure(f"State covariance is not positive definite (min eig {min_eig:.3e})")

    return CovarianceStructure(
        sigma_mat=sigma_mat,
        gamma_mat=gamma_mat,
        gamma=gamma,
        theta_star=phi_map(theta).value,
        min_eig_sigma=min_eig,
    )


def restricted_yule_walker_residuals(cs: CovarianceStructure, spec: ThetaLike) -> np.ndarray:
    """``|gamma(k) - sum_j gamma(|j-k|) theta_j|`` for ``1 <= k <= d-1``."""
    theta = _spec(spec).theta
    d = theta.size
    gamma = cs.gamma
    js = np.arange(1, d + 1)
    return np.array([abs(gamma[k] - theta @ gamma[np.abs(js - k)]) for k in range(1, d)])


def theta_star_residuals(cs: CovarianceStructure, spec: ThetaLike) -> ResidualReport:
    """Scale-relative residuals of the Yule-Walker and ``theta* - theta`` identities."""
    spec = _spec(spec)
    theta = spec.theta
    d = spec.d
    sigma2 = spec.noise.sigma2
    e_d = np.zeros(d)
    e_d[-1] = 1.0

    gamma_lag = cs.gamma[1:]
    star = cs.theta_star
    yw_scale = np.linalg.norm(cs.gamma_mat) * max(1.0, np.linalg.norm(star))
    yule_walker = np.linalg.norm(cs.gamma_mat @ star - gamma_lag) / yw_scale

    shift = star - theta
    shift_scale = max(1.0, float(np.linalg.norm(shift)))
    via_gamma = shift + (sigma2 / theta[-1]) * np.linalg.solve(cs.gamma_mat, e_d)
    via_sigma = shift + (1.0 / theta[-1]) * np.linalg.solve(cs.sigma_mat, e_d)

    gamma0 = cs.gamma[0]
    return ResidualReport(
        yule_walker=float(yule_walker),
        theta_star_gamma=float(np.linalg.norm(via_gamma) / shift_scale),
        theta_star_sigma=float(np.linalg.norm(via_sigma) / shift_scale),
        restricted_yule_walker=restricted_yule_walker_residuals(cs, spec) / gamma0,
        gamma0_identity=float(abs(gamma0 - theta @ cs.gamma[1:]) / gamma0),
        tolerance=IDENTITY_TOL,
    )


# ----- Certificates -----

def positive_definiteness_certificate(pair: CompanionPair) -> DefinitenessCertificate:
    """
    Minimum eigenvalue of ``sum_{j=1}^d B^-j E_11 B^-jT`` and the determinant of
    the stacked first columns of ``B^-d, ..., B^-1``.
    """
    d = pair.d
    cols = [inverse_power_first_column(pair, j) for j in range(1, d + 1)]
    partial = sum(np.outer(c, c) for c in cols)
    min_eig = float(np.linalg.eigvalsh(partial).min())
    det_stack = float(np.linalg.det(np.vstack(cols[::-1])))
    expected = abs(pair.theta[-1]) ** (-d)

    if min_eig <= 0:
        raise NumericalFailure(f"Partial covariance is not positive definite (min eig {min_eig:.3e})")
    if abs(abs(det_stack) - expected) > 1e-8 * expected:
        raise PatternViolation(f"Stacked column determinant {det_stack:.6e} != {expected:.6e}")
    return DefinitenessCertificate(min_eig=min_eig, det_stack=det_stack, expected_det=expected)


# ----- Limit covariances -----

def clt_mean_covariance(spec: ThetaLike, settings: Optional[Settings] = None) -> CltMeanCovariance:
    """Limit covariance of ``n^-1/2 sum U_k`` and variance of ``n^-1/2 sum Y_k``."""
    spec = _spec(spec)
    pair = _explosive_pair(spec, settings)
    theta = spec.theta
    d = spec.d
    excess = float(theta.sum() - 1.0)
    if excess == 0:
        raise NumericalFailure("theta sums to one: I - B^-1 is singular")

    e_d = np.zeros(d)
    e_d[-1] = 1.0
    try:
        column = np.linalg.solve(np.eye(d) - pair.b_inv, e_d)
    except np.linalg.LinAlgError as e:
        raise SingularSystem(f"I - B^-1 is singular: {e}")
    expected = theta[-1] / excess
    if np.max(np.abs(column - expected)) > 1e-10 * max(1.0, abs(expected)):
        raise NumericalFailure(f"(I - B^-1)^-1 e_d deviates from {expected:.6g} * ones")

    scalar = spec.noise.sigma2 / excess**2
    return CltMeanCovariance(u_cov=np.full((d, d), scalar), y_var=scalar, column=column)


def _checked_pd(mat: np.ndarray, what: str) -> np.ndarray:
    mat = _symmetrize(mat)
    try:
        np.linalg.cholesky(mat)
    except np.linalg.LinAlgError:
        raise NumericalFailure(f"{what} is not positive definite")
    return mat


def asymptotic_cov_lse(spec: ThetaLike, structure: Optional[CovarianceStructure] = None) -> np.ndarray:
    """``(sigma2 / theta_d^2) Gamma^-1``, the limit covariance of ``sqrt(n)(theta_hat - theta*)``."""
    spec = _spec(spec)
    cs = structure or covariance_structure(spec)
    theta_d = spec.theta[-1]
    cov = spec.noise.sigma2 / theta_d**2 * np.linalg.inv(cs.gamma_mat)
    return _checked_pd(cov, "LSE limit covariance")


def correction_matrix(theta: ThetaLike) -> np.ndarray:
    """``D`` with ones on the anti-diagonal block and ``theta`` in the last column."""
    theta = as_theta(theta)
    d = theta.size
    dmat = np.zeros((d, d))
    for i in range(d - 1):
        dmat[i, d - i - 2] = 1.0
    dmat[:, -1] = theta
    return dmat


def asymptotic_cov_corrected(spec: ThetaLike, structure: Optional[CovarianceStructure] = None) -> np.ndarray:
    """``sigma2 D Gamma^-1 D^T``, the limit covariance of ``sqrt(n)(phi(theta_hat) - theta)``."""
    spec = _spec(spec)
    cs = structure or covariance_structure(spec)
    sigma2 = spec.noise.sigma2
    dmat = correction_matrix(spec)
    gamma_inv = np.linalg.inv(cs.gamma_mat)
    cov = sigma2 * dmat @ gamma_inv @ dmat.T

    # delta method through the Jacobian of phi at theta*
    jac = phi_jacobian(cs.theta_star)
    delta = jac @ asymptotic_cov_lse(spec, cs) @ jac.T
    if np.linalg.norm(cov - delta) > 1e-10 * max(1.0, np.linalg.norm(cov)):
        raise NumericalFailure("Corrected covariance disagrees with the delta-method form")
    return _checked_pd(cov, "Corrected limit covariance")


# ----- Square roots -----

def symmetric_sqrt(mat: np.ndarray, inverse: bool = False) -> np.ndarray:
    """``mat^{1/2}`` (or ``mat^{-1/2}``) of a symmetric positive definite matrix."""
    w, v = np.linalg.eigh(_symmetrize(np.asarray(mat, dtype=float)))
    if w.min() <= 1e-14 * w.max():
        raise NumericalFailure(f"Matrix is numerically singular (eigenvalues {w.min():.3e}..{w.max():.3e})")
    power = -0.5 if inverse else 0.5
    return _symmetrize((v * w**power) @ v.T)


def lse_limit_factor(spec: ThetaLike, structure: Optional[CovarianceStructure] = None) -> np.ndarray:
    """``(sigma / theta_d) Gamma^{-1/2}``; maps ``N(0, I)`` onto the LSE limit law."""
    spec = _spec(spec)
    cs = structure or covariance_structure(spec)
    return spec.noise.sigma / spec.theta[-1] * symmetric_sqrt(cs.gamma_mat, inverse=True)


def covariance_report(spec: ThetaLike, settings: Optional[Settings] = None) -> CovarianceReport:
    """Everything the second-order theory says about ``spec``, checked."""
    spec = _spec(spec)
    pair = _explosive_pair(spec, settings)
    cs = covariance_structure(spec, settings)
    residuals = theta_star_residuals(cs, spec)
    if not residuals.passed:
        logger.warning("theta* identities hold only loosely for theta=%s", spec.theta.tolist())
    return CovarianceReport(
        theta=spec.theta,
        sigma2=spec.noise.sigma2,
        structure=cs,
        residuals=residuals,
        certificate=positive_definiteness_certificate(pair),
        clt=clt_mean_covariance(spec, settings),
        lse_cov=asymptotic_cov_lse(spec, cs),
        corrected_cov=asymptotic_cov_corrected(spec, cs),
    )
