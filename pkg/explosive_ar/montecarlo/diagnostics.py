"""Distances and distributional checks for Monte Carlo samples and single paths."""

import logging
from typing import Optional

import numpy as np
from scipy import stats

from ..errors import BadSpec, DimensionMismatch, RankZero
from ..estimation import batch_means_se
from ..models import CovarianceStructure, ShiftReport, SimulationPath, StrongLawReport

logger = logging.getLogger(__name__)

# Eigenvalues below this fraction of the largest are treated as zero
RANK_THRESHOLD = 1e-10
MIN_REPLICATIONS = 100


def covariance_distance(empirical: np.ndarray, target: np.ndarray) -> float:
    """Relative Frobenius distance ``||E - T|| / max(||T||, 1e-300)``."""
    empirical = np.atleast_2d(np.asarray(empirical, dtype=float))
    target = np.atleast_2d(np.asarray(target, dtype=float))
    if empirical.shape != target.shape:
        raise DimensionMismatch(f"shapes differ: {empirical.shape} vs {target.shape}")
    return float(np.linalg.norm(empirical - target) / max(np.linalg.norm(target), 1e-300))


def ks_threshold(replications: int, coefficient: float = 1.63) -> float:
    """Asymptotic 1% critical value of the one-sample KS distance."""
    return coefficient / np.sqrt(replications)


def normality_diagnostics(samples: np.ndarray, target_cov: np.ndarray) -> tuple[float, np.ndarray, int]:
    """
    KS distances of the samples against the centered normal law with ``target_cov``.

    Returns the KS distance of squared Mahalanobis radii against chi-square on
    the column space of ``target_cov``, the per-coordinate KS distances against
    N(0, 1) after standardization (NaN for zero-variance coordinates), and the rank.
    """
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    target = np.atleast_2d(np.asarray(target_cov, dtype=float))
    r, m = samples.shape
    if r < MIN_REPLICATIONS:
        raise BadSpec(f"normality diagnostics need at least {MIN_REPLICATIONS} samples, got {r}")
    if target.shape != (m, m):
        raise DimensionMismatch(f"target covariance {target.shape} does not match {m} coordinates")

    w, v = np.linalg.eigh((target + target.T) / 2)
    top = w.max()
    if top <= 0 or not np.isfinite(top):
        raise RankZero("target covariance is numerically zero")
    keep = w > RANK_THRESHOLD * top
    rank = int(keep.sum())
    projected = samples @ v[:, keep]
    radii = np.sum(projected**2 / w[keep], axis=1)
    mahalanobis = float(stats.kstest(radii, stats.chi2(df=rank).cdf).statistic)

    marginal = np.full(m, np.nan)
    variances = np.diag(target)
    for i in range(m):
        if variances[i] > RANK_THRESHOLD * top:
            standardized = samples[:, i] / np.sqrt(variances[i])
            marginal[i] = stats.kstest(standardized, "norm").statistic
    return mahalanobis, marginal, rank


def strong_law_diagnostics(path: SimulationPath, cs: CovarianceStructure) -> StrongLawReport:
    """Empirical Gram, cross-moment and noise orthogonality against their almost sure limits."""
    n = path.n
    u = path.u
    z = path.z
    lagged = u[:-1]
    gram = lagged.T @ lagged / n
    cross = lagged.T @ u[1:, 0] / n
    target_cross = cs.gamma_mat @ cs.theta_star
    orthogonality = (u[1:] * z[:, None]).sum(axis=0) / n
    sigma2 = path.noise.spec.sigma2
    band = 5.0 * np.sqrt(sigma2 * np.diag(cs.gamma_mat)) / np.sqrt(n)
    return StrongLawReport(
        n=n,
        gram_rel_err=covariance_distance(gram, cs.gamma_mat),
        cross_rel_err=float(np.linalg.norm(cross - target_cross) / np.linalg.norm(target_cross)),
        orthogonality=orthogonality,
        orthogonality_band=band,
    )


def ergodicity_diagnostics(path: SimulationPath, batches: int = 50, sigmas: float = 5.0) -> ShiftReport:
    """Compare mean and variance of the two halves of ``Y_1..Y_n``."""
    y = path.observed()
    half = y.size // 2
    first, second = y[:half], y[half:]

    def spread(a: np.ndarray, b: np.ndarray) -> float:
        return float(np.hypot(batch_means_se(a, batches), batch_means_se(b, batches)))

    mean_z = float(np.abs(first.mean() - second.mean())) / max(spread(first, second), 1e-300)
    var_z = float(np.abs(np.mean(first**2) - np.mean(second**2))) / max(
        spread(first**2, second**2), 1e-300
    )
    passed = mean_z <= sigmas and var_z <= sigmas
    if not passed:
        logger.info("half-sample shift: mean %.2f SE, variance %.2f SE", mean_z, var_z)
    return ShiftReport(
        mean_first=float(first.mean()),
        mean_second=float(second.mean()),
        var_first=float(np.mean(first**2)),
        var_second=float(np.mean(second**2)),
        mean_z=mean_z,
        var_z=var_z,
        passed=passed,
    )


def mean_zero_check(samples: np.ndarray, target_cov: np.ndarray, sigmas: float = 4.0) -> Optional[bool]:
    """``|mean| <= sigmas * sqrt(diag(target) / R)`` coordinatewise."""
    samples = np.atleast_2d(samples)
    if samples.shape[0] == 0:
        return None
    band = sigmas * np.sqrt(np.diag(np.atleast_2d(target_cov)) / samples.shape[0])
    return bool(np.all(np.abs(samples.mean(axis=0)) <= band))
