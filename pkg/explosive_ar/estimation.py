"""Least squares estimation and the normalized statistics of the limit theorems."""

import logging
from typing import Optional

import numpy as np

from .companion import ThetaLike, as_theta, phi_map
from .config import Settings
from .errors import BadH, BadSpec, LagTooLarge, PathTooShort
from .models import CovarianceStructure, EstimationResult, HSpec, ModelSpec, SimulationPath
from .moments import covariance_structure
from .simulate.stationary import simulate_stationary

logger = logging.getLogger(__name__)

# Gram matrix counts as singular below this fraction of its mean eigenvalue
GRAM_RELATIVE_FLOOR = 1e-12


def _require_backward(path: SimulationPath) -> None:
    if path.direction != "backward":
        raise BadSpec("this statistic is defined on paths of the explosive model")


# ----- Least squares -----

def lse(
    path: SimulationPath,
    theta: Optional[ThetaLike] = None,
    theta_star: Optional[ThetaLike] = None,
) -> EstimationResult:
    """
    Regress ``Y_k`` on ``U_{k-1}`` for ``k = 1..n``.

    A numerically singular Gram matrix yields the zero estimate. Normalized
    deviations are filled only for the true values the caller supplies.
    """
    _require_backward(path)
    d = path.d
    n = path.n
    if n < d + 1:
        raise PathTooShort(f"need at least d+1={d + 1} observations, got {n}")

    u = path.u
    lagged = u[:-1]
    response = u[1:, 0]
    gram = lagged.T @ lagged
    cross = lagged.T @ response

    trace = float(np.trace(gram))
    min_eig = float(np.linalg.eigvalsh(gram).min())
    singular = trace <= 0 or min_eig <= GRAM_RELATIVE_FLOOR * trace / d
    if singular:
        logger.debug("Gram matrix singular (min eig %.3e, trace %.3e)", min_eig, trace)
        theta_hat = np.zeros(d)
    else:
        theta_hat = np.linalg.solve(gram, cross)

    corrected = phi_map(theta_hat)
    root_n = np.sqrt(n)
    dev_star = None
    dev_theta = None
    theta_true = as_theta(theta) if theta is not None else None
    star_true = as_theta(theta_star) if theta_star is not None else None
    if star_true is not None:
        dev_star = root_n * (theta_hat - star_true)
    if theta_true is not None:
        dev_theta = root_n * (corrected.value - theta_true)

    return EstimationResult(
        theta_hat=theta_hat,
        theta_corrected=corrected.value,
        corrected_extended=corrected.extended,
        n=n,
        gram_singular=singular,
        gram_min_eig=min_eig,
        theta_true=theta_true,
        theta_star_true=star_true,
        normalized_dev_star=dev_star,
        normalized_dev_theta=dev_theta,
    )


# ----- Regressor transforms -----

def _coords(h: HSpec, d: int) -> list[int]:
    coords = h.coords or list(range(1, d + 1))
    if max(coords) > d:
        raise BadH(f"coordinate {max(coords)} exceeds the state dimension {d}")
    return [c - 1 for c in coords]


def h_matrix(h: HSpec, theta: ThetaLike) -> np.ndarray:
    """Matrix ``M`` of a linear ``h`` (``h(x) = M x``); constant ``h`` has no matrix."""
    theta = as_theta(theta)
    d = theta.size
    if h.kind == "identity":
        return np.eye(d)
    if h.kind == "projection":
        if h.index > d:
            raise BadH(f"projection index {h.index} exceeds the state dimension {d}")
        m = np.zeros((1, d))
        m[0, h.index - 1] = 1.0
        return m
    if h.kind == "linear":
        m = np.asarray(h.matrix, dtype=float)
        if m.shape[1] != d:
            raise BadH(f"linear h has {m.shape[1]} columns, the state has dimension {d}")
        return m
    if h.kind == "lse_score":
        return -np.eye(d)[::-1] / theta[-1]
    raise BadH(f"h of kind {h.kind!r} is not linear")


def apply_h(h: HSpec, states: np.ndarray, theta: ThetaLike) -> np.ndarray:
    """Evaluate ``h`` row-wise; returns an ``n x m`` array."""
    states = np.atleast_2d(states)
    if h.kind == "constant":
        return np.ones((states.shape[0], 1))
    if h.kind == "tanh":
        return np.tanh(states[:, _coords(h, states.shape[1])])
    return states @ h_matrix(h, theta).T


def h_weighted_statistic(path: SimulationPath, h: HSpec) -> np.ndarray:
    """``n^{-1/2} sum_{k=1}^n h(U_k) Z_k`` on the noise the path exposes."""
    _require_backward(path)
    values = apply_h(h, path.u[1:], path.theta)
    return (values * path.z[:, None]).sum(axis=0) / np.sqrt(path.n)


def batch_means_se(values: np.ndarray, batches: int = 50) -> float:
    """Standard error of the mean of a dependent series from non-overlapping batch means."""
    values = np.asarray(values, dtype=float).ravel()
    size = values.size // batches
    if batches < 2 or size < 1:
        raise BadSpec(f"{values.size} values cannot form {batches} batches")
    means = values[: size * batches].reshape(batches, size).mean(axis=1)
    return float(means.std(ddof=1) / np.sqrt(batches))


def target_cov_h(
    h: HSpec,
    spec: ModelSpec,
    seed: int = 0,
    draws: Optional[int] = None,
    structure: Optional[CovarianceStructure] = None,
    settings: Optional[Settings] = None,
) -> tuple[np.ndarray, np.ndarray]:
    """
    ``sigma2 E[h(U_1) h(U_1)^T]`` and its standard error.

    Exact for linear ``h``; otherwise a plug-in average over one long stationary path.
    """
    settings = settings or Settings()
    sigma2 = spec.noise.sigma2
    if h.kind == "constant":
        return np.array([[sigma2]]), np.zeros((1, 1))
    if h.linear:
        cs = structure or covariance_structure(spec, settings)
        m = h_matrix(h, spec.theta)
        cov = sigma2 * m @ cs.gamma_mat @ m.T
        return (cov + cov.T) / 2, np.zeros_like(cov)

    draws = draws or settings.h_mc_draws
    path = simulate_stationary(spec, draws, seed, settings=settings)
    values = apply_h(h, path.u[1:], spec.theta)
    m = values.shape[1]
    cov = np.empty((m, m))
    se = np.empty((m, m))
    for i in range(m):
        for j in range(i, m):
            products = values[:, i] * values[:, j]
            cov[i, j] = cov[j, i] = sigma2 * products.mean()
            se[i, j] = se[j, i] = sigma2 * batch_means_se(products)
    logger.info("Monte Carlo h target from %d draws (max SE %.3e)", draws, se.max())
    return cov, se


# ----- Autocovariances -----

def sample_autocovariance(path: SimulationPath, k: int) -> float:
    """``(1/n) sum_{j=1}^{n-k} Y_j Y_{j+k}``; the process mean is zero."""
    if not 0 <= k <= path.d:
        raise LagTooLarge(f"lag must lie in 0..{path.d}, got {k}")
    if path.n < k + 2:
        raise LagTooLarge(f"a path of length {path.n} is too short for lag {k}")
    y = path.observed()
    return float(y[: path.n - k] @ y[k:] / path.n)
