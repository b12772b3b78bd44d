"""The stationary solution of a purely explosive autoregression, built backward in time."""

import logging
from typing import Optional

import numpy as np
from scipy import signal

from ..companion import build_companion
from ..config import Settings
from ..errors import BadSpec, HorizonOverflow, NotPurelyExplosive
from ..models import (
    CompanionPair,
    HorizonResult,
    ModelSpec,
    NoiseDraw,
    Region,
    SimulationPath,
)
from .noise import generate_noise

logger = logging.getLogger(__name__)

EPS = np.finfo(float).eps


def contraction_horizon(
    mat: np.ndarray,
    tol: float,
    sigma: float,
    lead: float,
    cap: int,
) -> HorizonResult:
    """
    Smallest K with ``||mat^K||_F * lead / (1 - q) * sigma <= tol``.

    ``q = ||mat^m||_F^(1/m)`` for the first power ``m`` that makes it
    drop below one. ``lead`` is the norm of the first neglected block.
    """
    if tol <= 0:
        raise BadSpec(f"tol must be positive, got {tol}")
    d = mat.shape[0]

    power = np.eye(d)
    q = None
    contracting = 0
    for m in range(1, cap + 1):
        power = power @ mat
        norm = np.linalg.norm(power)
        if norm < 1.0:
            q = norm ** (1.0 / m)
            contracting = m
            break
    if q is None:
        raise HorizonOverflow(f"No contracting power of the companion matrix within {cap} steps")

    factor = lead / (1.0 - q) * sigma
    power = np.eye(d)
    peak = 1.0
    for k in range(1, cap + 1):
        power = power @ mat
        norm = np.linalg.norm(power)
        peak = max(peak, norm)
        bound = norm * factor
        if bound <= tol:
            logger.debug("horizon K=%d bound=%.3e q=%.6f m=%d", k, bound, q, contracting)
            return HorizonResult(k=k, bound=bound, q=q, contracting_power=contracting, peak_norm=peak)
    raise HorizonOverflow(
        f"Truncation tolerance {tol:g} not reached within {cap} terms",
        details={"tol": tol, "cap": cap},
    )


def _require_explosive(pair: CompanionPair) -> None:
    if pair.region is not Region.PURELY_EXPLOSIVE:
        raise NotPurelyExplosive(
            f"theta={pair.theta.tolist()} is not purely explosive "
            f"(smallest eigenvalue modulus {pair.spectral.rho_lower:.6g})"
        )


def truncation_horizon(
    pair: CompanionPair,
    tol: float,
    sigma: float = 1.0,
    settings: Optional[Settings] = None,
) -> HorizonResult:
    """Horizon K after which the neglected future noise is below ``tol``."""
    settings = settings or Settings()
    _require_explosive(pair)
    lead = np.linalg.norm(pair.b_inv)
    return contraction_horizon(pair.b_inv, tol, sigma, lead, settings.horizon_cap)


def roundoff_allowance(theta: np.ndarray, y: np.ndarray, z: np.ndarray) -> float:
    scale = max(float(np.max(np.abs(y), initial=0.0)), float(np.max(np.abs(z), initial=0.0)))
    return 16.0 * EPS * (1.0 + float(np.abs(theta).sum())) * scale


def stationary_from_noise(
    pair: CompanionPair,
    noise: NoiseDraw,
    n: int,
    horizon: HorizonResult,
) -> SimulationPath:
    """
    Run ``U_{k-1} = B^{-1}(U_k - e_1 Z_k)`` from ``U_{n+K} = 0`` down to ``U_0``.

    ``noise`` must hold ``Z_1..Z_{n+K}`` with ``K = len(noise) - n >= d``.
    """
    theta = pair.theta
    d = pair.d
    k = len(noise) - n
    if n < 1:
        raise BadSpec(f"n must be positive, got {n}")
    if k < d:
        raise BadSpec(f"noise must extend at least d={d} values past n, got {k}")

    # theta_d R_s + ... + theta_1 R_{s-d+1} - R_{s-d} = -Z, read right to left
    a = np.concatenate([theta[::-1], [-1.0]])
    y_rev = signal.lfilter([-1.0], a, noise.values[::-1])
    y = y_rev[k - d :][::-1]

    bound = horizon.bound * max(1.0, horizon.peak_norm)
    bound += roundoff_allowance(theta, y, noise.values[:n])
    return SimulationPath(
        theta=theta,
        y=y,
        noise=noise,
        n=n,
        direction="backward",
        truncation_k=k,
        truncation_bound=bound,
    )


def simulate_stationary(
    spec: ModelSpec,
    n: int,
    seed: int,
    tol: Optional[float] = None,
    settings: Optional[Settings] = None,
) -> SimulationPath:
    """
    Simulate ``Y_{1-d}..Y_n`` of the unique stationary solution.

    Args:
        spec: Purely explosive model
        n: Number of observations after the initial state
        seed: 64-bit RNG seed
        tol: Truncation tolerance, defaults to ``settings.default_tol``

    Returns:
        Backward SimulationPath exposing ``U_0..U_n`` and ``Z_1..Z_n``
    """
    settings = settings or Settings()
    tol = settings.default_tol if tol is None else tol
    if n < 1:
        raise BadSpec(f"n must be positive, got {n}")

    pair = build_companion(spec, settings)
    horizon = truncation_horizon(pair, tol, spec.noise.sigma, settings)
    k = max(horizon.k, spec.d)
    noise = generate_noise(spec.noise, n + k, seed)
    path = stationary_from_noise(pair, noise, n, horizon)
    logger.debug("simulated n=%d K=%d bound=%.3e", n, k, path.truncation_bound)
    return path


def state_matrix(path: SimulationPath) -> np.ndarray:
    """State vectors of ``path`` as a read-only view of ``path.y``."""
    return path.u


def recursion_residual(path: SimulationPath) -> np.ndarray:
    """``Y_k - sum_j theta_j Y_{k-j} - Z_k`` for every k the path determines."""
    u = path.u
    z = path.z
    if path.direction == "backward":
        return u[1:, 0] - u[:-1] @ path.theta - z
    # Y_j - theta . V_{j+1} - Z_j for j = 1..n-1
    return u[:-1, 0] - u[1:] @ path.theta - z[:-1]
