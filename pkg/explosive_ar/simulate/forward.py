"""Forward-looking autoregression and its equivalence with the time-reversed explosive model."""

import logging
from typing import Optional

import numpy as np
from scipy import linalg, signal

from ..companion import ThetaLike, build_companion, companion_matrix, phi_map, spectral_report
from ..config import Settings
from ..errors import BadSpec, DegenerateTheta, NotStable, NumericalFailure, SingularSystem
from ..models import EquivalenceReport, HorizonResult, ModelSpec, NoiseDraw, Region, SimulationPath
from .noise import generate_noise
from .stationary import (
    contraction_horizon,
    roundoff_allowance,
    stationary_from_noise,
    truncation_horizon,
)

logger = logging.getLogger(__name__)


def _as_spec(theta: ThetaLike) -> ModelSpec:
    return theta if isinstance(theta, ModelSpec) else ModelSpec(theta=theta)


def require_stable(spec: ModelSpec, settings: Optional[Settings] = None) -> np.ndarray:
    """Return ``B(theta)`` or raise NotStable."""
    report = spectral_report(spec.theta, settings)
    if report.region is not Region.STABLE:
        raise NotStable(
            f"theta={spec.theta.tolist()} is not stable (spectral radius {report.rho:.6g})"
        )
    return companion_matrix(spec.theta)


def forward_horizon(
    b: np.ndarray,
    tol: float,
    sigma: float = 1.0,
    settings: Optional[Settings] = None,
) -> HorizonResult:
    """Horizon for ``V_n = sum_{k>=0} B^k W_{n+k}``."""
    settings = settings or Settings()
    lead = 1.0 + np.linalg.norm(b)
    return contraction_horizon(b, tol, sigma, lead, settings.horizon_cap)


def forward_from_noise(
    theta: np.ndarray,
    noise: NoiseDraw,
    n: int,
    horizon: HorizonResult,
) -> SimulationPath:
    """
    Run ``V_j = B V_{j+1} + W_j`` from ``V_{n+K} = 0`` down to ``V_1``.

    Keeps ``Y_1..Y_{n+d-1}`` so that ``V_1..V_n`` are complete.
    """
    d = theta.size
    k = len(noise) - n
    if n < 1:
        raise BadSpec(f"n must be positive, got {n}")
    if k < d:
        raise BadSpec(f"noise must extend at least d={d} values past n, got {k}")

    # Z_{n+K} is never used: V_{n+K} = 0
    z_rev = noise.values[: n + k - 1][::-1]
    y_rev = signal.lfilter([1.0], np.concatenate([[1.0], -theta]), z_rev)
    y = y_rev[k - d :][::-1]

    bound = horizon.bound * max(1.0, horizon.peak_norm)
    bound += roundoff_allowance(theta, y, noise.values[:n])
    return SimulationPath(
        theta=theta,
        y=y,
        noise=noise,
        n=n,
        direction="forward",
        truncation_k=k,
        truncation_bound=bound,
    )


def simulate_forward_ar(
    theta_stable: ThetaLike,
    n: int,
    seed: int,
    tol: Optional[float] = None,
    settings: Optional[Settings] = None,
) -> SimulationPath:
    """Simulate ``Y_n = pi_1(V_n)`` of the forward-looking AR with stable ``theta``."""
    settings = settings or Settings()
    tol = settings.default_tol if tol is None else tol
    spec = _as_spec(theta_stable)
    b = require_stable(spec, settings)

    horizon = forward_horizon(b, tol, spec.noise.sigma, settings)
    k = max(horizon.k, spec.d)
    noise = generate_noise(spec.noise, n + k, seed)
    return forward_from_noise(spec.theta, noise, n, horizon)


def forward_state_covariance(theta_stable: ThetaLike) -> np.ndarray:
    """
    ``S = sum_{k>=0} B^k E_11 B^kT``, solved from ``S - B S B^T = E_11``.

    ``sigma2 * S[0, 0]`` is the variance of the forward-looking AR.
    """
    spec = _as_spec(theta_stable)
    b = require_stable(spec)
    e11 = np.zeros((spec.d, spec.d))
    e11[0, 0] = 1.0
    try:
        s = linalg.solve_discrete_lyapunov(b, e11)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise SingularSystem(f"Forward covariance equation has no unique solution: {e}")
    return (s + s.T) / 2


def forward_backward_equivalence(
    theta_stable: ThetaLike,
    n: int,
    seed: int,
    tol: Optional[float] = None,
    settings: Optional[Settings] = None,
) -> EquivalenceReport:
    """
    Compare ``pi_1(V_j)`` with ``pi_d(U*_{j-1})`` for ``j = 1..n`` on one shared noise draw.

    The backward model uses ``theta* = phi(theta)`` and ``Z*_k = -Z_k / theta_d``.
    """
    settings = settings or Settings()
    tol = settings.default_tol if tol is None else tol
    spec = _as_spec(theta_stable)
    theta = spec.theta
    d = spec.d
    if theta[-1] == 0:
        raise DegenerateTheta("theta_d is zero: the time reversal is undefined", details=theta.tolist())
    b = require_stable(spec, settings)

    star_spec = ModelSpec(theta=phi_map(theta).value, noise=spec.noise.scaled(1.0 / theta[-1]))
    star_pair = build_companion(star_spec, settings)
    if star_pair.region is not Region.PURELY_EXPLOSIVE:
        raise NumericalFailure(
            f"phi(theta)={star_spec.theta.tolist()} was expected to be purely explosive"
        )

    fwd = forward_horizon(b, tol, spec.noise.sigma, settings)
    bwd = truncation_horizon(star_pair, tol, star_spec.noise.sigma, settings)
    k = max(fwd.k, bwd.k, d)
    noise = generate_noise(spec.noise, n + k, seed)

    forward = forward_from_noise(theta, noise, n, fwd)
    star_noise = NoiseDraw(values=-noise.values / theta[-1], seed=seed, spec=star_spec.noise)
    backward = stationary_from_noise(star_pair, star_noise, n, bwd)

    lhs = forward.observed()
    rhs = backward.u[:n, -1]
    discrepancy = float(np.max(np.abs(lhs - rhs)))
    combined = forward.truncation_bound + backward.truncation_bound
    logger.info("forward/backward discrepancy %.3e (bound %.3e)", discrepancy, combined)

    return EquivalenceReport(
        theta=theta,
        theta_star=star_spec.theta,
        n=n,
        max_discrepancy=discrepancy,
        forward_bound=forward.truncation_bound,
        backward_bound=backward.truncation_bound,
        combined_bound=combined,
    )
