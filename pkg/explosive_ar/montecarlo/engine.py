"""Replication engine for the limit theorems of the stationary explosive model."""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from joblib import Parallel, delayed

from ..companion import build_companion, phi_map
from ..config import Settings
from ..errors import ExplosiveARError, NumericalFailure
from ..estimation import h_weighted_statistic, lse, target_cov_h
from ..models import (
    CompanionPair,
    ExperimentConfig,
    HorizonResult,
    MonteCarloReport,
    SimulationPath,
    TrendReport,
)
from ..moments import (
    asymptotic_cov_corrected,
    asymptotic_cov_lse,
    clt_mean_covariance,
    covariance_structure,
)
from ..simulate.noise import generate_noise
from ..simulate.stationary import stationary_from_noise, truncation_horizon
from .diagnostics import covariance_distance, ks_threshold, normality_diagnostics
from .seeds import mix_seed

logger = logging.getLogger(__name__)

DEFAULT_TREND_NS = (500, 2000, 8000)
TREND_SLACK = 0.02


@dataclass
class _Context:
    """Per-worker state shared by every replication of one experiment."""
    config: ExperimentConfig
    pair: CompanionPair
    horizon: HorizonResult
    k: int

    @classmethod
    def build(cls, config: ExperimentConfig, settings: Settings) -> "_Context":
        spec = config.spec
        pair = build_companion(spec, settings)
        tol = settings.default_tol if config.tol is None else config.tol
        horizon = truncation_horizon(pair, tol, spec.noise.sigma, settings)
        return cls(config=config, pair=pair, horizon=horizon, k=max(horizon.k, spec.d))

    def simulate(self, r: int) -> SimulationPath:
        spec = self.config.spec
        noise = generate_noise(spec.noise, self.config.n + self.k, mix_seed(self.config.base_seed, r))
        return stationary_from_noise(self.pair, noise, self.config.n, self.horizon)


def compute_statistic(config: ExperimentConfig, path: SimulationPath) -> np.ndarray:
    """The normalized statistic named by ``config.statistic`` on one path."""
    n = path.n
    theta = config.spec.theta
    if config.statistic == "mean_clt_u":
        return path.u[1:].sum(axis=0) / np.sqrt(n)
    if config.statistic == "mean_clt_y":
        return np.array([path.observed().sum() / np.sqrt(n)])
    if config.statistic == "h_clt":
        return h_weighted_statistic(path, config.h)

    result = lse(path, theta=theta, theta_star=phi_map(theta).value)
    if result.gram_singular:
        raise NumericalFailure("singular Gram matrix")
    if config.statistic == "lse_clt":
        return np.asarray(result.normalized_dev_star)
    return np.asarray(result.normalized_dev_theta)


def _run_chunk(config: ExperimentConfig, settings: Settings, start: int, stop: int) -> list:
    """Replications ``start..stop-1``; failures come back as ``(r, None, message)``."""
    context = _Context.build(config, settings)
    results = []
    for r in range(start, stop):
        try:
            value = compute_statistic(config, context.simulate(r))
            if not np.all(np.isfinite(value)):
                raise NumericalFailure("non-finite statistic")
            results.append((r, value, None))
        except ExplosiveARError as e:
            results.append((r, None, e.message))
    return results


def _chunks(total: int, parts: int) -> list[tuple[int, int]]:
    bounds = np.linspace(0, total, parts + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def target_covariance(
    config: ExperimentConfig,
    settings: Optional[Settings] = None,
) -> tuple[np.ndarray, Optional[np.ndarray]]:
    """Analytic limit covariance of the configured statistic (and SE when estimated)."""
    settings = settings or Settings()
    spec = config.spec
    if config.statistic == "mean_clt_u":
        return clt_mean_covariance(spec, settings).u_cov, None
    if config.statistic == "mean_clt_y":
        return np.array([[clt_mean_covariance(spec, settings).y_var]]), None

    cs = covariance_structure(spec, settings)
    if config.statistic == "h_clt":
        cov, se = target_cov_h(config.h, spec, seed=config.base_seed, structure=cs, settings=settings)
        return cov, (se if not config.h.linear else None)
    if config.statistic == "lse_clt":
        return asymptotic_cov_lse(spec, cs), None
    return asymptotic_cov_corrected(spec, cs), None


def run_experiment(config: ExperimentConfig, settings: Optional[Settings] = None) -> MonteCarloReport:
    """
    Run ``config.replications`` independent seeded simulations and compare the
    statistic's empirical law with its Gaussian limit.

    The report does not depend on ``config.workers``.
    """
    settings = settings or Settings()
    target, target_se = target_covariance(config, settings)
    total = config.replications
    logger.info(
        "Running %s: theta=%s n=%d R=%d workers=%d",
        config.statistic, config.spec.theta.tolist(), config.n, total, config.workers,
    )

    chunks = _chunks(total, min(config.workers, total))
    if config.workers > 1:
        parts = Parallel(n_jobs=config.workers)(
            delayed(_run_chunk)(config, settings, a, b) for a, b in chunks
        )
    else:
        parts = [_run_chunk(config, settings, a, b) for a, b in chunks]

    rows = [item for part in parts for item in part]
    values = [value for _, value, _ in rows if value is not None]
    failures = [(r, message) for r, value, message in rows if value is None]
    for r, message in failures:
        logger.debug("replication %d failed: %s", r, message)

    m = target.shape[0]
    samples = np.array(values).reshape(len(values), m)
    return summarize(config, samples, target, len(failures), settings, target_se)


def summarize(
    config: ExperimentConfig,
    samples: np.ndarray,
    target: np.ndarray,
    failures: int,
    settings: Optional[Settings] = None,
    target_se: Optional[np.ndarray] = None,
) -> MonteCarloReport:
    """Distances and the pass flag for a block of realized statistics."""
    settings = settings or Settings()
    ok = samples.shape[0]
    if ok >= 2:
        empirical = np.atleast_2d(np.cov(samples, rowvar=False, ddof=1))
        empirical = (empirical + empirical.T) / 2
        mean = samples.mean(axis=0)
    else:
        empirical = np.full_like(target, np.nan)
        mean = np.full(target.shape[0], np.nan)

    if ok >= 100:
        mahalanobis, marginal, rank = normality_diagnostics(samples, target)
    else:
        mahalanobis, marginal, rank = np.nan, np.full(target.shape[0], np.nan), 0

    threshold = ks_threshold(max(ok, 1), settings.ks_coefficient)
    cov_err = covariance_distance(empirical, target)
    tol_cov_rel = settings.tol_cov_rel if config.tol_cov_rel is None else config.tol_cov_rel
    finite_marginal = marginal[np.isfinite(marginal)]
    passed = bool(
        failures <= settings.failure_budget * config.replications
        and cov_err <= tol_cov_rel
        and mahalanobis <= threshold
        and np.all(finite_marginal <= threshold)
    )
    logger.info(
        "%s: cov_rel_err=%.4f mahalanobis_ks=%.4f threshold=%.4f failures=%d pass=%s",
        config.statistic, cov_err, mahalanobis, threshold, failures, passed,
    )
    return MonteCarloReport(
        statistic=config.statistic,
        replications=config.replications,
        failures=failures,
        samples=samples,
        empirical_mean=mean,
        empirical_cov=empirical,
        target_cov=target,
        cov_rel_err=cov_err,
        tol_cov_rel=tol_cov_rel,
        rank=rank,
        mahalanobis_ks=mahalanobis,
        marginal_ks=marginal,
        ks_threshold=threshold,
        passed=passed,
        target_se=target_se,
    )


def convergence_trend(
    config: ExperimentConfig,
    ns: Sequence[int] = DEFAULT_TREND_NS,
    settings: Optional[Settings] = None,
    slack: float = TREND_SLACK,
) -> TrendReport:
    """Covariance error of the experiment as ``n`` grows; advisory only."""
    errors = [
        run_experiment(config.model_copy(update={"n": int(n)}), settings).cov_rel_err for n in ns
    ]
    non_increasing = all(later <= earlier + slack for earlier, later in zip(errors, errors[1:]))
    if not non_increasing:
        logger.warning("covariance error is not decreasing in n: %s", errors)
    return TrendReport(
        statistic=config.statistic,
        ns=[int(n) for n in ns],
        cov_rel_errs=errors,
        slack=slack,
        non_increasing=non_increasing,
    )
