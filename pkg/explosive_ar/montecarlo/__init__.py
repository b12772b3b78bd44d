"""Monte Carlo replication engine and diagnostics."""

from .diagnostics import (
    covariance_distance,
    ergodicity_diagnostics,
    ks_threshold,
    mean_zero_check,
    normality_diagnostics,
    strong_law_diagnostics,
)
from .engine import compute_statistic, convergence_trend, run_experiment, target_covariance
from .seeds import mix_seed

__all__ = [
    "run_experiment",
    "compute_statistic",
    "target_covariance",
    "convergence_trend",
    "covariance_distance",
    "normality_diagnostics",
    "ks_threshold",
    "mean_zero_check",
    "strong_law_diagnostics",
    "ergodicity_diagnostics",
    "mix_seed",
]
