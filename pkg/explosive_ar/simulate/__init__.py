"""Path simulation: noise, the stationary explosive solution, forward AR and divergence demo."""

from .demo import explosive_demo
from .forward import (
    forward_backward_equivalence,
    forward_state_covariance,
    simulate_forward_ar,
)
from .noise import generate_noise
from .stationary import (
    recursion_residual,
    simulate_stationary,
    state_matrix,
    stationary_from_noise,
    truncation_horizon,
)

__all__ = [
    "generate_noise",
    "truncation_horizon",
    "simulate_stationary",
    "stationary_from_noise",
    "state_matrix",
    "recursion_residual",
    "simulate_forward_ar",
    "forward_state_covariance",
    "forward_backward_equivalence",
    "explosive_demo",
]
