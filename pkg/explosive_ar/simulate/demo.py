"""Forward iteration of an explosive recursion from a chosen initial state."""

import logging
from typing import Literal, Optional, Sequence

import numpy as np

from ..companion import build_companion
from ..config import Settings
from ..errors import BadSpec, DimensionMismatch
from ..models import ExplosiveTrajectory, ModelSpec
from .noise import generate_noise
from .stationary import _require_explosive, simulate_stationary

logger = logging.getLogger(__name__)

InitialMode = Literal["stationary", "custom", "zero"]


def explosive_demo(
    spec: ModelSpec,
    u0_mode: InitialMode,
    n: int,
    seed: int,
    u0: Optional[Sequence[float]] = None,
    tol: Optional[float] = None,
    settings: Optional[Settings] = None,
) -> ExplosiveTrajectory:
    """
    Iterate ``U_k = B U_{k-1} + W_k`` and report ``B^{-k} U_k`` for ``k = 0..n``.

    From the stationary initial state the scaled trajectory vanishes; from any
    other state it converges to ``U_0 + sum_j B^{-j} W_j`` while ``U_k`` blows up.
    """
    settings = settings or Settings()
    if n < 1:
        raise BadSpec(f"n must be positive, got {n}")
    pair = build_companion(spec, settings)
    _require_explosive(pair)
    d = spec.d

    bound = 0.0
    if u0_mode == "stationary":
        path = simulate_stationary(spec, n, seed, tol, settings)
        start = np.array(path.u[0])
        z = np.array(path.z)
        bound = path.truncation_bound
    elif u0_mode in ("custom", "zero"):
        if u0_mode == "zero":
            start = np.zeros(d)
        else:
            if u0 is None:
                raise BadSpec("custom mode needs an initial vector u0")
            start = np.asarray(u0, dtype=float)
            if start.shape != (d,):
                raise DimensionMismatch(f"u0 must have length {d}, got shape {start.shape}")
        z = generate_noise(spec.noise, n, seed).values
    else:
        raise BadSpec(f"Unknown initial mode: {u0_mode}")

    # Extended precision where the platform has it; the scaled states stay O(1)
    b = pair.b.astype(np.longdouble)
    b_inv = pair.b_inv.astype(np.longdouble)
    state = start.astype(np.longdouble)
    inv_power = np.eye(d, dtype=np.longdouble)
    first_col = np.zeros(d, dtype=np.longdouble)
    first_col[0] = 1

    scaled = np.empty((n + 1, d))
    norms = np.empty(n + 1)
    scaled[0] = start
    norms[0] = np.linalg.norm(start)
    current = start.astype(np.longdouble)
    saturated_at = None

    for k in range(1, n + 1):
        inv_power = b_inv @ inv_power
        first_col = b_inv @ first_col
        if saturated_at is None:
            state = b @ state
            state[0] += z[k - 1]
            norm = float(np.hypot.reduce(np.abs(state)))
            if not np.isfinite(norm) or norm > settings.saturation_norm:
                saturated_at = k
                logger.debug("state norm saturated at k=%d", k)
            else:
                current = inv_power @ state
        if saturated_at is not None:
            # telescoping: B^{-k}U_k = B^{-(k-1)}U_{k-1} + B^{-k} e_1 Z_k
            current = current + first_col * z[k - 1]
            norm = settings.saturation_norm
        scaled[k] = current.astype(float)
        norms[k] = norm

    return ExplosiveTrajectory(
        mode=u0_mode,
        u0=start,
        scaled=scaled,
        state_norms=norms,
        saturated=saturated_at is not None,
        saturated_at=saturated_at,
        truncation_bound=bound,
    )
