"""Seeded i.i.d. innovation draws."""

import numpy as np

from ..errors import BadSpec
from ..models import NoiseDraw, NoiseSpec

MAX_SEED = 2**64


def generate_noise(spec: NoiseSpec, length: int, seed: int) -> NoiseDraw:
    """
    Draw ``length`` centered innovations with variance ``spec.sigma2``.

    Identical ``(spec, length, seed)`` always give identical values.
    """
    spec.check()
    if length < 1:
        raise BadSpec(f"noise length must be positive, got {length}")
    if not 0 <= seed < MAX_SEED:
        raise BadSpec(f"seed must be an unsigned 64-bit integer, got {seed}")

    rng = np.random.default_rng(seed)
    sigma = spec.sigma
    if spec.family == "gaussian":
        values = rng.normal(0.0, sigma, size=length)
    elif spec.family == "rademacher":
        values = sigma * rng.choice(np.array([-1.0, 1.0]), size=length)
    elif spec.family == "uniform_centered":
        half_width = sigma * np.sqrt(3.0)
        values = rng.uniform(-half_width, half_width, size=length)
    elif spec.family == "student_t":
        nu = spec.df
        values = sigma * np.sqrt((nu - 2.0) / nu) * rng.standard_t(nu, size=length)
    else:
        raise BadSpec(f"Unknown noise family: {spec.family}")

    return NoiseDraw(values=values, seed=seed, spec=spec)
