"""Per-replication seed derivation (splitmix64 finalizer)."""

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
MIX_1 = 0xBF58476D1CE4E5B9
MIX_2 = 0x94D049BB133111EB


def splitmix64(value: int) -> int:
    z = value & MASK64
    z = ((z ^ (z >> 30)) * MIX_1) & MASK64
    z = ((z ^ (z >> 27)) * MIX_2) & MASK64
    return z ^ (z >> 31)


def mix_seed(base_seed: int, r: int) -> int:
    """Seed of replication ``r``; depends on nothing but ``(base_seed, r)``."""
    return splitmix64(base_seed + (r + 1) * GOLDEN_GAMMA)
