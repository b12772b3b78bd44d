"""explosive-ar - stationary solutions of purely explosive autoregressions."""

__version__ = "0.1.0"
