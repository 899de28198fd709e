"""Exception hierarchy; each class maps onto a CLI exit code."""


class DualHGError(Exception):
    exit_code = 1


class ConfigError(DualHGError, ValueError):
    """Invalid configuration value, unknown key, or bad usage."""

    exit_code = 2


class DataError(DualHGError, ValueError):
    """Malformed input file or a data-dependent infeasibility."""

    exit_code = 3


class ShapeError(DualHGError, ValueError):
    """Matrix dimensions do not line up."""

    exit_code = 3


class NumericError(DualHGError, FloatingPointError):
    """Non-finite values appeared during optimization."""

    exit_code = 4
