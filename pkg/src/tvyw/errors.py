"""Exception types shared across the package.

All failures that should map to the CLI's "numerical runtime failure" exit
code derive from :class:`NumericalError`; configuration and usage mistakes
derive from :class:`ConfigError`.
"""


class TvywError(Exception):
    """Base class for package exceptions."""


class ConfigError(TvywError):
    """Invalid configuration, arguments, or input files."""


class NumericalError(TvywError):
    """A numerical operation failed at runtime."""


class ZeroTaper(ConfigError):
    """The raw taper is (numerically) zero and cannot be normalized."""


class DimensionMismatch(ConfigError):
    """Vector or matrix dimensions are inconsistent."""


class NumericalSingularity(NumericalError):
    """A linear system was singular or its solution failed validation."""


class WindowOutOfRange(NumericalError):
    """A requested data window extends beyond the available samples."""


class OddBandwidth(ConfigError):
    """Bandwidths must be even so the window can be centered."""


class InvalidPacf(ConfigError):
    """Partial autocorrelations must lie strictly inside (-1, 1)."""


class NonFiniteSample(NumericalError):
    """Simulation produced a non-finite sample."""


class DegenerateRegression(NumericalError):
    """Too few points, or non-positive losses, for a log-log rate fit."""
