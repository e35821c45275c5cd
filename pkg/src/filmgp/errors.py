"""Exception taxonomy shared across the package.

The hierarchy separates bad inputs/data (measurement and data errors) from
numerical failures, so batch front ends can map them to distinct exit codes.
"""


class FilmgpError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(FilmgpError):
    """Malformed or inconsistent run configuration."""


class DataError(FilmgpError):
    """Invalid measurements or insufficient data."""


class InvalidMeasurementError(DataError):
    """A measured value is mathematically impossible under the forward model."""


class MeasurementOutOfRangeError(DataError):
    """A measurement falls outside the method's usable band."""


class ContactError(DataError):
    """Film thickness at or below zero: shaft/bore contact."""


class NoMeasurementError(DataError):
    """An inversion was requested with no measurement to invert."""


class InconsistentDipsError(DataError):
    """Resonant dips disagree beyond their stated uncertainty."""


class InsufficientDataError(DataError):
    """Too few observations survive for the requested operation."""


class NumericalError(FilmgpError):
    """Numerical failure in fitting or optimization."""


class IllConditionedKernelError(NumericalError):
    """Covariance factorization failed even after the jitter escalation."""


class NoFeasiblePointError(NumericalError):
    """Every objective evaluation in an optimization run was non-finite."""


class ImplausibleFilmError(NumericalError):
    """Fitted film minimum is outside the physically admissible range."""
