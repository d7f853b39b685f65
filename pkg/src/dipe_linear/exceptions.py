"""Exception hierarchy.

Every error raised by the package derives from :class:`DiPEError`. The CLI maps
the three families below onto its exit codes (config 2, data 3, numeric 4).
"""


class DiPEError(Exception):
    """Base class for all package errors."""


class ConfigError(DiPEError, ValueError):
    """Invalid configuration, shape or argument."""


class DimensionError(ConfigError):
    pass


class ParameterError(ConfigError):
    pass


class SymmetryError(ConfigError):
    """A one-sided spectrum whose DC/Nyquist bins are not real."""


class UnsupportedConfigError(ConfigError):
    pass


class DataError(DiPEError, ValueError):
    """Bad or insufficient input data."""


class IngestionError(DataError):
    pass


class NumericError(DiPEError, ArithmeticError):
    """Non-finite values produced during computation."""


class DegenerateWeightsError(NumericError):
    pass
