"""Exception hierarchy shared by every module."""


class FracDtnError(Exception):
    """Base class for all library errors."""


class DimensionError(FracDtnError, ValueError):
    """Vector or matrix sizes do not match the model."""


class SectorialityError(FracDtnError):
    """The operator's numerical range is not inside a sector of half-angle < pi/2."""


class QuadratureError(FracDtnError):
    """A quadrature rule failed its calibration check."""


class SpectralError(FracDtnError):
    """Eigendecomposition is defective or too ill-conditioned to be trusted."""


class SingularOperatorError(FracDtnError):
    """A linear system that must be solved is numerically singular."""


class ConvergenceError(FracDtnError):
    """An extrapolation or iterative process did not settle."""


class ConfigError(FracDtnError, ValueError):
    """Malformed study configuration or operator specification."""


class ParseError(ConfigError):
    """An input file or operator specification could not be parsed; the message names the location."""
