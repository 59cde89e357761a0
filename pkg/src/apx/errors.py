"""Exception types shared across the package."""


class ApxError(Exception):
    """Base class for all library errors."""


class InputError(ApxError, ValueError):
    """Rejected input: non-finite samples, bad parameters, unknown tags."""


class AliasingError(ApxError, ValueError):
    """A grid is too coarse to represent a polynomial exactly."""


class MissingFrequencyError(ApxError, ValueError):
    """A multiplier does not cover every frequency of its argument."""


class WeightError(ApxError, ValueError):
    """Invalid weight descriptor (negative values, non-integrable exponent)."""


class DivergenceError(ApxError, ArithmeticError):
    """An integral diverges, typically at a non-integrable singularity."""


class PoleError(ApxError, ArithmeticError):
    """Evaluation exactly at a singular point with a negative exponent."""


class ClassificationError(ApxError):
    """A weight is outside the class required by a constant or check."""


class SolverError(ApxError, RuntimeError):
    """An iterative solver failed to converge.

    Attributes
    ----------
    diagnostics : dict
        Iteration count, last objective values and the offending parameters.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class ConfigError(ApxError, ValueError):
    """Malformed experiment configuration or inadmissible check spec."""
