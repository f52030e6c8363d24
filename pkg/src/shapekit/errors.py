"""Exception taxonomy shared by all shapekit modules."""


class ShapekitError(Exception):
    """Base class for every error raised by this package."""


class DomainError(ShapekitError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class DimensionError(ShapekitError, ValueError):
    """An array has an incompatible or non-square shape."""


class DataError(ShapekitError, ValueError):
    """A dataset violates a precondition (zero vectors, non-finite entries, ...)."""


class DegenerateDataError(DataError):
    """A dataset is degenerate for the requested estimator (e.g. zero top-left moment)."""


class NumericError(ShapekitError, ArithmeticError):
    """A numerical routine failed to reach its accuracy target."""

    def __init__(self, message, value=None, residual=None):
        super().__init__(message)
        self.value = value
        self.residual = residual


class SingularMatrixError(ShapekitError):
    """A matrix that must be positive definite is numerically singular."""


class ConvergenceError(ShapekitError, RuntimeError):
    """An iterative procedure exhausted its iteration budget."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class PerturbationError(ShapekitError):
    """No usable random perturbation could be produced for the one-step update."""


class IllConditionedError(ShapekitError):
    """A linear system is too ill-conditioned to solve reliably."""


class ConfigError(ShapekitError, ValueError):
    """An experiment configuration is invalid."""


class ExperimentError(ShapekitError, RuntimeError):
    """A Monte Carlo experiment failed as a whole (e.g. excessive per-trial failures)."""
