"""Exception types shared by the package."""


class SGPEError(Exception):
    """Base class for all errors raised by ``sgpe``."""


class ConfigurationError(SGPEError, ValueError):
    """A parameter or configuration value is out of its allowed range."""


class ContractError(SGPEError, ValueError):
    """Inputs have inconsistent shapes or violate a precondition."""


class NumericalError(SGPEError, ArithmeticError):
    """A numerical kernel failed (singular system, failed eigensolve, ...)."""


class StepError(NumericalError):
    """A time step did not complete, e.g. the fixed-point iteration stalled.

    ``step`` is set by :func:`sgpe.schemes.evolve` once the failing step index
    is known; ``iterations`` and ``residuals`` carry fixed-point diagnostics.
    """

    def __init__(self, message, *, step=None, iterations=None, residuals=None):
        super().__init__(message)
        self.step = step
        self.iterations = iterations
        self.residuals = residuals or []

    def __str__(self):
        msg = super().__str__()
        if self.step is not None:
            msg = f"step {self.step}: {msg}"
        return msg


class EstimationError(SGPEError, ValueError):
    """Not enough usable data points to estimate a convergence order."""
