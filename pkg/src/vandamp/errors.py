"""Exception types raised across the package."""


class VandampError(Exception):
    """Base class for all package errors."""


class ConfigError(VandampError):
    """Invalid scenario configuration; carries every problem found."""

    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class PreconditionError(VandampError, ValueError):
    pass


class DivergentIntegralError(VandampError):
    pass


class MinimizerError(VandampError):
    def __init__(self, message, iterate, grad_norm):
        super().__init__(f"{message} (|grad| = {grad_norm:.3e})")
        self.iterate = iterate
        self.grad_norm = grad_norm


class StabilityError(VandampError):
    """Raised when the integrator produces a non-finite state.

    ``record`` holds every sample computed before the blow-up.
    """

    def __init__(self, message, step=None, t=None, record=None):
        super().__init__(message)
        self.step = step
        self.t = t
        self.record = record
