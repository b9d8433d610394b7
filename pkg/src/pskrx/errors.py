class PskrxError(Exception):
    """Base class for errors raised by this package."""


class CapacityError(PskrxError, ValueError):
    """Requested pattern enumeration exceeds the supported mode count."""


class QuadratureError(PskrxError, ArithmeticError):
    """Numerical integration failed to reach its tolerance."""

    def __init__(self, message, error_estimate):
        super().__init__(f"{message} (achieved error estimate {error_estimate:.3g})")
        self.error_estimate = error_estimate


class NumericalError(PskrxError, ArithmeticError):
    """A computed quantity left its mathematically admissible range."""
