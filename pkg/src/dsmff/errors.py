"""Exception types raised across the package."""


class DSMError(Exception):
    """Base class for all package errors."""


class InvalidArgument(DSMError, ValueError):
    pass


class DegenerateInput(DSMError, ValueError):
    """Input is well formed but carries no usable information (all-zero grid, empty spectrum, ...)."""


class ConfigurationError(DSMError, ValueError):
    pass


class NumericalFailure(DSMError, RuntimeError):
    """A decomposition did not converge or failed its residual contract."""

    def __init__(self, message, residual=float("nan")):
        super().__init__(f"{message} (residual={residual:.3e})")
        self.residual = residual
