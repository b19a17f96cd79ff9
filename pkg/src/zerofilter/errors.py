"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid grid, parameter, or configuration value."""


class SymmetryError(ValueError):
    """Fourier coefficients are not conjugate-symmetric, so the field is not real."""


class BlowUpError(RuntimeError):
    """Non-finite values appeared during time integration."""

    def __init__(self, message, time):
        super().__init__(f"{message} (t = {time:.6g})")
        self.message = message
        self.time = time


class ImminentShockError(BlowUpError):
    """The gradient grew past the monitoring threshold; a shock is about to form."""
