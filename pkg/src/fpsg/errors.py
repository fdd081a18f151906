"""Exception types raised by the solver."""


class ConfigurationError(ValueError):
    """Invalid sizes or parameters for a discretization object."""


class ModelParameterError(ValueError):
    """A model parameter function takes a forbidden value."""


class ModelUsageError(TypeError):
    """A model was called without the data it needs (e.g. a nonlocal drift without f)."""


class NotAvailableError(LookupError):
    """No closed form exists for the requested quantity."""


class DegenerateStateError(ArithmeticError):
    """A density with zero or negative mass where a positive mass is required."""


class SingularDiffusionError(ArithmeticError):
    """Diffusion vanishes at an interior node."""


class UndefinedMetricError(ArithmeticError):
    """A relative metric with a vanishing denominator."""


class StepFailure(RuntimeError):
    """A time step could not be completed (singular implicit solve)."""
