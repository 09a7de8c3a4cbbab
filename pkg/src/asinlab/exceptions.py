"""Exception hierarchy for asinlab."""


class AsinError(Exception):
    """Base class for all asinlab errors."""


class ConfigurationError(AsinError, ValueError):
    """Invalid configuration value or key."""

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


class DimensionError(AsinError, ValueError):
    pass


class DomainError(AsinError, ValueError):
    pass


class MethodMismatchError(AsinError, ValueError):
    pass


class DegenerateDataError(AsinError, ValueError):
    """Inputs that make the requested statistic or fit undefined."""


class InsufficientDataError(AsinError, ValueError):
    pass


class DivergenceError(AsinError, ArithmeticError):
    def __init__(self, message, epoch=None):
        super().__init__(message)
        self.epoch = epoch


class NumericalStepError(AsinError, ArithmeticError):
    """Finite-difference step too small for the working precision."""


class DegenerateLikelihoodError(AsinError, ValueError):
    pass
