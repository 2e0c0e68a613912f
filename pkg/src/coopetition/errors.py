"""Exception types raised across the package."""


class ParameterError(ValueError):
    """An argument violates a documented precondition."""


class UnsupportedConfigurationError(ValueError):
    """The inputs are valid but fall outside what the solver handles.

    Raised, for example, when a budget is below the surplus threshold so the
    per-node closed-form equilibrium no longer applies.
    """


class InapplicableRegimeError(ValueError):
    """A result was requested for a regime where it does not hold."""


class NumericalQualityError(ArithmeticError):
    """A computed quantity drifted further than floating-point noise allows."""
