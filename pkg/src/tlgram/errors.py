"""Exceptions shared by the oracle, the models and the command line."""


class BudgetExceededError(ValueError):
    """A dense realization would exceed the strand budget."""


class RankAmbiguityError(ArithmeticError):
    """Singular values straddle the kernel threshold without a clear spectral gap."""
