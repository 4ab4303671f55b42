"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Bad user input: schema, config, or argument problems."""


class DegenerateNetworkError(ValueError):
    """Pruning removed every row and column; no network is left to analyze."""


class DegenerateSpectrumError(RuntimeError):
    """The second-largest eigenvalue is not separated, so the score
    eigenvector is not unique up to sign."""


class NumericError(ArithmeticError):
    """A solver produced NaN or infinity; the input is numerically unusable."""
