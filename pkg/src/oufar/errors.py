"""Exception types shared across the package."""


class DomainError(ValueError):
    """A parameter is outside the mathematical domain of an operation."""


class GridMismatch(ValueError):
    """Time or segment grids are incompatible (misaligned step, length, or nodes)."""


class ZeroDenominator(ArithmeticError):
    """The estimator denominator vanished (identically-zero path)."""
