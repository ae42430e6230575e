"""Exception hierarchy shared by all fracprop modules."""

from __future__ import annotations


class FracpropError(Exception):
    """Base class for every error raised by this package."""


class NumericalError(FracpropError):
    """A numerical routine could not deliver a result."""


class NonConvergence(NumericalError):
    """Power series did not reach its stopping rule within the term cap."""


class PoleProximity(NumericalError):
    """The Mittag-Leffler kernel denominator is (numerically) zero."""


class QuadratureFailure(NumericalError):
    """Adaptive quadrature exceeded its subdivision depth."""


class DegenerateGrid(FracpropError, ValueError):
    pass


class NotHermitian(FracpropError, ValueError):
    pass


class NotPositive(FracpropError, ValueError):
    pass


class DimensionMismatch(FracpropError, ValueError):
    pass


class ConfigError(FracpropError, ValueError):
    """Invalid run configuration; ``field`` names the offending option."""

    def __init__(self, field: str, message: str) -> None:
        super().__init__(f"{field}: {message}")
        self.field = field
