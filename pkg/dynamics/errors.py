"""Exception hierarchy shared by the dynamics package."""

import math


class ChebydynError(Exception):
    """Base class for every error raised by the toolkit."""


class DegenerateParam(ChebydynError, ValueError):
    """The ratio K does not define a usable operator."""

    def __init__(self, K, reason: str):
        self.K = K
        self.reason = reason
        super().__init__(f"degenerate parameter K={format_ratio(K)} ({reason})")


class EvalIndeterminate(ChebydynError, ArithmeticError):
    """Numerator and denominator vanished together (0/0)."""


class NotAFixedPoint(ChebydynError, ValueError):
    """A multiplier was requested at a point the map does not fix."""


# Sentinel for stability values that have no meaning at a given K
UNDEFINED = math.nan


def is_undefined(value: float) -> bool:
    return isinstance(value, float) and math.isnan(value)


def format_ratio(K) -> str:
    """Render K compactly: real values without an imaginary part."""
    K = complex(K) + 0j
    re, im = K.real + 0.0, K.imag + 0.0
    if im == 0:
        return f"{re:g}"
    return f"{re:g}{im:+g}i"
