"""Reference systems used by the CLI, the tests and the benchmarks."""

from __future__ import annotations

from fractions import Fraction

from .core.dsl import parse_system
from .core.system import Polynomial, SppSystem

BACK_BUTTON_TEXT = """\
X1 = 0.4*X2*X1 + 0.6
X2 = 0.3*X1*X2 + 0.4*X3*X2 + 0.3
X3 = 0.3*X1*X3 + 0.7
"""

TWO_DIM_TEXT = """\
X = 0.5*X^2 + 0.25*Y^2 + 0.25
Y = 0.25*X + 0.25*X*Y + 0.25*Y^2 + 0.25
"""

HALF_HALF_TEXT = "X = 0.5*X^2 + 0.5\n"


def back_button() -> SppSystem:
    """Revocation system of the three-page back-button process."""
    return parse_system(BACK_BUTTON_TEXT)


def two_dim() -> SppSystem:
    """Two-variable strongly connected quadratic system with a closed-form surface."""
    return parse_system(TWO_DIM_TEXT)


def half_half() -> SppSystem:
    """``X = X^2/2 + 1/2``: critical, ``mu f = 1``, Newton iterates ``1 - 2^-k``."""
    return parse_system(HALF_HALF_TEXT)


def worst_case(n: int) -> SppSystem:
    """Chain of ``n`` critical quadratic equations on which Newton is slowest.

    ``X1 = 1/2 + X1^2/2`` and ``Xj = Xj-1^2/4 + Xj-1*Xj/2 + Xj^2/4``; the
    least fixed point is the all-ones vector and component ``n`` gains
    fewer than ``k`` bits in ``k * 2^(n-1)`` Newton steps.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    half, quarter = Fraction(1, 2), Fraction(1, 4)
    eqs = [Polynomial.build([(half, [0, 0])], half)]
    for j in range(1, n):
        eqs.append(Polynomial.build([(quarter, [j - 1, j - 1]), (half, [j - 1, j]), (quarter, [j, j])]))
    return SppSystem(tuple(f"X{i + 1}" for i in range(n)), tuple(eqs))


def back_button_model():
    from .frontends import BackButtonModel

    return BackButtonModel.build(
        ["1", "2", "3"],
        {"1": "0.6", "2": "0.3", "3": "0.7"},
        {("1", "2"): "0.4", ("2", "1"): "0.3", ("2", "3"): "0.4", ("3", "1"): "0.3"},
    )
