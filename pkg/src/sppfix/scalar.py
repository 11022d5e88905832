"""Scalar fields the iteration engines are parameterized over.

Two realizations exist: :class:`RationalField` (exact, backed by ``gmpy2.mpq``)
and :class:`BigFloatField` (binary floating point with a configurable mantissa,
backed by a private ``mpmath`` context so that different precisions never
interfere).  Vectors are plain lists of field elements.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Any, Sequence

import gmpy2
import mpmath
from mpmath import libmp

DEFAULT_BITS = 256
MIN_FLOAT_BITS = 64

# certified-bit count reported for zero-width intervals in exact mode
EXACT_BITS_CAP = 1 << 16


def to_fraction(value: Any) -> Fraction:
    """Exact rational value of an int, Fraction, mpq, float, decimal string or mpf."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, type(gmpy2.mpq())):
        return Fraction(int(value.numerator), int(value.denominator))
    if isinstance(value, type(gmpy2.mpz())):
        return Fraction(int(value))
    if hasattr(value, "_mpf_"):
        man, exp = value.man_exp
        man = int(man)
        if exp >= 0:
            return Fraction(man << exp)
        return Fraction(man, 1 << -exp)
    if isinstance(value, float):
        # the shortest repr is what the caller typed
        return Fraction(repr(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot interpret {value!r} as a rational")


class RationalField:
    """Exact rational arithmetic."""

    exact = True
    mantissa_bits = None
    name = "rational"

    def __init__(self):
        self.zero = gmpy2.mpq(0)
        self.one = gmpy2.mpq(1)
        self.singular_tol = self.zero
        self.clamp_tol = self.zero
        self.divergence_guard = gmpy2.mpq(2) ** 1024
        self.bits_cap = EXACT_BITS_CAP

    def __repr__(self) -> str:
        return "RationalField()"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, RationalField)

    def __hash__(self) -> int:
        return hash("rational")

    def convert(self, value: Any, rounding: str = "n"):
        if isinstance(value, type(self.zero)):
            return value
        f = to_fraction(value)
        return gmpy2.mpq(f.numerator, f.denominator)

    def vector(self, values: Sequence[Any]) -> list:
        return [self.convert(v) for v in values]

    def to_fraction(self, value: Any) -> Fraction:
        return to_fraction(value)

    def sqrt(self, value, rounding: str = "u", bits: int = DEFAULT_BITS):
        """Square root rounded to a dyadic rational with ``bits`` fractional bits.

        ``rounding="u"`` returns an upper bound, ``"d"`` a lower bound; exact
        squares are returned exactly.
        """
        value = self.convert(value)
        if value < 0:
            raise ValueError("square root of a negative number")
        p, q = int(value.numerator), int(value.denominator)
        # sqrt(p/q) = sqrt(p*q)/q
        scale = 1 << bits
        radicand = p * q * scale * scale
        root = math.isqrt(radicand)
        if root * root != radicand and rounding == "u":
            root += 1
        return gmpy2.mpq(root, q * scale)

    def fmt(self, value) -> str:
        value = self.convert(value)
        if value.denominator == 1:
            return str(value.numerator)
        return f"{value.numerator}/{value.denominator}"

    def slack(self, value) -> Any:
        return self.zero

    def leq(self, a, b) -> bool:
        return a <= b

    def spec(self) -> str:
        return "rational"


class BigFloatField:
    """Binary floating point with ``bits`` mantissa bits, round-to-nearest."""

    exact = False
    name = "float"

    def __init__(self, bits: int = DEFAULT_BITS):
        if bits < 2:
            raise ValueError("mantissa width must be at least 2 bits")
        self.mantissa_bits = bits
        self.ctx = mpmath.MPContext()
        self.ctx.prec = bits
        self.zero = self.ctx.mpf(0)
        self.one = self.ctx.mpf(1)
        self.singular_tol = self.ctx.ldexp(self.one, -(bits // 2))
        self.clamp_tol = self.singular_tol
        self.divergence_guard = self.ctx.mpf(10) ** 30
        self.bits_cap = bits
        self._ulp_slack = 4

    def __repr__(self) -> str:
        return f"BigFloatField({self.mantissa_bits})"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, BigFloatField) and other.mantissa_bits == self.mantissa_bits

    def __hash__(self) -> int:
        return hash(("float", self.mantissa_bits))

    def convert(self, value: Any, rounding: str = "n"):
        if hasattr(value, "_mpf_") and getattr(value, "context", None) is self.ctx:
            return value
        if isinstance(value, str):
            return self.ctx.mpf(value.strip())
        f = to_fraction(value)
        return self.ctx.make_mpf(
            libmp.from_rational(f.numerator, f.denominator, self.mantissa_bits, rounding)
        )

    def vector(self, values: Sequence[Any]) -> list:
        return [self.convert(v) for v in values]

    def to_fraction(self, value: Any) -> Fraction:
        return to_fraction(value)

    def sqrt(self, value, rounding: str = "n", bits: int | None = None):
        return self.ctx.sqrt(value)

    def fmt(self, value) -> str:
        """Shortest decimal string that reads back to the same binary value."""
        value = self.convert(value)
        if not value:
            return "0.0"
        lo, hi = 1, int(self.mantissa_bits * 0.30103) + 3
        while lo < hi:
            mid = (lo + hi) // 2
            if self.ctx.mpf(libmp.to_str(value._mpf_, mid)) == value:
                hi = mid
            else:
                lo = mid + 1
        return libmp.to_str(value._mpf_, lo)

    def ulp(self, value):
        value = abs(value)
        if not value:
            return self.ctx.ldexp(self.one, -self.mantissa_bits)
        _, e = self.ctx.frexp(value)
        return self.ctx.ldexp(self.one, int(e) - self.mantissa_bits)

    def slack(self, value):
        return self._ulp_slack * self.ulp(value)

    def leq(self, a, b) -> bool:
        """``a <= b`` up to a few ulps of the larger magnitude."""
        return a <= b + self.slack(max(abs(a), abs(b)))

    def spec(self) -> str:
        return f"float:{self.mantissa_bits}"


Field = RationalField | BigFloatField

RATIONAL = RationalField()


def parse_field(spec: str) -> Field:
    """Build a field from ``"rational"`` or ``"float:<bits>"``."""
    spec = spec.strip().lower()
    if spec in ("rational", "exact"):
        return RATIONAL
    if spec == "float":
        return BigFloatField(DEFAULT_BITS)
    if spec.startswith("float:"):
        try:
            bits = int(spec.split(":", 1)[1])
        except ValueError:
            raise ValueError(f"bad scalar spec {spec!r}") from None
        if bits < MIN_FLOAT_BITS:
            raise ValueError(f"float mode needs at least {MIN_FLOAT_BITS} mantissa bits")
        return BigFloatField(bits)
    raise ValueError(f"unknown scalar spec {spec!r} (expected 'rational' or 'float:<bits>')")


def max_norm(values: Sequence[Any], field: Field):
    best = field.zero
    for v in values:
        a = abs(v)
        if a > best:
            best = a
    return best
