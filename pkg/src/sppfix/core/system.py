"""Polynomial systems with nonnegative coefficients and their evaluation."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Mapping, Sequence

from ..errors import DimensionMismatch, EmptySystem, SppError
from ..scalar import RATIONAL, Field, to_fraction


@dataclass(frozen=True)
class Monomial:
    """``coefficient * prod(X_j ** d)`` with ``coefficient > 0``.

    ``powers`` keeps the factor order used for display and for the quadratic
    rewrite; equality ignores that order.
    """

    coefficient: Fraction
    powers: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if self.coefficient <= 0:
            raise ValueError("monomial coefficients must be positive")
        seen = set()
        for var, deg in self.powers:
            if deg < 1:
                raise ValueError("exponents must be >= 1")
            if var in seen:
                raise ValueError(f"variable index {var} repeated in monomial")
            seen.add(var)

    @property
    def key(self) -> tuple[tuple[int, int], ...]:
        return tuple(sorted(self.powers))

    @property
    def degree(self) -> int:
        return sum(d for _, d in self.powers)

    def factors(self) -> list[int]:
        """Variable indices with multiplicity, in display order."""
        out = []
        for var, deg in self.powers:
            out.extend([var] * deg)
        return out

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Monomial):
            return NotImplemented
        return self.coefficient == other.coefficient and self.key == other.key

    def __hash__(self) -> int:
        return hash((self.coefficient, self.key))


def powers_from_factors(factors: Iterable[int]) -> tuple[tuple[int, int], ...]:
    counts: dict[int, int] = {}
    for var in factors:
        counts[var] = counts.get(var, 0) + 1
    return tuple(counts.items())


@dataclass(frozen=True, eq=False)
class Polynomial:
    monomials: tuple[Monomial, ...] = ()
    constant: Fraction = Fraction(0)

    def __post_init__(self):
        if self.constant < 0:
            raise ValueError("constant term must be nonnegative")
        merged: dict[tuple, Monomial] = {}
        for mono in self.monomials:
            prev = merged.get(mono.key)
            if prev is None:
                merged[mono.key] = mono
            else:
                merged[mono.key] = Monomial(prev.coefficient + mono.coefficient, prev.powers)
        object.__setattr__(self, "monomials", tuple(merged.values()))
        object.__setattr__(self, "constant", Fraction(self.constant))

    @classmethod
    def build(cls, terms: Iterable[tuple[Any, Iterable[int]]], constant: Any = 0) -> "Polynomial":
        """Build from ``(coefficient, factor list)`` pairs; zero terms are dropped."""
        monos = []
        const = to_fraction(constant)
        for coef, factors in terms:
            coef = to_fraction(coef)
            factors = list(factors)
            if coef == 0:
                continue
            if not factors:
                const += coef
            else:
                monos.append(Monomial(coef, powers_from_factors(factors)))
        return cls(tuple(monos), const)

    def as_dict(self) -> dict[tuple, Fraction]:
        d = {m.key: m.coefficient for m in self.monomials}
        if self.constant:
            d[()] = self.constant
        return d

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.as_dict() == other.as_dict()

    def __hash__(self) -> int:
        return hash(frozenset(self.as_dict().items()))

    @property
    def degree(self) -> int:
        return max((m.degree for m in self.monomials), default=0)

    def variables(self) -> set[int]:
        return {v for m in self.monomials for v, _ in m.powers}

    def coefficients(self) -> list[Fraction]:
        out = [m.coefficient for m in self.monomials]
        if self.constant:
            out.append(self.constant)
        return out


@dataclass(frozen=True, eq=False)
class SppSystem:
    """The right-hand side ``f`` of ``X = f(X)`` over named variables."""

    variables: tuple[str, ...]
    equations: tuple[Polynomial, ...]
    _compiled: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "equations", tuple(self.equations))
        if len(self.variables) != len(self.equations):
            raise DimensionMismatch(
                f"{len(self.variables)} variables but {len(self.equations)} equations"
            )
        if len(set(self.variables)) != len(self.variables):
            raise SppError("duplicate variable names")
        n = len(self.variables)
        for poly in self.equations:
            for var in poly.variables():
                if not 0 <= var < n:
                    raise DimensionMismatch(f"variable index {var} out of range for n={n}")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SppSystem):
            return NotImplemented
        return self.variables == other.variables and self.equations == other.equations

    def __hash__(self) -> int:
        return hash((self.variables, self.equations))

    def __len__(self) -> int:
        return len(self.variables)

    @property
    def n(self) -> int:
        return len(self.variables)

    @property
    def degree(self) -> int:
        return max((p.degree for p in self.equations), default=0)

    def is_quadratic(self) -> bool:
        return self.degree <= 2

    def index(self, name: str) -> int:
        return self.variables.index(name)

    def depends_on(self, i: int) -> set[int]:
        """Components that ``f_i`` contains."""
        return self.equations[i].variables()

    def constants_positive(self) -> bool:
        """``f(0) > 0`` in every component."""
        return all(p.constant > 0 for p in self.equations)

    def compiled(self, fld: Field):
        """Per-field coefficient conversions, cached on the system."""
        comp = self._compiled.get(fld)
        if comp is None:
            comp = [
                (
                    fld.convert(p.constant),
                    [(fld.convert(m.coefficient), m.powers) for m in p.monomials],
                )
                for p in self.equations
            ]
            self._compiled[fld] = comp
        return comp

    def __str__(self) -> str:
        from .dsl import format_system

        return format_system(self)


def _check_dim(sys: SppSystem, x: Sequence[Any]) -> None:
    if len(x) != sys.n:
        raise DimensionMismatch(f"vector of length {len(x)} for a system with n={sys.n}")


def _power(base, exp: int):
    out = base
    for _ in range(exp - 1):
        out = out * base
    return out


def evaluate(sys: SppSystem, x: Sequence[Any], fld: Field = RATIONAL) -> list:
    """``f(x)`` computed in ``fld``; exact when ``fld`` is rational."""
    _check_dim(sys, x)
    x = fld.vector(x)
    out = []
    for const, terms in sys.compiled(fld):
        acc = const
        for coef, powers in terms:
            t = coef
            for var, deg in powers:
                t = t * _power(x[var], deg)
            acc = acc + t
        out.append(acc)
    return out


def evaluate_component(sys: SppSystem, i: int, x: Sequence[Any], fld: Field = RATIONAL):
    const, terms = sys.compiled(fld)[i]
    acc = const
    for coef, powers in terms:
        t = coef
        for var, deg in powers:
            t = t * _power(x[var], deg)
        acc = acc + t
    return acc


def jacobian_at(sys: SppSystem, x: Sequence[Any], fld: Field = RATIONAL) -> list[list]:
    """Matrix of partial derivatives ``df_i/dX_j`` at ``x``."""
    _check_dim(sys, x)
    x = fld.vector(x)
    n = sys.n
    jac = [[fld.zero] * n for _ in range(n)]
    for i, (_, terms) in enumerate(sys.compiled(fld)):
        row = jac[i]
        for coef, powers in terms:
            for k, (var, deg) in enumerate(powers):
                t = coef * deg
                if deg > 1:
                    t = t * _power(x[var], deg - 1)
                for k2, (var2, deg2) in enumerate(powers):
                    if k2 != k:
                        t = t * _power(x[var2], deg2)
                row[var] = row[var] + t
    return jac


def residual(sys: SppSystem, x: Sequence[Any], fld: Field = RATIONAL):
    """``max_i |f_i(x) - x_i|``."""
    fx = evaluate(sys, x, fld)
    x = fld.vector(x)
    best = fld.zero
    for a, b in zip(fx, x):
        d = abs(a - b)
        if d > best:
            best = d
    return best


def substitute(sys: SppSystem, values: Mapping[int, Any], keep: Sequence[int] | None = None) -> SppSystem:
    """Fix the variables in ``values`` to exact rationals and keep equations ``keep``.

    The result is a system over the kept variables only; every kept equation
    may mention only kept or substituted variables.
    """
    fixed = {k: to_fraction(v) for k, v in values.items()}
    if keep is None:
        keep = [i for i in range(sys.n) if i not in fixed]
    keep = list(keep)
    remap = {old: new for new, old in enumerate(keep)}
    equations = []
    for i in keep:
        poly = sys.equations[i]
        terms = []
        for mono in poly.monomials:
            coef = mono.coefficient
            factors = []
            for var, deg in mono.powers:
                if var in fixed:
                    coef *= fixed[var] ** deg
                elif var in remap:
                    factors.extend([remap[var]] * deg)
                else:
                    raise SppError(
                        f"equation {sys.variables[i]} mentions {sys.variables[var]}, "
                        "which is neither kept nor substituted"
                    )
            terms.append((coef, factors))
        equations.append(Polynomial.build(terms, poly.constant))
    return SppSystem(tuple(sys.variables[i] for i in keep), tuple(equations))


@dataclass(frozen=True)
class CoefficientStats:
    c_min: Fraction
    m: int
    n: int
    max_degree: int


def coefficient_bits(c: Fraction) -> int:
    """``max(bits(p), bits(q))`` for ``c = p/q`` in lowest terms."""
    c = Fraction(c)
    return max(abs(c.numerator).bit_length(), c.denominator.bit_length())


def coefficient_stats(sys: SppSystem) -> CoefficientStats:
    coefs = [c for p in sys.equations for c in p.coefficients()]
    if sys.n == 0 or not coefs:
        raise EmptySystem("system has no nonzero coefficients")
    return CoefficientStats(
        c_min=min(coefs),
        m=max(coefficient_bits(c) for c in coefs),
        n=sys.n,
        max_degree=sys.degree,
    )
