"""Rewriting an SPP into an equivalent system of degree at most two."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Sequence

from ..scalar import RATIONAL, Field
from .system import Monomial, Polynomial, SppSystem, powers_from_factors


@dataclass(frozen=True)
class QuadraticReduction:
    """``reduced`` has the original variables first, then one auxiliary per product.

    ``products[k] = (i, j)`` means auxiliary variable ``n + k`` stands for
    ``X_i * X_j`` where ``i`` and ``j`` index the reduced system (an auxiliary
    may refer to earlier auxiliaries).
    """

    original: SppSystem
    reduced: SppSystem
    products: tuple[tuple[int, int], ...]

    @property
    def n_original(self) -> int:
        return self.original.n

    def lift(self, x: Sequence[Any], fld: Field = RATIONAL) -> list:
        """Map a vector of the original system to the reduced one."""
        out = fld.vector(x)
        for i, j in self.products:
            out.append(out[i] * out[j])
        return out

    def project(self, y: Sequence[Any]) -> list:
        return list(y[: self.n_original])


def _fresh_name(taken: set[str], counter: list[int]) -> str:
    while True:
        counter[0] += 1
        name = f"Y{counter[0]}"
        if name not in taken:
            taken.add(name)
            return name


def reduce_to_quadratic(sys: SppSystem) -> QuadraticReduction:
    """Introduce ``Y = X_i * X_j`` until every equation has degree <= 2.

    Each round picks the first equation holding a monomial of degree > 2,
    takes its leftmost monomial of highest degree and replaces the first two
    factors of that monomial by an auxiliary variable (reused when the same
    unordered pair was introduced before).
    """
    names = list(sys.variables)
    taken = set(names)
    counter = [0]
    # each equation as an ordered list of (coef, factor list) plus constant
    eqs: list[tuple[list[tuple[Any, list[int]]], Any]] = [
        ([(m.coefficient, m.factors()) for m in p.monomials], p.constant) for p in sys.equations
    ]
    products: list[tuple[int, int]] = []
    pair_var: dict[tuple[int, int], int] = {}

    while True:
        target = None
        for e, (terms, _) in enumerate(eqs):
            top = max((len(f) for _, f in terms), default=0)
            if top > 2:
                t = next(k for k, (_, f) in enumerate(terms) if len(f) == top)
                target = (e, t)
                break
        if target is None:
            break
        e, t = target
        coef, factors = eqs[e][0][t]
        a, b = factors[0], factors[1]
        key = (min(a, b), max(a, b))
        aux = pair_var.get(key)
        if aux is None:
            aux = len(names)
            names.append(_fresh_name(taken, counter))
            pair_var[key] = aux
            products.append((a, b))
            eqs.append(([(1, [a, b])], 0))
        eqs[e][0][t] = (coef, [aux] + factors[2:])

    equations = []
    for terms, const in eqs:
        monos = tuple(Monomial(Fraction(c), powers_from_factors(f)) for c, f in terms)
        equations.append(Polynomial(monos, const))
    reduced = SppSystem(tuple(names), tuple(equations))
    return QuadraticReduction(sys, reduced, tuple(products))
