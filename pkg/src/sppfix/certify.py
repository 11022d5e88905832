"""Certified upper bounds, valid-bit counts and Newton thresholds.

Bounds are computed in exact rational arithmetic from the (dyadic or
rational) iterate values, then rounded outward into the working field, so a
certificate never depends on rounding inside the formula itself.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Callable, Sequence

from .core.graph import Decomposition, scc_decompose
from .core.system import SppSystem, coefficient_stats, evaluate, jacobian_at
from .errors import (
    DimensionMismatch,
    NonPositiveBound,
    NotQuadratic,
    NotStronglyConnected,
    SideConditionUnmet,
    ZeroComponent,
)
from .linalg import identity_minus, mat_vec, solve
from .scalar import EXACT_BITS_CAP, RATIONAL, Field, to_fraction


class Justification(str, Enum):
    PROXIMITY2 = "Proximity2"
    KNOWN_FIXED_POINT_AT_ONE = "KnownFixedPointAtOne"
    USER_SUPPLIED = "UserSupplied"
    # non-recursive component: the iterate is the exact value
    EXACT = "Exact"


class ThresholdKind(str, Enum):
    ESTIMATE = "Estimate"
    SYNTACTIC_4MN2N = "Syntactic4mn2n"
    SYNTACTIC_7MN = "Syntactic7mn"
    SYNTACTIC_2MN_PLUS_M = "Syntactic2mn_plus_m"
    ESTIMATE_WITH_MU_MIN = "EstimateWithMuMin"


def floor_log2(x: Fraction) -> int:
    """Largest ``k`` with ``2^k <= x`` for ``x > 0``."""
    x = Fraction(x)
    if x <= 0:
        raise ValueError("log of a nonpositive number")
    p, q = x.numerator, x.denominator
    k = p.bit_length() - q.bit_length()
    # now 2^(k-1) < p/q < 2^(k+1)
    if k >= 0:
        if p < q << k:
            k -= 1
    elif p << -k < q:
        k -= 1
    return k


def ceil_log2(x: Fraction) -> int:
    """Smallest ``k`` with ``2^k >= x`` for ``x > 0``."""
    k = floor_log2(x)
    return k if Fraction(2) ** k == x else k + 1


def certified_bits(lower: Sequence[Any], upper: Sequence[Any], cap: int = EXACT_BITS_CAP) -> int:
    """Largest ``i >= 0`` with ``(upper_j - lower_j) / lower_j <= 2^-i`` for all ``j``.

    Measured against the lower bound, which under-approximates the fixed point,
    so the count is sound.  Zero-width intervals give ``cap``.
    """
    if len(lower) != len(upper):
        raise DimensionMismatch("lower and upper differ in length")
    worst = Fraction(0)
    for j, (lo, up) in enumerate(zip(lower, upper)):
        lo, up = to_fraction(lo), to_fraction(up)
        if lo <= 0:
            raise ZeroComponent(f"lower bound component {j} is not positive")
        if up < lo:
            raise ValueError(f"upper bound below lower bound in component {j}")
        worst = max(worst, (up - lo) / lo)
    if worst == 0:
        return cap
    return max(0, min(cap, floor_log2(1 / worst)))


@dataclass
class Certificate:
    lower: list
    upper: list
    certified_bits: int
    justification: Justification
    params: dict[str, Any] = field(default_factory=dict)
    scalar_field: Field = RATIONAL
    variables: tuple[str, ...] | None = None

    def to_dict(self) -> dict[str, Any]:
        fmt = self.scalar_field.fmt
        out: dict[str, Any] = {}
        if self.variables is not None:
            out["variables"] = list(self.variables)
        out.update(
            {
                "lower": [fmt(v) for v in self.lower],
                "upper": [fmt(v) for v in self.upper],
                "bits": self.certified_bits,
                "justification": self.justification.value,
                "params": {k: _param_str(v, self.scalar_field) for k, v in self.params.items()},
            }
        )
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def restrict(self, keep: Sequence[int], names: Sequence[str] | None = None) -> "Certificate":
        """Certificate for a subset of the components; the bit count is recomputed."""
        lower = [self.lower[k] for k in keep]
        upper = [self.upper[k] for k in keep]
        bits = certified_bits(lower, upper, self.scalar_field.bits_cap) if all(v > 0 for v in lower) else 0
        return Certificate(lower, upper, bits, self.justification, dict(self.params), self.scalar_field,
                           tuple(names) if names is not None else None)


def _param_str(value: Any, fld: Field) -> Any:
    if isinstance(value, (int, str, bool)) or value is None:
        return value
    if isinstance(value, Fraction):
        if fld.exact:
            return fld.fmt(value)
        return fld.fmt(fld.convert(value))
    return fld.fmt(value)


def _require_quadratic_sc(sys: SppSystem) -> Decomposition:
    if not sys.is_quadratic():
        raise NotQuadratic(f"system has degree {sys.degree}; reduce it to quadratic form first")
    dec = scc_decompose(sys)
    if not dec.strongly_connected:
        raise NotStronglyConnected("certificate needs a strongly connected system")
    return dec


def _proximity(sys: SppSystem, c_min: Fraction, prev, curr, fld: Field) -> Certificate:
    if len(prev) != sys.n or len(curr) != sys.n:
        raise DimensionMismatch("iterates do not match the system dimension")
    p = [to_fraction(v) for v in prev]
    c = [to_fraction(v) for v in curr]
    if any(v <= 0 for v in c):
        raise ZeroComponent("current iterate has a zero component")
    step = max(abs(a - b) for a, b in zip(c, p))
    nu_min = min(c)
    bound = step / (c_min * min(nu_min, Fraction(1))) ** sys.n
    upper_exact = [v + bound for v in c]
    upper = [fld.convert(v, rounding="u") for v in upper_exact]
    bits = certified_bits(c, upper, fld.bits_cap)
    params = {"c_min": c_min, "nu_min": nu_min, "n": sys.n, "step_norm": step, "bound": bound}
    return Certificate(fld.vector(curr), upper, bits, Justification.PROXIMITY2, params, fld, sys.variables)


def upper_bound_scspp(sys: SppSystem, nu_prev: Sequence[Any], nu_curr: Sequence[Any], fld: Field = RATIONAL) -> Certificate:
    """Upper bound on the least fixed point from two consecutive Newton iterates.

    ``mu f <= nu_curr + ||nu_curr - nu_prev||_inf / (c_min * min(min(nu_curr), 1))^n``
    in every component, valid for quadratic clean feasible strongly connected systems.
    """
    _require_quadratic_sc(sys)
    return _proximity(sys, coefficient_stats(sys).c_min, nu_prev, nu_curr, fld)


def proximity_certifier(sys: SppSystem, fld: Field = RATIONAL) -> Callable[[Sequence[Any], Sequence[Any]], Certificate]:
    """Check preconditions once; return ``(prev, curr) -> Certificate``."""
    _require_quadratic_sc(sys)
    c_min = coefficient_stats(sys).c_min
    return lambda prev, curr: _proximity(sys, c_min, prev, curr, fld)


def ones_is_post_fixed(sys: SppSystem) -> bool:
    """``f(1) <= 1`` exactly, which puts the least fixed point below the all-ones vector."""
    return all(v <= 1 for v in evaluate(sys, [1] * sys.n, RATIONAL))


def known_fixed_point_at_one(sys: SppSystem, lower: Sequence[Any], fld: Field = RATIONAL) -> Certificate:
    if not ones_is_post_fixed(sys):
        raise SideConditionUnmet("f(1) <= 1")
    lower = fld.vector(lower)
    upper = [fld.one] * sys.n
    bits = certified_bits(lower, upper, fld.bits_cap) if all(v > 0 for v in lower) else 0
    return Certificate(lower, upper, bits, Justification.KNOWN_FIXED_POINT_AT_ONE, {"n": sys.n}, fld, sys.variables)


@dataclass(frozen=True)
class Threshold:
    kind: ThresholdKind
    value: int
    inputs: dict[str, Any]

    def bits_after(self, k: int) -> int:
        """Guaranteed valid bits of the ``k``-th Newton iterate."""
        return max(0, k - self.value)


def threshold_estimate(sys: SppSystem, mu_min_lb: Any, mu_max_ub: Any) -> Threshold:
    """``ceil(log2(mu_max / (mu_min * (c_min * min(mu_min, 1))^n)))`` with the given bounds."""
    _require_quadratic_sc(sys)
    lo, hi = to_fraction(mu_min_lb), to_fraction(mu_max_ub)
    if lo <= 0 or hi <= 0:
        raise NonPositiveBound("bounds on the least fixed point must be positive")
    if hi < lo:
        raise NonPositiveBound("upper bound on mu_max is below the lower bound on mu_min")
    stats = coefficient_stats(sys)
    ratio = hi / (lo * (stats.c_min * min(lo, Fraction(1))) ** stats.n)
    value = max(0, ceil_log2(ratio))
    return Threshold(
        ThresholdKind.ESTIMATE,
        value,
        {"c_min": stats.c_min, "n": stats.n, "mu_min": lo, "mu_max": hi},
    )


_MODES = {
    "4mn2^n": ThresholdKind.SYNTACTIC_4MN2N,
    "4mn2n": ThresholdKind.SYNTACTIC_4MN2N,
    "7mn": ThresholdKind.SYNTACTIC_7MN,
    "2mn+m": ThresholdKind.SYNTACTIC_2MN_PLUS_M,
    "2m(n+1)": ThresholdKind.SYNTACTIC_2MN_PLUS_M,
    "4mn+3n*log": ThresholdKind.ESTIMATE_WITH_MU_MIN,
}


def threshold_syntactic(
    sys: SppSystem,
    mode: str | ThresholdKind,
    *,
    mu_min_lb: Any = None,
    assume_mu_max_le_one: bool = False,
) -> Threshold:
    """Thresholds that depend only on the coefficient bit size ``m`` and ``n``.

    ``2mn + m`` (written ``2m(n+1)`` elsewhere; the two agree) needs
    ``f(0) > 0`` and ``mu_max <= 1``; the latter is established by ``f(1) <= 1``
    or asserted by the caller.
    """
    kind = mode if isinstance(mode, ThresholdKind) else _MODES.get(mode)
    if kind is None:
        try:
            kind = ThresholdKind(mode)
        except ValueError:
            raise ValueError(f"unknown threshold mode {mode!r}") from None
    _require_quadratic_sc(sys)
    stats = coefficient_stats(sys)
    m, n = stats.m, stats.n
    inputs: dict[str, Any] = {"m": m, "n": n}
    if kind in (ThresholdKind.SYNTACTIC_7MN, ThresholdKind.SYNTACTIC_2MN_PLUS_M):
        if not sys.constants_positive():
            raise SideConditionUnmet("f(0) > 0", "f(0) has a zero component")
    if kind is ThresholdKind.SYNTACTIC_4MN2N:
        value = 4 * m * n * 2**n
    elif kind is ThresholdKind.SYNTACTIC_7MN:
        value = 7 * m * n
    elif kind is ThresholdKind.SYNTACTIC_2MN_PLUS_M:
        if not (assume_mu_max_le_one or ones_is_post_fixed(sys)):
            raise SideConditionUnmet("mu_max <= 1", "cannot establish mu_max <= 1: f(1) <= 1 fails")
        inputs["mu_max_le_one"] = "asserted" if assume_mu_max_le_one else "f(1) <= 1"
        value = 2 * m * n + m
    elif kind is ThresholdKind.ESTIMATE:
        raise ValueError("use threshold_estimate for the estimate threshold")
    else:
        if mu_min_lb is None:
            raise ValueError("this threshold needs a lower bound on mu_min")
        mu = to_fraction(mu_min_lb)
        if mu <= 0:
            raise NonPositiveBound("mu_min lower bound must be positive")
        inputs["mu_min"] = mu
        # ceil(3n * max(0, -log2 mu)) = max(0, ceil(log2(mu^-3n)))
        extra = max(0, ceil_log2(1 / mu ** (3 * n))) if mu < 1 else 0
        value = 4 * m * n + extra
    return Threshold(kind, value, inputs)


@dataclass
class ConeVectorEstimate:
    vector: list
    residual: Any


def cone_vector_estimate(sys: SppSystem, x: Sequence[Any], fld: Field = RATIONAL) -> ConeVectorEstimate:
    """``d = (Id - f'(x))^-1 1`` scaled to max-norm 1, and ``max(0, max_j (f'(x)d - d)_j)``.

    Diagnostic only: at iterates strictly below the fixed point this points
    towards a cone vector of ``f'(mu f)``.
    """
    if not scc_decompose(sys).strongly_connected:
        raise NotStronglyConnected("cone vectors are defined for strongly connected systems")
    x = fld.vector(x)
    jac = jacobian_at(sys, x, fld)
    d, _ = solve(identity_minus(jac, fld), [fld.one] * sys.n, fld)
    scale = max(abs(v) for v in d)
    d = [v / scale for v in d]
    jd = mat_vec(jac, d, fld)
    res = max([fld.zero] + [a - b for a, b in zip(jd, d)])
    return ConeVectorEstimate(d, res)


@dataclass(frozen=True)
class RateBound:
    general: int  # n * 2^n iterations per extra bit, general systems
    decomposed: int  # (h + 1) * 2^h


def general_rate_bound(sys: SppSystem) -> RateBound:
    n = sys.n
    h = scc_decompose(sys).height if n else 0
    return RateBound(n * 2**n, (h + 1) * 2**h)
