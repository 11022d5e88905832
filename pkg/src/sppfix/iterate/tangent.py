"""Surface heights, the region below the quadrics, and the tangent operator.

All functions here assume a quadratic, clean, feasible and strongly connected
system.  For such a system ``q(X) = f(X) - X`` and every ``q_i`` is a quadric;
``surface_height(i, x_rest)`` is the least nonnegative ``X_i`` on ``q_i = 0``
above ``x_rest``.
"""

from __future__ import annotations

from typing import Any, Sequence

from ..core.graph import scc_decompose
from ..core.system import SppSystem, evaluate, evaluate_component, jacobian_at, residual
from ..errors import (
    DimensionMismatch,
    NoRealRoot,
    NotQuadratic,
    NotStronglyConnected,
    RegionViolation,
    SingularSystem,
)
from ..linalg import solve
from ..scalar import RATIONAL, Field
from .engines import IterationTrace, Method, StopRule, _check_guard, _clamp, require_clean


def _require_quadratic_sc(sys: SppSystem) -> None:
    if not sys.is_quadratic():
        raise NotQuadratic(f"system has degree {sys.degree}; reduce it to quadratic form first")
    if not scc_decompose(sys).strongly_connected:
        raise NotStronglyConnected("operation needs a strongly connected system")


def _univariate(sys: SppSystem, i: int, x: Sequence[Any], fld: Field):
    """Coefficients ``(a, b, c)`` of ``q_i`` as a polynomial in ``X_i`` alone."""
    a = fld.zero
    b = -fld.one
    c = fld.zero
    const, terms = sys.compiled(fld)[i]
    c = c + const
    for coef, powers in terms:
        deg_i = 0
        rest = coef
        for var, deg in powers:
            if var == i:
                deg_i = deg
            else:
                for _ in range(deg):
                    rest = rest * x[var]
        if deg_i == 0:
            c = c + rest
        elif deg_i == 1:
            b = b + rest
        elif deg_i == 2:
            a = a + rest
        else:
            raise NotQuadratic(f"equation {sys.variables[i]} has degree {deg_i} in its own variable")
    return a, b, c


def _least_root(a, b, c, fld: Field):
    """Least nonnegative root of ``a t^2 + b t + c`` with ``a, c >= 0``."""
    if not c:
        return fld.zero
    if b >= 0:
        raise NoRealRoot("no nonnegative root: point lies outside the region below the surface")
    if not a:
        return c / (-b)
    disc = b * b - 4 * a * c
    if disc < 0:
        if fld.exact or disc <= -fld.clamp_tol:
            raise NoRealRoot("negative discriminant: point lies outside the region below the surface")
        disc = fld.zero
    # cancellation-free form of (-b - sqrt(disc)) / (2a); exact-mode sqrt rounds up,
    # which rounds the height down
    return 2 * c / (-b + fld.sqrt(disc))


def _with_component(x_rest: Sequence[Any], i: int, value, fld: Field) -> list:
    out = list(x_rest[:i]) + [value] + list(x_rest[i:])
    return fld.vector(out)


def surface_height(sys: SppSystem, i: int, x_rest: Sequence[Any], fld: Field = RATIONAL, *, check: bool = True):
    """Least nonnegative root in ``X_i`` of ``f_i(X_i, x_rest) - X_i``.

    ``x_rest`` lists the other ``n - 1`` components in order.  In exact mode
    the square root is a dyadic upper bound, so the returned height never
    exceeds the true one.
    """
    if check:
        _require_quadratic_sc(sys)
    if len(x_rest) != sys.n - 1:
        raise DimensionMismatch(f"x_rest has {len(x_rest)} entries, expected {sys.n - 1}")
    x = _with_component(x_rest, i, fld.zero, fld)
    a, b, c = _univariate(sys, i, x, fld)
    return _least_root(a, b, c, fld)


def in_region(sys: SppSystem, x: Sequence[Any], fld: Field = RATIONAL) -> bool:
    """``x >= 0`` and ``f(x) >= x``.

    ``x < mu f`` is not checked; it holds for Kleene and Newton iterates.
    Float mode tolerates a few ulps of rounding in ``f(x) - x``.
    """
    _require_quadratic_sc(sys)
    if len(x) != sys.n:
        raise DimensionMismatch(f"vector of length {len(x)} for n={sys.n}")
    x = fld.vector(x)
    if any(v < 0 for v in x):
        return False
    fx = evaluate(sys, x, fld)
    return all(fld.leq(xi, fi) for xi, fi in zip(x, fx))


def tangent_step(sys: SppSystem, x: Sequence[Any], fld: Field = RATIONAL) -> list:
    """Intersect the tangent planes of the surfaces at ``(x_-i, h_i(x_-i))``."""
    if not in_region(sys, x, fld):
        raise RegionViolation("tangent step needs x >= 0 with f(x) >= x")
    x = fld.vector(x)
    n = sys.n
    rows = []
    rhs = []
    for i in range(n):
        rest = x[:i] + x[i + 1 :]
        eta = surface_height(sys, i, rest, fld, check=False)
        pi = list(x)
        pi[i] = eta
        grad = jacobian_at(sys, pi, fld)[i]
        grad[i] = grad[i] - fld.one
        q_i = evaluate_component(sys, i, pi, fld) - eta
        acc = fld.zero
        for g, p in zip(grad, pi):
            acc = acc + g * p
        rows.append(grad)
        rhs.append(acc - q_i)
    sol, _ = solve(rows, rhs, fld)
    return _clamp(sol, fld)


def tangent_run(sys: SppSystem, stop: StopRule = StopRule(), fld: Field = RATIONAL) -> IterationTrace:
    """Iterate :func:`tangent_step` from the zero vector."""
    require_clean(sys)
    _require_quadratic_sc(sys)
    if stop.max_iters is None and stop.residual_below is None:
        raise ValueError("tangent iteration supports max_iters and residual_below stop rules")
    guard = stop.guard(fld)
    target_res = None if stop.residual_below is None else fld.convert(stop.residual_below)
    x = [fld.zero] * sys.n
    trace = IterationTrace(Method.TANGENT, fld, [x], [residual(sys, x, fld)], [None])
    while True:
        if stop.max_iters is not None and trace.steps >= stop.max_iters:
            trace.stopped_by = "max_iters"
            break
        try:
            new = tangent_step(sys, x, fld)
        except (SingularSystem, NoRealRoot, RegionViolation):
            if not fld.exact and trace.residuals[-1] < fld.singular_tol:
                trace.stopped_by = "precision"
                break
            raise
        _check_guard(new, guard, sys, trace.steps + 1)
        res = residual(sys, new, fld)
        trace.iterates.append(new)
        trace.residuals.append(res)
        trace.solver_notes.append(None)
        if new == x:
            trace.stopped_by = "fixed_point" if fld.exact else "stalled"
            break
        x = new
        if target_res is not None and res <= target_res:
            trace.stopped_by = "residual"
            break
        if stop.size_exceeded(x, fld):
            trace.stopped_by = "size_limit"
            break
    return trace
