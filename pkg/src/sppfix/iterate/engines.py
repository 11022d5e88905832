"""Kleene and Newton iteration over a pluggable scalar field."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Sequence

from ..core.graph import boolean_kleene
from ..core.system import SppSystem, evaluate, jacobian_at, residual
from ..errors import DivergenceSuspected, NotClean, SingularSystem
from ..linalg import SolveInfo, solve
from ..scalar import RATIONAL, Field

log = logging.getLogger(__name__)


class Method(str, Enum):
    KLEENE = "kleene"
    NEWTON = "newton"
    DNM = "dnm"
    TANGENT = "tangent"


@dataclass(frozen=True)
class StopRule:
    """When to stop an iteration.  ``divergence_guard=None`` uses the field default."""

    max_iters: int | None = 100
    residual_below: Any = None
    target_certified_bits: int | None = None
    divergence_guard: Any = None
    max_rational_bits: int | None = None  # exact mode: stop once a denominator grows past this

    def size_exceeded(self, x: Sequence[Any], fld: Field) -> bool:
        if not fld.exact or self.max_rational_bits is None:
            return False
        return max((int(v.denominator).bit_length() for v in x), default=0) > self.max_rational_bits

    def __post_init__(self):
        if self.max_iters is None and self.residual_below is None and self.target_certified_bits is None:
            raise ValueError("a stop rule needs max_iters, residual_below or target_certified_bits")

    def guard(self, fld: Field):
        return fld.divergence_guard if self.divergence_guard is None else fld.convert(self.divergence_guard)


@dataclass
class IterationTrace:
    method: Method
    field: Field
    iterates: list[list] = field(default_factory=list)
    residuals: list = field(default_factory=list)
    solver_notes: list[SolveInfo | None] = field(default_factory=list)
    stopped_by: str = ""
    certificate: Any = None

    @property
    def steps(self) -> int:
        return len(self.iterates) - 1

    @property
    def last(self) -> list:
        return self.iterates[-1]

    def is_monotone(self) -> bool:
        for prev, cur in zip(self.iterates, self.iterates[1:]):
            if not all(self.field.leq(a, b) for a, b in zip(prev, cur)):
                return False
        return True


def require_clean(sys: SppSystem) -> None:
    alive = boolean_kleene(sys)
    if not all(alive):
        dead = [sys.variables[i] for i, a in enumerate(alive) if not a]
        raise NotClean(f"system is not clean; components {', '.join(dead)} stay zero (run clean first)")


def _clamp(values: list, fld: Field) -> list:
    if fld.exact:
        return values
    tol = fld.clamp_tol
    return [fld.zero if (v < 0 and v > -tol) else v for v in values]


def _check_guard(x: Sequence[Any], guard, sys: SppSystem, step: int) -> None:
    for name, v in zip(sys.variables, x):
        if v > guard:
            raise DivergenceSuspected(
                f"component {name} exceeded the divergence guard after {step} steps; "
                "the system is probably infeasible"
            )


def kleene_step(sys: SppSystem, x: Sequence[Any], fld: Field = RATIONAL) -> list:
    return evaluate(sys, x, fld)


def kleene_run(sys: SppSystem, stop: StopRule = StopRule(), fld: Field = RATIONAL) -> IterationTrace:
    """``k^(j+1) = f(k^(j))`` from the zero vector."""
    require_clean(sys)
    if stop.max_iters is None and stop.residual_below is None:
        raise ValueError("Kleene iteration cannot certify bits; give max_iters or residual_below")
    guard = stop.guard(fld)
    x = [fld.zero] * sys.n
    trace = IterationTrace(Method.KLEENE, fld, [x], [residual(sys, x, fld)], [None])
    target_res = None if stop.residual_below is None else fld.convert(stop.residual_below)
    while True:
        if stop.max_iters is not None and trace.steps >= stop.max_iters:
            trace.stopped_by = "max_iters"
            break
        x = evaluate(sys, x, fld)
        _check_guard(x, guard, sys, trace.steps + 1)
        res = residual(sys, x, fld)
        trace.iterates.append(x)
        trace.residuals.append(res)
        trace.solver_notes.append(None)
        if target_res is not None and res <= target_res:
            trace.stopped_by = "residual"
            break
        if stop.size_exceeded(x, fld):
            trace.stopped_by = "size_limit"
            break
    return trace


def newton_update(
    sys: SppSystem, x: Sequence[Any], members: Sequence[int], fld: Field
) -> tuple[list, SolveInfo]:
    """One Newton step on the components ``members``; the others stay fixed.

    Returns the full updated vector.  With ``members`` covering every
    component this is ``x + (Id - f'(x))^-1 (f(x) - x)``.
    """
    x = fld.vector(x)
    fx = evaluate(sys, x, fld)
    jac = jacobian_at(sys, x, fld)
    a = [
        [(fld.one if r == c else fld.zero) - jac[r][c] for c in members]
        for r in members
    ]
    rhs = [fx[r] - x[r] for r in members]
    d, info = solve(a, rhs, fld)
    out = list(x)
    for k, r in enumerate(members):
        out[r] = x[r] + d[k]
    return _clamp(out, fld), info


def newton_step(sys: SppSystem, x: Sequence[Any], fld: Field = RATIONAL) -> list:
    """The Newton operator ``N_f(x)``."""
    return newton_update(sys, x, range(sys.n), fld)[0]


def check_newton_progress(sys, x, new, fld: Field, step: int, members: Sequence[int] | None = None) -> None:
    """Raise DivergenceSuspected when the sandwich ``x <= f(x) <= new`` fails.

    On feasible clean systems Newton iterates increase monotonically, so a
    violation means the system has no nonnegative fixed point (or, in float
    mode, that rounding has taken over).  Exact mode checks the full sandwich,
    float mode only ``x <= new`` up to a few ulps.
    """
    idx = range(sys.n) if members is None else members
    if fld.exact:
        fx = evaluate(sys, x, fld)
        for r in idx:
            if not (x[r] <= fx[r] <= new[r]):
                raise DivergenceSuspected(
                    f"Newton sandwich violated in {sys.variables[r]} at step {step}; "
                    "the system is probably infeasible"
                )
    else:
        for r in idx:
            if not fld.leq(x[r], new[r]):
                raise DivergenceSuspected(
                    f"Newton iterate decreased in {sys.variables[r]} at step {step}; "
                    "the system is probably infeasible"
                )


def newton_run(sys: SppSystem, stop: StopRule = StopRule(), fld: Field = RATIONAL) -> IterationTrace:
    """Newton's method from the zero vector."""
    require_clean(sys)
    certifier = None
    if stop.target_certified_bits is not None:
        from ..certify import proximity_certifier

        certifier = proximity_certifier(sys, fld)
    guard = stop.guard(fld)
    target_res = None if stop.residual_below is None else fld.convert(stop.residual_below)
    x = [fld.zero] * sys.n
    trace = IterationTrace(Method.NEWTON, fld, [x], [residual(sys, x, fld)], [None])
    members = list(range(sys.n))
    while True:
        if stop.max_iters is not None and trace.steps >= stop.max_iters:
            trace.stopped_by = "max_iters"
            break
        try:
            new, info = newton_update(sys, x, members, fld)
        except SingularSystem:
            if not fld.exact and trace.residuals[-1] < fld.singular_tol:
                # converged to the precision of the field near a singular fixed point
                trace.stopped_by = "precision"
                break
            raise
        step = trace.steps + 1
        check_newton_progress(sys, x, new, fld, step)
        _check_guard(new, guard, sys, step)
        res = residual(sys, new, fld)
        trace.iterates.append(new)
        trace.residuals.append(res)
        trace.solver_notes.append(info)
        if certifier is not None and all(v > 0 for v in new):
            cert = certifier(x, new)
            trace.certificate = cert
            if cert.certified_bits >= stop.target_certified_bits:
                trace.stopped_by = "certified"
                break
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
    log.debug("newton_run: %d steps, stopped by %s", trace.steps, trace.stopped_by)
    return trace
