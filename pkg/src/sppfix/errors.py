"""Exception types raised by sppfix."""

from __future__ import annotations


class SppError(Exception):
    """Base class for every error raised by this package."""


class DslSyntaxError(SppError, ValueError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        where = f"line {line}, column {column}: " if line else ""
        super().__init__(where + message)


class NegativeCoefficient(DslSyntaxError):
    pass


class UnknownVariable(DslSyntaxError):
    pass


class DimensionMismatch(SppError, ValueError):
    pass


class EmptySystem(SppError, ValueError):
    pass


class NotClean(SppError, ValueError):
    pass


class NotQuadratic(SppError, ValueError):
    pass


class NotStronglyConnected(SppError, ValueError):
    pass


class SingularSystem(SppError, ArithmeticError):
    pass


class DivergenceSuspected(SppError, ArithmeticError):
    """Iteration left every plausible bound; the system is probably infeasible."""


class NoRealRoot(SppError, ArithmeticError):
    pass


class RegionViolation(SppError, ValueError):
    pass


class ZeroComponent(SppError, ValueError):
    pass


class NonPositiveBound(SppError, ValueError):
    pass


class SideConditionUnmet(SppError, ValueError):
    def __init__(self, condition: str, message: str | None = None):
        self.condition = condition
        super().__init__(message or f"side condition not met: {condition}")


class ProbabilityMassMismatch(SppError, ValueError):
    pass


class InvalidRule(SppError, ValueError):
    pass
