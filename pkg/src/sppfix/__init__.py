"""Least fixed points of systems of positive polynomials.

Kleene, Newton, decomposed Newton and tangent iteration over exact rationals
or configurable-precision binary floats, with certified error bounds and
translations from back-button processes and probabilistic pushdown automata.
"""

from .core import (
    SppSystem,
    clean,
    evaluate,
    parse_system,
    reduce_to_quadratic,
    scc_decompose,
)
from .certify import Certificate, threshold_estimate, upper_bound_scspp
from .iterate import Method, StopRule, dnm_run, kleene_run, newton_run, tangent_run
from .scalar import RATIONAL, BigFloatField, RationalField, parse_field

__version__ = "0.1.0"

__all__ = [
    "RATIONAL",
    "BigFloatField",
    "Certificate",
    "Method",
    "RationalField",
    "SppSystem",
    "StopRule",
    "clean",
    "dnm_run",
    "evaluate",
    "kleene_run",
    "newton_run",
    "parse_field",
    "parse_system",
    "reduce_to_quadratic",
    "scc_decompose",
    "tangent_run",
    "threshold_estimate",
    "upper_bound_scspp",
]
