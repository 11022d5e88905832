"""Representation, parsing, cleaning, dependence analysis and quadratic normalization."""

from .dsl import (
    format_coefficient,
    format_system,
    parse_system,
    system_from_dict,
    system_from_json,
    system_to_dict,
    system_to_json,
)
from .graph import Decomposition, Scc, boolean_kleene, clean, is_clean, scc_decompose
from .quadratic import QuadraticReduction, reduce_to_quadratic
from .system import (
    CoefficientStats,
    Monomial,
    Polynomial,
    SppSystem,
    coefficient_stats,
    evaluate,
    jacobian_at,
    residual,
    substitute,
)

__all__ = [
    "CoefficientStats",
    "Decomposition",
    "Monomial",
    "Polynomial",
    "QuadraticReduction",
    "Scc",
    "SppSystem",
    "boolean_kleene",
    "clean",
    "coefficient_stats",
    "evaluate",
    "format_coefficient",
    "format_system",
    "is_clean",
    "jacobian_at",
    "parse_system",
    "reduce_to_quadratic",
    "residual",
    "scc_decompose",
    "substitute",
    "system_from_dict",
    "system_from_json",
    "system_to_dict",
    "system_to_json",
]
