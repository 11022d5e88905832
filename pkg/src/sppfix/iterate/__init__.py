"""Kleene, Newton, decomposed Newton and tangent iteration engines."""

from .dnm import DnmBudget, DnmResult, dnm_budget, dnm_run
from .engines import (
    IterationTrace,
    Method,
    StopRule,
    kleene_run,
    kleene_step,
    newton_run,
    newton_step,
    newton_update,
    require_clean,
)
from .tangent import in_region, surface_height, tangent_run, tangent_step

__all__ = [
    "DnmBudget",
    "DnmResult",
    "IterationTrace",
    "Method",
    "StopRule",
    "dnm_budget",
    "dnm_run",
    "in_region",
    "kleene_run",
    "kleene_step",
    "newton_run",
    "newton_step",
    "newton_update",
    "require_clean",
    "surface_height",
    "tangent_run",
    "tangent_step",
]
