"""Decomposed Newton's method: Newton per SCC, bottom-up over the condensation DAG."""

from __future__ import annotations

from dataclasses import dataclass

from ..core.graph import Decomposition, scc_decompose
from ..core.system import SppSystem
from ..errors import SingularSystem
from ..scalar import RATIONAL, Field
from .engines import check_newton_progress, newton_update, require_clean


@dataclass(frozen=True)
class DnmBudget:
    planned: int  # sum_t |SCC(t)| * i * 2^t
    bound: int  # i * w(f) * 2^(h(f)+1)


@dataclass
class DnmResult:
    value: list
    steps: int
    per_scc: dict[int, int]
    decomposition: Decomposition


def dnm_budget(sys: SppSystem, i: int, dec: Decomposition | None = None) -> DnmBudget:
    dec = dec or scc_decompose(sys)
    planned = sum(i * 2**s.depth for s in dec.sccs)
    return DnmBudget(planned, i * dec.width * 2 ** (dec.height + 1))


def dnm_run(sys: SppSystem, i: int, fld: Field = RATIONAL) -> DnmResult:
    """Run ``i * 2^t`` Newton steps on every SCC of depth ``t``, deepest first.

    Components of deeper SCCs are frozen at their computed approximations
    while a shallower SCC is iterated, which is the same as substituting them
    into its equations.  SCCs of equal depth touch disjoint components, so
    their processing order does not affect the result.
    """
    if i < 1:
        raise ValueError("precision parameter i must be >= 1")
    require_clean(sys)
    dec = scc_decompose(sys)
    x = [fld.zero] * sys.n
    per_scc: dict[int, int] = {}
    total = 0
    for t in range(dec.height, -1, -1):
        for cid in dec.at_depth(t):
            members = list(dec.sccs[cid].members)
            done = 0
            for _ in range(i * 2**t):
                try:
                    new, _ = newton_update(sys, x, members, fld)
                except SingularSystem:
                    if not fld.exact and done:
                        # this SCC has converged to the working precision
                        break
                    raise
                check_newton_progress(sys, x, new, fld, done + 1, members)
                x = new
                done += 1
            per_scc[cid] = done
            total += done
    return DnmResult(x, total, per_scc, dec)
