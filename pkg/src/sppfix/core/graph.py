"""Cleaning and dependence structure of SPP systems."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .system import Polynomial, SppSystem


def boolean_kleene(sys: SppSystem, steps: int | None = None) -> list[bool]:
    """Nonzero pattern of ``f^steps(0)`` (``steps`` defaults to ``n``)."""
    n = sys.n
    steps = n if steps is None else steps
    state = [False] * n
    for _ in range(steps):
        new = []
        for poly in sys.equations:
            val = poly.constant > 0 or any(all(state[v] for v, _ in m.powers) for m in poly.monomials)
            new.append(val)
        if new == state:
            break
        state = new
    return state


def clean(sys: SppSystem) -> tuple[SppSystem, set[str]]:
    """Drop the components that stay zero under Kleene iteration.

    Returns the cleaned system and the names of the removed variables.
    Monomials that mention a removed variable vanish.
    """
    alive = boolean_kleene(sys)
    keep = [i for i in range(sys.n) if alive[i]]
    removed = {sys.variables[i] for i in range(sys.n) if not alive[i]}
    if not removed:
        return sys, set()
    remap = {old: new for new, old in enumerate(keep)}
    equations = []
    for i in keep:
        poly = sys.equations[i]
        monos = []
        for mono in poly.monomials:
            if all(v in remap for v, _ in mono.powers):
                monos.append((mono.coefficient, [remap[v] for v in mono.factors()]))
        equations.append(Polynomial.build(monos, poly.constant))
    return SppSystem(tuple(sys.variables[i] for i in keep), tuple(equations)), removed


def is_clean(sys: SppSystem) -> bool:
    return all(boolean_kleene(sys))


def strongly_connected_components(n: int, succ: Sequence[Sequence[int]]) -> list[list[int]]:
    """Tarjan's algorithm, iterative.

    Components come out in reverse topological order: every component appears
    after all components reachable from it.
    """
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    out: list[list[int]] = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, pos = work[-1]
            nbrs = succ[v]
            if pos < len(nbrs):
                work[-1] = (v, pos + 1)
                w = nbrs[pos]
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, 0))
                elif on_stack[w]:
                    low[v] = min(low[v], index[w])
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                out.append(sorted(comp))
    return out


@dataclass(frozen=True)
class Scc:
    members: tuple[int, ...]
    trivial: bool
    depth: int


@dataclass(frozen=True)
class Decomposition:
    """Condensation DAG of the dependence relation.

    ``order`` lists SCC ids so that each SCC comes after every SCC it depends
    on (bottom-up, the order DNM processes them in).  Depth 0 marks SCCs no
    other SCC depends on.
    """

    scc_of: tuple[int, ...]
    sccs: tuple[Scc, ...]
    order: tuple[int, ...]
    edges: tuple[frozenset[int], ...]  # SCC id -> SCC ids it depends on directly

    @property
    def height(self) -> int:
        return max((s.depth for s in self.sccs), default=0)

    @property
    def width(self) -> int:
        counts: dict[int, int] = {}
        for s in self.sccs:
            counts[s.depth] = counts.get(s.depth, 0) + 1
        return max(counts.values(), default=0)

    def depth(self, scc_id: int) -> int:
        return self.sccs[scc_id].depth

    def at_depth(self, t: int) -> list[int]:
        return [k for k in self.order if self.sccs[k].depth == t]

    @property
    def strongly_connected(self) -> bool:
        """The whole system is one non-trivial SCC."""
        return len(self.sccs) == 1 and not self.sccs[0].trivial


def dependence_graph(sys: SppSystem) -> list[list[int]]:
    return [sorted(sys.depends_on(i)) for i in range(sys.n)]


def scc_decompose(sys: SppSystem) -> Decomposition:
    n = sys.n
    succ = dependence_graph(sys)
    comps = strongly_connected_components(n, succ)
    scc_of = [0] * n
    for cid, comp in enumerate(comps):
        for v in comp:
            scc_of[v] = cid
    edges = []
    for comp in comps:
        out = set()
        for v in comp:
            for w in succ[v]:
                if scc_of[w] != scc_of[v]:
                    out.add(scc_of[w])
        edges.append(frozenset(out))
    # comps is bottom-up, so walking it backwards visits dependents first
    depth = [0] * len(comps)
    for cid in reversed(range(len(comps))):
        for dep in edges[cid]:
            depth[dep] = max(depth[dep], depth[cid] + 1)
    sccs = []
    for cid, comp in enumerate(comps):
        trivial = len(comp) == 1 and comp[0] not in succ[comp[0]]
        sccs.append(Scc(tuple(comp), trivial, depth[cid]))
    return Decomposition(tuple(scc_of), tuple(sccs), tuple(range(len(comps))), tuple(edges))
