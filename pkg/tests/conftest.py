import os
import sys
import random
from fractions import Fraction

import pytest

from sppfix.core.system import Polynomial, SppSystem


def pytest_collection_modifyitems(config, items):
    if os.environ.get("SPPFIX_SLOW") == "1":
        return
    skip = pytest.mark.skip(reason="set SPPFIX_SLOW=1 to run")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


def _split_mass(rng: random.Random, parts: int, total: Fraction, denom: int) -> list[Fraction]:
    """``parts`` positive multiples of ``1/denom`` summing to at most ``total``."""
    units = int(total * denom)
    cuts = sorted(rng.randint(1, max(1, units - 1)) for _ in range(parts - 1))
    sizes = [b - a for a, b in zip([0] + cuts, cuts + [units])]
    out = [Fraction(max(s, 1), denom) for s in sizes]
    while sum(out) > total:
        k = out.index(max(out))
        out[k] -= Fraction(1, denom)
    return [c for c in out if c > 0]


def random_probabilistic(
    rng: random.Random,
    n: int,
    *,
    degree: int = 2,
    terms: int = 3,
    mass: Fraction | None = None,
    strongly_connected: bool = True,
    denom: int = 16,
) -> SppSystem:
    """Random system with ``f(0) > 0`` and coefficients summing to ``<= 1`` per equation.

    With ``strongly_connected`` every equation ``i`` mentions ``X_{i+1 mod n}``.
    ``mass`` fixes the coefficient sum per equation (default: random in [1/2, 1]).
    """
    eqs = []
    for i in range(n):
        total = mass if mass is not None else Fraction(rng.randint(denom // 2, denom), denom)
        k = rng.randint(1, terms)
        coefs = _split_mass(rng, k + 1, total, denom)
        const, coefs = coefs[0], coefs[1:]
        monos = []
        for j, c in enumerate(coefs):
            d = rng.randint(1, degree)
            factors = [rng.randrange(n) for _ in range(d)]
            if j == 0 and strongly_connected:
                factors[0] = (i + 1) % n
            monos.append((c, factors))
        if strongly_connected and not monos:
            # keep the cycle even when all mass went to the constant
            const = const / 2
            monos.append((const, [(i + 1) % n]))
        eqs.append(Polynomial.build(monos, const))
    return SppSystem(tuple(f"X{i + 1}" for i in range(n)), tuple(eqs))


def random_dag_system(rng: random.Random, blocks: int, max_block: int = 3, denom: int = 16) -> SppSystem:
    """Strongly connected blocks wired into a random DAG (block ``b`` may read blocks ``< b``)."""
    sizes = [rng.randint(1, max_block) for _ in range(blocks)]
    start = [sum(sizes[:b]) for b in range(blocks)]
    n = sum(sizes)
    eqs = []
    for b, size in enumerate(sizes):
        for k in range(size):
            i = start[b] + k
            coefs = _split_mass(rng, 3, Fraction(rng.randint(denom // 2, denom), denom), denom)
            const = coefs[0]
            monos = []
            if size > 1 or rng.random() < 0.5:
                nxt = start[b] + (k + 1) % size
                monos.append((coefs[1], [nxt, rng.randrange(start[b], start[b] + size)]))
            if b and len(coefs) > 2:
                dep_block = rng.randrange(b)
                monos.append((coefs[2], [start[dep_block] + rng.randrange(sizes[dep_block])]))
            eqs.append(Polynomial.build(monos, const))
    return SppSystem(tuple(f"X{i + 1}" for i in range(n)), tuple(eqs))


@pytest.fixture
def rng():
    return random.Random(20240611)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.RESULTS:
        terminalreporter.write_line(line)
