"""Time the numba kernels against their numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--trials N] [--size N] [--repeats R]

The numba column excludes compilation (one warm-up call first).
"""
import argparse
import random
import time
from fractions import Fraction

import numpy as np

from sppfix.core.system import Polynomial, SppSystem
from sppfix.families import back_button_model
from sppfix.kernels import DenseQuadratic, dense_newton, numba_enabled, simulate_revocation


def random_dense(n: int, seed: int = 0) -> DenseQuadratic:
    """Strongly connected random quadratic system with row mass 0.9."""
    rng = random.Random(seed)
    eqs = []
    for i in range(n):
        monos = [(Fraction(1, 10), [(i + 1) % n])]
        monos += [(Fraction(1, 10), [rng.randrange(n), rng.randrange(n)]) for _ in range(5)]
        eqs.append(Polynomial.build(monos, Fraction(3, 10)))
    return DenseQuadratic.from_system(SppSystem(tuple(f"X{i}" for i in range(n)), tuple(eqs)))


def best_of(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=4000, help="Monte-Carlo walks per run")
    ap.add_argument("--size", type=int, default=40, help="variables in the dense Newton system")
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()
    if not numba_enabled():
        print("numba disabled (SPPFIX_DISABLE_NUMBA set or numba missing); both columns use the same code")

    model = back_button_model()
    dq = random_dense(args.size)
    cases = {
        f"monte-carlo, {args.trials} walks": lambda fast: simulate_revocation(
            model, "1", args.trials, seed=1, use_numba=fast).probability,
        f"dense newton, n={args.size}, 30 steps": lambda fast: float(
            dense_newton(dq, iters=30, use_numba=fast)[0].sum()),
    }
    print(f"{'kernel':<34} {'numba s':>10} {'numpy s':>10} {'speedup':>8}  result numba / numpy")
    for name, fn in cases.items():
        fn(True)  # compile
        t_fast, r_fast = best_of(lambda: fn(True), args.repeats)
        t_slow, r_slow = best_of(lambda: fn(False), args.repeats)
        print(f"{name:<34} {t_fast:>10.4f} {t_slow:>10.4f} {t_slow / t_fast:>8.1f}  {r_fast:.6g} / {r_slow:.6g}")


if __name__ == "__main__":
    main()
