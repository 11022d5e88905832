"""Acceptance criteria, one PASS/FAIL line each.

Run under pytest (lines appear in the terminal summary) or directly with
``python3 tests/test_acceptance.py``.
"""
import sys
import time
from fractions import Fraction
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

import pytest

from sppfix.certify import upper_bound_scspp, threshold_estimate
from sppfix.families import back_button, half_half, two_dim, worst_case
from sppfix.iterate import StopRule, kleene_run, newton_run
from sppfix.scalar import RATIONAL, BigFloatField, to_fraction
from test_properties import (
    check_dnm_budget,
    check_jacobian,
    check_kleene_below_newton,
    check_reduction_domination,
    check_sandwich,
    check_tangent,
)

F256 = BigFloatField(256)
RESULTS: list[str] = []

# exact Newton iterates whose denominators pass this many bits are not computed
RATIONAL_BITS_LIMIT = 1 << 22


def report(number, name, ok, detail=""):
    line = f"[{'PASS' if ok else 'FAIL'}] {number}. {name}" + (f": {detail}" if detail else "")
    RESULTS.append(line)
    print(line)
    assert ok, line


def _size(x):
    return max(to_fraction(v).denominator.bit_length() for v in x)


def test_1_back_button_newton_interval():
    t0 = time.perf_counter()
    last = newton_run(back_button(), StopRule(max_iters=14), F256).last
    elapsed = time.perf_counter() - t0
    lo, hi = [0.98, 0.97, 0.992], [0.99, 0.98, 0.993]
    inside = all(F256.convert(a) <= v <= F256.convert(b) for a, v, b in zip(lo, last, hi))
    shown = ", ".join(F256.ctx.nstr(v, 8) for v in last)
    report(1, "back-button Newton interval", inside and elapsed < 1.0, f"({shown}) in {elapsed:.3f} s")


def test_2_kleene_slowness():
    last = kleene_run(back_button(), StopRule(max_iters=14), F256).last
    ok = all(v < F256.convert(b) for v, b in zip(last, [0.89, 0.83, 0.96]))
    report(2, "Kleene slowness", ok, "(" + ", ".join(F256.ctx.nstr(v, 6) for v in last) + ")")


def test_3_proximity_certificate():
    it = newton_run(back_button(), StopRule(max_iters=10), F256).iterates
    step = max(abs(a - b) for a, b in zip(it[10], it[9]))
    cert = upper_bound_scspp(back_button(), it[9], it[10], F256)
    bound = cert.params["bound"]
    ok = step <= 2e-6 and bound <= Fraction(9, 100000) and all(u < 1 for u in cert.upper)
    report(3, "Proximity-2 certificate", ok,
           f"step {F256.ctx.nstr(step, 4)}, bound {float(bound):.3g}, max upper {F256.ctx.nstr(max(cert.upper), 8)}")


def test_4_threshold():
    th = threshold_estimate(back_button(), "0.97", 1)
    it = newton_run(back_button(), StopRule(max_iters=30), F256).iterates
    ref = it[-1]  # 256-bit Newton settles before step 30; later iterates equal the last one
    bits_ok = []
    for i in range(1, 9):
        rel = max(abs(r - v) / r for r, v in zip(ref, it[th.value + i]))
        bits_ok.append(rel <= F256.ctx.mpf(2) ** -i)
    report(4, "threshold formula", th.value == 6 and all(bits_ok),
           f"threshold {th.value}, valid-bit checks {sum(bits_ok)}/8")


def test_5_closed_form_iterates():
    it = newton_run(half_half(), StopRule(max_iters=30), RATIONAL).iterates
    ok = len(it) == 31 and all(x[0] == 1 - Fraction(1, 2**k) for k, x in enumerate(it))
    report(5, "closed-form iterates", ok, f"k = 0..{len(it) - 1}")


def test_6_worst_case_rate():
    lines, ok = [], True
    for n in (3, 4):
        per_bit = 2 ** (n - 1)
        trace = newton_run(worst_case(n), StopRule(max_iters=3 * per_bit, max_rational_bits=RATIONAL_BITS_LIMIT))
        for k in (1, 2, 3):
            at = k * per_bit
            if at >= len(trace.iterates):
                ok = False
                # informational only: the criterion asks for rational mode
                wide = BigFloatField(4096)
                approx = newton_run(worst_case(n), StopRule(max_iters=at), wide).iterates[at][n - 1]
                lines.append(f"n={n} k={k}: not computed (exact iterate {at} exceeds {RATIONAL_BITS_LIMIT} "
                             f"denominator bits; stopped at {trace.steps}; float:4096 error "
                             f"{wide.ctx.nstr(1 - approx, 4)})")
                continue
            err = 1 - trace.iterates[at][n - 1]
            ok &= err > Fraction(1, 2**k)
            lines.append(f"n={n} k={k}: error {float(err):.4g} > 2^-{k}")
    report(6, "worst-case rate", ok, "; ".join(lines))


def test_7_dnm_budget():
    bad = check_dnm_budget(50)
    report(7, "DNM budget", not bad, f"{len(bad)} violations over 50 DAG systems")


def test_8_property_suites():
    counts = {
        "sandwich": len(check_sandwich()),
        "kleene<=newton": len(check_kleene_below_newton()),
        "tangent": len(check_tangent()),
        "reduction": len(check_reduction_domination()),
        "jacobian": len(check_jacobian()),
    }
    detail = ", ".join(f"{k} {v}" for k, v in counts.items()) + " violations over 100 systems each"
    report(8, "property suites", not any(counts.values()), detail)


def test_9_exact_float_agreement():
    lines, ok = [], True
    tol = F256.ctx.mpf(10) ** -40
    for name, sys_ in (("back-button", back_button()), ("two-dim", two_dim()), ("half", half_half())):
        exact = newton_run(sys_, StopRule(max_iters=20, max_rational_bits=RATIONAL_BITS_LIMIT >> 4)).iterates
        flt = newton_run(sys_, StopRule(max_iters=20), F256).iterates
        if len(exact) < 21:
            k = len(exact) - 1
            growth = _size(exact[k]) / max(1, _size(exact[k - 1]))
            needed = _size(exact[k]) * growth ** (20 - k)
            rel = max(abs(F256.convert(a) - b) / F256.convert(a) for a, b in zip(exact[k], flt[k]))
            ok = False
            lines.append(f"{name}: exact run stopped at {k} ({_size(exact[k])} bits, x{growth:.2f}/step, "
                         f"~{needed:.2g} bits needed at 20; relative {F256.ctx.nstr(rel, 3)} at {k})")
            continue
        last = flt[min(20, len(flt) - 1)]
        rel = max(abs(F256.convert(a) - b) / F256.convert(a) for a, b in zip(exact[20], last))
        ok &= rel <= tol
        lines.append(f"{name}: relative {F256.ctx.nstr(rel, 3)}")
    report(9, "exact/float agreement", ok, "; ".join(lines))


if __name__ == "__main__":
    failures = 0
    for fn in [v for k, v in sorted(globals().items()) if k.startswith("test_")]:
        try:
            fn()
        except AssertionError:
            failures += 1
    sys.exit(1 if failures else 0)
