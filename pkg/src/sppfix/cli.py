"""``sppfix`` command line: solve, certify, decompose, convert, bench.

Exit codes: 0 success, 1 input or iteration error, 2 certification target
not reached within the iteration budget.  Output depends only on the input
and the flags.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

import mpmath

from . import families
from .certify import Certificate, Justification, certified_bits
from .core.dsl import format_system, parse_system, system_from_dict, system_to_dict
from .core.graph import clean, scc_decompose
from .core.quadratic import reduce_to_quadratic
from .core.system import SppSystem, residual, substitute
from .errors import EmptySystem, SppError
from .frontends import load_model, model_to_spp
from .iterate import Method, StopRule, dnm_run, kleene_run, newton_run, tangent_run
from .scalar import DEFAULT_BITS, RATIONAL, Field, parse_field, to_fraction

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_BUDGET = 2

DEFAULT_SCALAR = f"float:{DEFAULT_BITS}"
DEFAULT_TARGET_BITS = 16
BENCH_RATIONAL_BITS = 1 << 22

BUILTINS = {
    "back-button": families.back_button,
    "two-dim": families.two_dim,
    "half": families.half_half,
}


class CliError(Exception):
    pass


# ------------------------------------------------------------------ input


def load_system(source: str) -> tuple[SppSystem, dict[str, Any] | None]:
    """Read a DSL file, a system/model JSON file, or a builtin ``@name``.

    Builtins: ``@back-button``, ``@two-dim``, ``@half`` and ``@worst:N``.
    """
    if source.startswith("@"):
        name = source[1:]
        if name.startswith("worst:"):
            try:
                return families.worst_case(int(name.split(":", 1)[1])), None
            except ValueError:
                raise CliError(f"bad builtin {source!r}; use @worst:N with N >= 1") from None
        if name not in BUILTINS:
            raise CliError(f"unknown builtin {source!r}; known: @worst:N, " + ", ".join("@" + b for b in BUILTINS))
        return BUILTINS[name](), None
    path = Path(source)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read {source}: {exc.strerror or exc}") from None
    if path.suffix.lower() == ".json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise CliError(f"{source}: invalid JSON: {exc}") from None
        if isinstance(data, dict) and "equations" in data:
            return system_from_dict(data), None
        return model_to_spp(load_model(text))
    return parse_system(text), None


def cleaned(sys_: SppSystem) -> tuple[SppSystem, list[str]]:
    out, removed = clean(sys_)
    if out.n == 0:
        raise EmptySystem("system empty after cleaning")
    return out, [v for v in sys_.variables if v in removed]


def resolve_field(args, default: str = DEFAULT_SCALAR) -> Field:
    try:
        return parse_field(args.scalar or default)
    except ValueError as exc:
        raise CliError(str(exc)) from None


# ----------------------------------------------------------------- output


def emit(args, data: dict[str, Any], table: list[str]) -> None:
    if args.json:
        sys.stdout.write(json.dumps(data, indent=2, ensure_ascii=False) + "\n")
    else:
        sys.stdout.write("\n".join(table) + "\n")


def _rows(pairs: Sequence[tuple[str, Any]]) -> list[str]:
    width = max((len(k) for k, _ in pairs), default=0)
    return [f"{k.ljust(width)}  {v}" for k, v in pairs]


def _decimal(value: Fraction, digits: int = 12) -> str:
    ctx = mpmath.MPContext()
    ctx.prec = 64
    return ctx.nstr(ctx.mpf(value.numerator) / value.denominator, digits)


# ------------------------------------------------------------------ solve


def cmd_solve(args) -> int:
    fld = resolve_field(args)
    original, _ = load_system(args.input)
    sys_, removed = cleaned(original)
    method = Method(args.method)
    extra: list[tuple[str, Any]] = []
    if method is Method.DNM:
        res = dnm_run(sys_, args.dnm_i, fld)
        values, steps, stopped = res.value, res.steps, "budget"
        extra.append(("dnm_i", args.dnm_i))
    else:
        stop = StopRule(max_iters=args.max_iters, target_certified_bits=args.target_bits,
                        max_rational_bits=args.max_rational_bits)
        if method is Method.KLEENE:
            trace = kleene_run(sys_, stop, fld)
        elif method is Method.NEWTON:
            trace = newton_run(sys_, stop, fld)
        else:
            trace = tangent_run(sys_, stop, fld)
        values, steps, stopped = trace.last, trace.steps, trace.stopped_by
    res_norm = residual(sys_, values, fld)
    by_name = dict(zip(sys_.variables, values))
    full = [(v, fld.fmt(by_name[v]) if v in by_name else fld.fmt(fld.zero)) for v in original.variables]
    data = {
        "method": method.value,
        "scalar": fld.spec(),
        "iterations": steps,
        "stopped_by": stopped,
        "residual": fld.fmt(res_norm),
        **{k: v for k, v in extra},
        "values": dict(full),
        "removed": removed,
    }
    table = _rows(
        [("method", method.value), ("scalar", fld.spec()), ("iterations", steps), ("stopped_by", stopped)]
        + extra
        + [("residual", fld.fmt(res_norm))]
    )
    if removed:
        table.append("removed     " + " ".join(removed) + " (least solution 0)")
    table.append("")
    table += _rows(full)
    emit(args, data, table)
    return EXIT_OK


# ---------------------------------------------------------------- certify


def _cert_dict(cert: Certificate | None, lower: list, names: Sequence[str], fld: Field) -> dict[str, Any]:
    if cert is None:
        return {
            "variables": list(names),
            "lower": [fld.fmt(v) for v in lower],
            "upper": None,
            "bits": 0,
            "justification": None,
            "params": {},
        }
    return cert.to_dict()


def certify_system(sys_: SppSystem, fld: Field, target: int, max_iters: int,
                   max_rational_bits: int | None = None) -> dict[str, Any]:
    """Per-SCC certificates for a cleaned system, reported in its own variables."""
    red = reduce_to_quadratic(sys_)
    rsys = red.reduced
    n_orig = red.n_original
    dec = scc_decompose(rsys)
    values: dict[int, Fraction] = {}
    lower: dict[int, Any] = {}
    upper: dict[int, Any] = {}
    reports = []
    for cid in dec.order:
        scc = dec.sccs[cid]
        members = list(scc.members)
        deps = sorted({v for m in members for v in rsys.depends_on(m)} - set(members))
        sub = substitute(rsys, {k: values[k] for k in deps}, keep=members)
        iterations = 0
        if scc.trivial:
            exact = sub.equations[0].constant
            lo, hi = [fld.convert(exact, "d")], [fld.convert(exact, "u")]
            bits = certified_bits(lo, hi, fld.bits_cap) if exact > 0 else 0
            cert = Certificate(lo, hi, bits, Justification.EXACT, {}, fld, sub.variables)
            last = lo
        else:
            stop = StopRule(max_iters=max_iters, target_certified_bits=target, max_rational_bits=max_rational_bits)
            trace = newton_run(sub, stop, fld)
            cert, iterations = trace.certificate, trace.steps
            last = trace.last if cert is None else cert.lower
        for k, m in enumerate(members):
            values[m] = to_fraction(last[k])
            lower[m] = last[k]
            upper[m] = None if cert is None else cert.upper[k]
        keep = [k for k, m in enumerate(members) if m < n_orig]
        if not keep:
            continue
        names = [rsys.variables[members[k]] for k in keep]
        if cert is not None:
            cert = cert.restrict(keep, names)
        shown = _cert_dict(cert, [last[k] for k in keep], names, fld)
        reports.append(
            {
                "scc": len(reports),
                "depth": scc.depth,
                "kind": "acyclic" if scc.trivial else "cyclic",
                "iterations": iterations,
                "certificate": shown,
                "reached": cert is not None and cert.certified_bits >= target,
            }
        )
    single = dec.strongly_connected
    glob = {
        "certified": single,
        "note": (
            "single strongly connected component; the interval is the certificate above"
            if single
            else "UNCERTIFIED composition: each SCC was certified with lower bounds of deeper SCCs substituted"
        ),
        "variables": list(rsys.variables[:n_orig]),
        "lower": [fld.fmt(lower[m]) for m in range(n_orig)],
        "upper": [None if upper[m] is None else fld.fmt(upper[m]) for m in range(n_orig)],
    }
    return {"sccs": reports, "global": glob, "reached": all(r["reached"] for r in reports)}


def cmd_certify(args) -> int:
    fld = resolve_field(args)
    target = DEFAULT_TARGET_BITS if args.target_bits is None else args.target_bits
    if target < 1:
        raise CliError("--target-bits must be positive")
    original, _ = load_system(args.input)
    sys_, removed = cleaned(original)
    result = certify_system(sys_, fld, target, args.max_iters, args.max_rational_bits)
    data = {"scalar": fld.spec(), "target_bits": target, "max_iters": args.max_iters, **result, "zero_components": removed}
    table = _rows([("scalar", fld.spec()), ("target_bits", target), ("max_iters", args.max_iters)])
    for rep in result["sccs"]:
        cert = rep["certificate"]
        table.append("")
        table.append(
            f"scc {rep['scc']}  depth {rep['depth']}  {rep['kind']}  iterations {rep['iterations']}  "
            f"bits {cert['bits']}  {cert['justification'] or 'no certificate'}"
        )
        uppers = cert["upper"] or ["-"] * len(cert["lower"])
        table += ["  " + r for r in _rows([(v, f"[{lo}, {hi}]") for v, lo, hi in zip(cert["variables"], cert["lower"], uppers)])]
        for k, v in cert["params"].items():
            table.append(f"  {k} = {v}")
    table.append("")
    table.append("global: " + result["global"]["note"])
    if removed:
        table.append("zero components: " + " ".join(removed))
    table.append("status: " + ("target reached" if result["reached"] else "target NOT reached within budget"))
    emit(args, data, table)
    return EXIT_OK if result["reached"] else EXIT_BUDGET


# -------------------------------------------------------------- decompose


def cmd_decompose(args) -> int:
    sys_, _ = load_system(args.input)
    dec = scc_decompose(sys_)
    sccs = []
    for cid in dec.order:
        scc = dec.sccs[cid]
        sccs.append(
            {
                "id": cid,
                "depth": scc.depth,
                "kind": "acyclic" if scc.trivial else "cyclic",
                "members": [sys_.variables[m] for m in scc.members],
                "depends_on": sorted(dec.edges[cid]),
            }
        )
    data = {"n": sys_.n, "height": dec.height, "width": dec.width, "sccs": sccs}
    table = _rows([("n", sys_.n), ("height", dec.height), ("width", dec.width)]) + [""]
    table.append("scc  depth  kind     members  depends_on")
    for s in sccs:
        deps = ",".join(str(d) for d in s["depends_on"]) or "-"
        table.append(f"{s['id']:<4} {s['depth']:<6} {s['kind']:<8} {' '.join(s['members'])}  {deps}")
    emit(args, data, table)
    return EXIT_OK


# ---------------------------------------------------------------- convert


def cmd_convert(args) -> int:
    sys_, legend = load_system(args.input)
    if args.json:
        data = system_to_dict(sys_)
        if legend is not None:
            data["legend"] = legend
        sys.stdout.write(json.dumps(data, indent=2, ensure_ascii=False) + "\n")
        return EXIT_OK
    header = ""
    if legend is not None and any(isinstance(v, list) for v in legend.values()):
        header = "".join(f"# {var} = [{' '.join(t)}]\n" for var, t in legend.items())
    sys.stdout.write(header + format_system(sys_))
    return EXIT_OK


# ------------------------------------------------------------------ bench


def cmd_bench(args) -> int:
    """Valid bits of the last component of the worst-case chain after ``k * 2^(n-1)`` Newton steps."""
    fld = resolve_field(args, default="rational")
    n, kmax = args.n, args.k
    if n < 1 or kmax < 1:
        raise CliError("n and k must be positive")
    sys_ = families.worst_case(n)
    per_bit = 2 ** (n - 1)
    limit = BENCH_RATIONAL_BITS if args.max_rational_bits is None else args.max_rational_bits
    trace = newton_run(sys_, StopRule(max_iters=kmax * per_bit, max_rational_bits=limit), fld)
    rows = []
    for k in range(1, kmax + 1):
        it = k * per_bit
        if it >= len(trace.iterates):
            break
        err = 1 - to_fraction(trace.iterates[it][n - 1])
        bits = _valid_bits(err)
        rows.append(
            {
                "k": k,
                "iterations": it,
                "error": _decimal(err),
                "valid_bits": bits,
                "error_exceeds_2^-k": err > Fraction(1, 2**k),
            }
        )
    data = {"n": n, "scalar": fld.spec(), "iterations_per_bit": per_bit, "stopped_by": trace.stopped_by, "rows": rows}
    table = _rows([("n", n), ("scalar", fld.spec()), ("iterations_per_bit", per_bit)]) + [""]
    table.append("k   iterations  error of X%d      valid_bits  error > 2^-k" % n)
    if len(rows) < kmax:
        table.append(f"(stopped by {trace.stopped_by} after {trace.steps} iterations)")
    for r in rows:
        table.append(f"{r['k']:<3} {r['iterations']:<11} {r['error']:<16} {r['valid_bits']:<11} {r['error_exceeds_2^-k']}")
    emit(args, data, table)
    return EXIT_OK


def _valid_bits(err: Fraction) -> int | None:
    """Largest ``i`` with ``err <= 2^-i`` (relative to the fixed point 1)."""
    if err <= 0:
        return None
    i = 0
    while err <= Fraction(1, 2 ** (i + 1)):
        i += 1
    return i


# ------------------------------------------------------------------- main


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--method", choices=[m.value for m in Method], default=Method.NEWTON.value)
    common.add_argument("--scalar", default=None, help=f"'rational' or 'float:<bits>' (default {DEFAULT_SCALAR})")
    common.add_argument("--max-iters", type=int, default=100)
    common.add_argument("--target-bits", type=int, default=None)
    common.add_argument("--json", action="store_true", help="JSON instead of a table")
    common.add_argument("--max-rational-bits", type=int, default=None,
                        help="rational mode: stop when a denominator exceeds this many bits")

    parser = argparse.ArgumentParser(prog="sppfix", description="Least fixed points of positive polynomial systems.")
    sub = parser.add_subparsers(dest="command", required=True)
    src_help = "DSL file, system or model JSON (.json), or a builtin such as @back-button or @worst:3"

    p = sub.add_parser("solve", parents=[common], help="iterate to an approximation of the least fixed point")
    p.add_argument("input", help=src_help)
    p.add_argument("--dnm-i", type=int, default=1, help="precision parameter of decomposed Newton")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("certify", parents=[common], help="Newton with certified lower/upper bounds per SCC")
    p.add_argument("input", help=src_help)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("decompose", parents=[common], help="print the SCC condensation with depths")
    p.add_argument("input", help=src_help)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("convert", parents=[common], help="model JSON or DSL to DSL (or system JSON with --json)")
    p.add_argument("input", help=src_help)
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("bench", parents=[common], help="Newton bits per iteration on the worst-case chain")
    p.add_argument("n", type=int, help="chain length")
    p.add_argument("--k", type=int, default=3, help="largest bit count to test")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.max_iters is not None and args.max_iters < 0:
        parser.error("--max-iters must be nonnegative")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"sppfix: error: {exc}", file=sys.stderr)
    except SppError as exc:
        print(f"sppfix: error: {type(exc).__name__}: {exc}", file=sys.stderr)
    except ValueError as exc:
        print(f"sppfix: error: {exc}", file=sys.stderr)
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
