"""Text and JSON formats for SPP systems.

Text format, one equation per line::

    # comment
    X1 = 0.4*X2*X1 + 0.6
    X2 = 3/10*X1*X2 + 0.4*X3*X2 + 0.3

Coefficients are decimals or ``p/q`` and are read as exact rationals.  A term
without a numeric factor has coefficient 1.  Variables are ordered by the
left-hand sides.
"""

from __future__ import annotations

import json
import re
from fractions import Fraction
from typing import Any

from ..errors import DslSyntaxError, NegativeCoefficient, UnknownVariable
from .system import Polynomial, SppSystem

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+]?\d+)?(?:/\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[=+*^])
  | (?P<minus>-)
  """,
    re.VERBOSE,
)

NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


def _tokenize(line: str, lineno: int) -> list[tuple[str, str, int]]:
    pos = 0
    out = []
    while pos < len(line):
        m = _TOKEN.match(line, pos)
        if m is None:
            raise DslSyntaxError(f"unexpected character {line[pos]!r}", lineno, pos + 1)
        kind = m.lastgroup
        if kind == "minus":
            raise NegativeCoefficient("negative terms are not allowed", lineno, pos + 1)
        if kind != "ws":
            out.append((kind, m.group(), pos + 1))
        pos = m.end()
    return out


def _number(text: str, lineno: int, col: int) -> Fraction:
    try:
        if "/" in text:
            num, den = text.split("/")
            if int(den) == 0:
                raise DslSyntaxError("division by zero in coefficient", lineno, col)
            return Fraction(num) / int(den)
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise DslSyntaxError(f"bad number {text!r}", lineno, col) from None


def _parse_rhs(tokens, lineno: int):
    """Return ``[(coef, [(name, deg, col), ...]), ...]``."""
    terms = []
    i = 0
    n = len(tokens)

    def expect_factor():
        nonlocal i
        if i >= n:
            col = tokens[-1][2] + len(tokens[-1][1]) if tokens else 1
            raise DslSyntaxError("expected a coefficient or variable", lineno, col)
        kind, text, col = tokens[i]
        i += 1
        if kind == "number":
            return ("num", _number(text, lineno, col), col)
        if kind == "name":
            deg = 1
            if i < n and tokens[i][1] == "^":
                i += 1
                if i >= n or tokens[i][0] != "number" or not tokens[i][1].isdigit():
                    c = tokens[i][2] if i < n else col
                    raise DslSyntaxError("exponent must be a positive integer", lineno, c)
                deg = int(tokens[i][1])
                if deg < 1:
                    raise DslSyntaxError("exponent must be a positive integer", lineno, tokens[i][2])
                i += 1
            return ("var", (text, deg), col)
        raise DslSyntaxError(f"unexpected {text!r}", lineno, col)

    while True:
        coef = Fraction(1)
        factors = []
        while True:
            kind, val, col = expect_factor()
            if kind == "num":
                coef *= val
            else:
                factors.append((val[0], val[1], col))
            if i < n and tokens[i][1] == "*":
                i += 1
                continue
            break
        terms.append((coef, factors))
        if i >= n:
            break
        kind, text, col = tokens[i]
        if text != "+":
            raise DslSyntaxError(f"expected '+' or end of line, got {text!r}", lineno, col)
        i += 1
    return terms


def parse_system(text: str) -> SppSystem:
    """Parse the equation DSL into an :class:`SppSystem`."""
    raw = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0]
        if not line.strip():
            continue
        tokens = _tokenize(line, lineno)
        if len(tokens) < 3 or tokens[0][0] != "name" or tokens[1][1] != "=":
            col = tokens[0][2] if tokens else 1
            raise DslSyntaxError("expected '<Var> = <terms>'", lineno, col)
        rhs = tokens[2:]
        for kind, text_, col in rhs:
            if text_ == "=":
                raise DslSyntaxError("more than one '=' on a line", lineno, col)
        raw.append((tokens[0][1], tokens[0][2], _parse_rhs(rhs, lineno), lineno))

    names: list[str] = []
    for name, col, _, lineno in raw:
        if name in names:
            raise DslSyntaxError(f"variable {name} defined twice", lineno, col)
        names.append(name)
    index = {name: k for k, name in enumerate(names)}

    equations = []
    for _, _, terms, lineno in raw:
        built = []
        for coef, factors in terms:
            idx = []
            for name, deg, col in factors:
                if name not in index:
                    raise UnknownVariable(f"variable {name} has no defining equation", lineno, col)
                idx.extend([index[name]] * deg)
            built.append((coef, idx))
        equations.append(Polynomial.build(built))
    return SppSystem(tuple(names), tuple(equations))


def format_coefficient(c: Fraction) -> str:
    """Exact decimal when the denominator is of the form 2^a 5^b, else ``p/q``."""
    c = Fraction(c)
    q = c.denominator
    twos = fives = 0
    while q % 2 == 0:
        q //= 2
        twos += 1
    while q % 5 == 0:
        q //= 5
        fives += 1
    if q != 1:
        return f"{c.numerator}/{c.denominator}"
    if c.denominator == 1:
        return str(c.numerator)
    digits = max(twos, fives)
    scaled = c.numerator * 10**digits // c.denominator
    whole, frac = divmod(scaled, 10**digits)
    return f"{whole}.{str(frac).rjust(digits, '0').rstrip('0')}"


def format_polynomial(poly: Polynomial, names) -> str:
    parts = []
    for mono in poly.monomials:
        factors = [names[v] if d == 1 else f"{names[v]}^{d}" for v, d in mono.powers]
        if mono.coefficient != 1:
            factors.insert(0, format_coefficient(mono.coefficient))
        parts.append("*".join(factors))
    if poly.constant or not parts:
        parts.append(format_coefficient(poly.constant))
    return " + ".join(parts)


def format_system(sys: SppSystem) -> str:
    lines = [
        f"{name} = {format_polynomial(poly, sys.variables)}"
        for name, poly in zip(sys.variables, sys.equations)
    ]
    return "\n".join(lines) + ("\n" if lines else "")


def _fraction_str(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def system_to_dict(sys: SppSystem) -> dict[str, Any]:
    equations = []
    for poly in sys.equations:
        terms = [
            {"coeff": _fraction_str(m.coefficient), "powers": {sys.variables[v]: d for v, d in m.powers}}
            for m in poly.monomials
        ]
        if poly.constant:
            terms.append({"coeff": _fraction_str(poly.constant), "powers": {}})
        equations.append(terms)
    return {"variables": list(sys.variables), "equations": equations}


def system_from_dict(data: dict[str, Any]) -> SppSystem:
    try:
        names = list(data["variables"])
        eqs = data["equations"]
    except (KeyError, TypeError):
        raise DslSyntaxError("system JSON needs 'variables' and 'equations'") from None
    if len(names) != len(eqs):
        raise DslSyntaxError("'variables' and 'equations' differ in length")
    index = {name: k for k, name in enumerate(names)}
    equations = []
    for terms in eqs:
        built = []
        for term in terms:
            coef = Fraction(str(term["coeff"]))
            if coef < 0:
                raise NegativeCoefficient(f"negative coefficient {term['coeff']}")
            factors = []
            for name, deg in term.get("powers", {}).items():
                if name not in index:
                    raise UnknownVariable(f"variable {name} has no defining equation")
                if int(deg) < 1:
                    raise DslSyntaxError(f"exponent of {name} must be >= 1")
                factors.extend([index[name]] * int(deg))
            built.append((coef, factors))
        equations.append(Polynomial.build(built))
    return SppSystem(tuple(names), tuple(equations))


def system_to_json(sys: SppSystem) -> str:
    return json.dumps(system_to_dict(sys), indent=2)


def system_from_json(text: str) -> SppSystem:
    return system_from_dict(json.loads(text))
