"""Dense Gaussian elimination with partial pivoting over a scalar field."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Sequence

from .errors import DimensionMismatch, SingularSystem
from .scalar import Field


@dataclass(frozen=True)
class SolveInfo:
    """Pivot magnitudes seen during elimination; their ratio is a cheap conditioning hint."""

    min_pivot: Any
    max_pivot: Any

    @property
    def pivot_ratio(self):
        if not self.min_pivot:
            return None
        return self.max_pivot / self.min_pivot


def solve(a: Sequence[Sequence[Any]], b: Sequence[Any], fld: Field) -> tuple[list, SolveInfo]:
    """Solve ``a @ x = b``.

    Raises SingularSystem when a pivot is exactly zero (exact fields) or its
    magnitude drops below ``fld.singular_tol`` (floating fields).
    """
    n = len(b)
    if len(a) != n or any(len(row) != n for row in a):
        raise DimensionMismatch("matrix and right-hand side disagree in size")
    m = [fld.vector(row) + [fld.convert(b[i])] for i, row in enumerate(a)]
    min_piv = max_piv = None
    for col in range(n):
        best = col
        best_abs = abs(m[col][col])
        for r in range(col + 1, n):
            v = abs(m[r][col])
            if v > best_abs:
                best, best_abs = r, v
        if best_abs == 0 or best_abs < fld.singular_tol:
            raise SingularSystem(f"pivot {fld.fmt(best_abs)} in column {col}")
        if best != col:
            m[col], m[best] = m[best], m[col]
        if min_piv is None or best_abs < min_piv:
            min_piv = best_abs
        if max_piv is None or best_abs > max_piv:
            max_piv = best_abs
        pivot_row = m[col]
        piv = pivot_row[col]
        for r in range(col + 1, n):
            row = m[r]
            if not row[col]:
                continue
            factor = row[col] / piv
            row[col] = fld.zero
            for k in range(col + 1, n + 1):
                row[k] = row[k] - factor * pivot_row[k]
    x = [fld.zero] * n
    for i in reversed(range(n)):
        row = m[i]
        acc = row[n]
        for k in range(i + 1, n):
            acc = acc - row[k] * x[k]
        x[i] = acc / row[i]
    info = SolveInfo(min_piv if min_piv is not None else fld.zero, max_piv if max_piv is not None else fld.zero)
    return x, info


def identity_minus(mat: Sequence[Sequence[Any]], fld: Field) -> list[list]:
    n = len(mat)
    return [[(fld.one if i == j else fld.zero) - mat[i][j] for j in range(n)] for i in range(n)]


def mat_vec(mat: Sequence[Sequence[Any]], v: Sequence[Any], fld: Field) -> list:
    out = []
    for row in mat:
        acc = fld.zero
        for a, b in zip(row, v):
            acc = acc + a * b
        out.append(acc)
    return out
