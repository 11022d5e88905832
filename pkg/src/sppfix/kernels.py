"""float64 hot loops: Monte-Carlo revocation and dense quadratic Newton.

Each kernel has a numba ``@njit`` version and a numpy version with the same
contract.  Setting ``SPPFIX_DISABLE_NUMBA=1`` (or running without numba)
selects numpy.  These kernels serve as test oracles and benchmarks; the
certified engines in :mod:`sppfix.iterate` never use them.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .core.system import SppSystem

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

DISABLE_ENV = "SPPFIX_DISABLE_NUMBA"
STACK_CAP = 1000  # escaping walks hit this depth; returning from it has probability < 1e-3
STEP_CAP = 10_000_000


def numba_enabled() -> bool:
    return numba is not None and os.environ.get(DISABLE_ENV, "") not in ("1", "true", "yes")


def backend() -> str:
    return "numba" if numba_enabled() else "numpy"


def _njit(fn):
    if numba is None:
        return fn
    return numba.njit(cache=False, nogil=True)(fn)


# --------------------------------------------------------------- Monte Carlo


@dataclass(frozen=True)
class RevocationEstimate:
    probability: float
    std_error: float
    trials: int
    truncated: int  # trials stopped by the stack or step cap, counted as not revoked


def _mc_tables(model):
    """Back probabilities and cumulative link tables of a back-button model."""
    pages = list(model.pages)
    n = len(pages)
    back = np.array([float(model.back_prob[p]) for p in pages])
    width = max(1, max(len(model.out_links(p)) for p in pages))
    targets = np.zeros((n, width), dtype=np.int64)
    cum = np.ones((n, width))
    for i, p in enumerate(pages):
        acc = back[i]
        for k, (b, prob) in enumerate(sorted(model.out_links(p).items())):
            acc += float(prob)
            targets[i, k] = pages.index(b)
            cum[i, k] = acc
        cum[i, len(model.out_links(p)) - 1 if model.out_links(p) else 0] = 1.0
    return back, targets, cum


def _mc_python(start, trials, back, targets, cum, seed, stack_cap, step_cap):
    np.random.seed(seed)
    stack = np.empty(stack_cap, dtype=np.int64)
    revoked = 0
    truncated = 0
    width = targets.shape[1]
    for _ in range(trials):
        stack[0] = start
        depth = 1
        steps = 0
        while depth > 0:
            if steps >= step_cap:
                truncated += 1
                break
            top = stack[depth - 1]
            u = np.random.random()
            steps += 1
            if u < back[top]:
                depth -= 1
                continue
            if depth >= stack_cap:
                truncated += 1
                break
            k = 0
            while k < width - 1 and u >= cum[top, k]:
                k += 1
            stack[depth] = targets[top, k]
            depth += 1
        if depth == 0:
            revoked += 1
    return revoked, truncated


_mc_numba = _njit(_mc_python)


def _mc_numpy(start, trials, back, targets, cum, seed, stack_cap, step_cap, chunk=4096):
    rng = np.random.default_rng(seed)
    revoked = 0
    truncated = 0
    done = 0
    while done < trials:
        m = min(chunk, trials - done)
        done += m
        stacks = np.empty((m, stack_cap + 1), dtype=np.int32)
        stacks[:, 0] = start
        depth = np.ones(m, dtype=np.int64)
        live = np.arange(m)
        steps = 0
        while live.size:
            if steps >= step_cap:
                truncated += live.size
                break
            u = rng.random(live.size)
            top = stacks[live, depth[live] - 1]
            pop = u < back[top]
            depth[live[pop]] -= 1
            push = ~pop
            rows = live[push]
            if rows.size:
                t = top[push]
                k = (u[push][:, None] >= cum[t]).sum(axis=1)
                k = np.minimum(k, targets.shape[1] - 1)
                stacks[rows, depth[rows]] = targets[t, k]
                depth[rows] += 1
            steps += 1
            over = depth[live] > stack_cap
            truncated += int(over.sum())
            live = live[(depth[live] > 0) & ~over]
        revoked += int((depth == 0).sum())
    return revoked, truncated


def simulate_revocation(model, page: str, trials: int, seed: int = 0, *,
                        stack_cap: int = STACK_CAP, step_cap: int = STEP_CAP,
                        use_numba: bool | None = None) -> RevocationEstimate:
    """Estimate the probability that the stack started with ``page`` empties.

    Trials that hit ``stack_cap`` or ``step_cap`` count as not revoked, so the
    estimate is biased low by at most the return probability from the cap.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    back, targets, cum = _mc_tables(model)
    start = list(model.pages).index(page)
    fast = numba_enabled() if use_numba is None else (use_numba and numba is not None)
    kernel = _mc_numba if fast else _mc_numpy
    revoked, truncated = kernel(start, trials, back, targets, cum, seed, stack_cap, step_cap)
    p = revoked / trials
    return RevocationEstimate(p, float(np.sqrt(max(p * (1 - p), 1e-300) / trials)), trials, truncated)


# ------------------------------------------------------------ dense Newton


@dataclass(frozen=True)
class DenseQuadratic:
    """``f(x) = c + L x + sum_jk Q[:, j, k] x_j x_k`` in float64."""

    const: np.ndarray
    lin: np.ndarray
    quad: np.ndarray

    @classmethod
    def from_system(cls, sys: SppSystem) -> "DenseQuadratic":
        if not sys.is_quadratic():
            raise ValueError("dense kernels need a quadratic system")
        n = sys.n
        c = np.zeros(n)
        lin = np.zeros((n, n))
        quad = np.zeros((n, n, n))
        for i, poly in enumerate(sys.equations):
            c[i] = float(poly.constant)
            for mono in poly.monomials:
                f = mono.factors()
                if len(f) == 1:
                    lin[i, f[0]] += float(mono.coefficient)
                else:
                    quad[i, f[0], f[1]] += float(mono.coefficient)
        return cls(c, lin, quad)


def _newton_python(c, lin, quad, iters, tol):
    n = c.shape[0]
    x = np.zeros(n)
    done = 0
    for _ in range(iters):
        fx = c.copy()
        jac = lin.copy()
        for i in range(n):
            for j in range(n):
                fx[i] += lin[i, j] * x[j]
                for k in range(n):
                    q = quad[i, j, k]
                    if q != 0.0:
                        fx[i] += q * x[j] * x[k]
                        jac[i, j] += q * x[k]
                        jac[i, k] += q * x[j]
        a = -jac
        for i in range(n):
            a[i, i] += 1.0
        b = fx - x
        # Gaussian elimination with partial pivoting
        for col in range(n):
            piv = col
            for r in range(col + 1, n):
                if abs(a[r, col]) > abs(a[piv, col]):
                    piv = r
            if abs(a[piv, col]) < 1e-300:
                return x, done
            if piv != col:
                for cc in range(n):
                    tmp = a[col, cc]
                    a[col, cc] = a[piv, cc]
                    a[piv, cc] = tmp
                tmp = b[col]
                b[col] = b[piv]
                b[piv] = tmp
            for r in range(col + 1, n):
                m = a[r, col] / a[col, col]
                if m != 0.0:
                    for cc in range(col, n):
                        a[r, cc] -= m * a[col, cc]
                    b[r] -= m * b[col]
        d = np.zeros(n)
        for r in range(n - 1, -1, -1):
            s = b[r]
            for cc in range(r + 1, n):
                s -= a[r, cc] * d[cc]
            d[r] = s / a[r, r]
        x = x + d
        done += 1
        step = 0.0
        for i in range(n):
            if abs(d[i]) > step:
                step = abs(d[i])
        if step <= tol:
            break
    return x, done


_newton_numba = _njit(_newton_python)


def _newton_numpy(c, lin, quad, iters, tol):
    n = c.shape[0]
    x = np.zeros(n)
    eye = np.eye(n)
    sym = quad + quad.transpose(0, 2, 1)
    done = 0
    for _ in range(iters):
        fx = c + lin @ x + np.einsum("ijk,j,k->i", quad, x, x)
        jac = lin + np.einsum("ijk,k->ij", sym, x)
        try:
            d = np.linalg.solve(eye - jac, fx - x)
        except np.linalg.LinAlgError:
            return x, done
        x = x + d
        done += 1
        if np.max(np.abs(d)) <= tol:
            break
    return x, done


def dense_newton(sys: SppSystem | DenseQuadratic, iters: int = 100, tol: float = 0.0,
                 use_numba: bool | None = None) -> tuple[np.ndarray, int]:
    """float64 Newton from zero; stops after ``iters`` steps or a step below ``tol``."""
    dq = sys if isinstance(sys, DenseQuadratic) else DenseQuadratic.from_system(sys)
    fast = numba_enabled() if use_numba is None else (use_numba and numba is not None)
    kernel = _newton_numba if fast else _newton_numpy
    return kernel(dq.const, dq.lin, dq.quad, iters, tol)
