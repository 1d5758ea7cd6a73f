"""Exact optima of small covering LPs in rational arithmetic, for tests and checks.

Covering ``min w.x, A x >= 1, x >= 0`` is solved through its dual
``max 1.u, A^T u <= w, u >= 0``, whose origin is feasible because w >= 0.
The dual is run with a dictionary simplex under Bland's rule on
:class:`fractions.Fraction` values (floats convert exactly), so the optimum
is exact. A brute-force vertex enumeration covers instances with few columns.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np


def _dense(A) -> np.ndarray:
    if hasattr(A, "A") and hasattr(A, "w"):
        A = A.A
    if hasattr(A, "indptr") and hasattr(A, "rhs"):
        out = np.zeros((A.m, A.n))
        for i in range(A.m):
            for k in range(A.indptr[i], A.indptr[i + 1]):
                out[i, A.indices[k]] += A.data[k]
        return out
    return np.asarray(A, dtype=float)


def covering_optimum(A, w) -> tuple[Fraction, list[Fraction], list[Fraction]]:
    """Exact ``(optimum, x, u)`` for ``min w.x, A x >= 1, x >= 0`` (A as m x n).

    Raises ValueError if some row has no positive entry (infeasible).
    """
    M = _dense(A)
    m, n = M.shape
    if any(not np.any(M[i] > 0) for i in range(m)):
        raise ValueError("covering LP is infeasible: a row has no positive entry")
    # dictionary rows: basic var = rhs - sum_k coef[k] * nonbasic[k]
    # variables 0..m-1 are u, m..m+n-1 are the slacks of A^T u <= w
    nonbasic = list(range(m))
    basic = [m + j for j in range(n)]
    coef = [[Fraction(float(M[i, j])) for i in range(m)] for j in range(n)]
    rhs = [Fraction(float(v)) for v in np.asarray(w, dtype=float)]
    obj = [Fraction(1)] * m
    z = Fraction(0)
    while True:
        enter = None
        for k in sorted(range(m), key=lambda t: nonbasic[t]):
            if obj[k] > 0:
                enter = k
                break
        if enter is None:
            break
        leave = None
        best = None
        for r in range(n):
            a = coef[r][enter]
            if a > 0:
                ratio = rhs[r] / a
                if best is None or ratio < best or (ratio == best and basic[r] < basic[leave]):
                    best, leave = ratio, r
        if leave is None:
            raise ValueError("dual unbounded")
        piv = coef[leave][enter]
        # solve the leaving row for the entering variable
        row = [c / piv for c in coef[leave]]
        row[enter] = 1 / piv
        b = rhs[leave] / piv
        for r in range(n):
            if r == leave:
                continue
            a = coef[r][enter]
            if a == 0:
                continue
            cr = coef[r]
            for k in range(m):
                cr[k] = -a * row[k] if k == enter else cr[k] - a * row[k]
            rhs[r] -= a * b
        oe = obj[enter]
        for k in range(m):
            obj[k] = -oe * row[k] if k == enter else obj[k] - oe * row[k]
        z += oe * b
        coef[leave], rhs[leave] = row, b
        basic[leave], nonbasic[enter] = nonbasic[enter], basic[leave]
    u = [Fraction(0)] * m
    for r, v in enumerate(basic):
        if v < m:
            u[v] = rhs[r]
    x = [Fraction(0)] * n
    for k, v in enumerate(nonbasic):
        if v >= m:
            x[v - m] = -obj[k]
    return z, x, u


def covering_optimum_by_vertices(A, w) -> Fraction:
    """Minimum of ``w.x`` over all vertices of ``{A x >= 1, x >= 0}``; for a handful of columns."""
    M = _dense(A)
    m, n = M.shape
    if any(not np.any(M[i] > 0) for i in range(m)):
        raise ValueError("covering LP is infeasible: a row has no positive entry")
    rows = [[Fraction(float(v)) for v in M[i]] for i in range(m)]
    cons = [(rows[i], Fraction(1)) for i in range(m)]
    cons += [([Fraction(int(t == j)) for t in range(n)], Fraction(0)) for j in range(n)]
    wf = [Fraction(float(v)) for v in np.asarray(w, dtype=float)]
    best = None
    for pick in itertools.combinations(range(len(cons)), n):
        sol = _solve([cons[p][0] for p in pick], [cons[p][1] for p in pick])
        if sol is None or any(v < 0 for v in sol):
            continue
        if any(sum(a * v for a, v in zip(r, sol)) < 1 for r in rows):
            continue
        val = sum(a * v for a, v in zip(wf, sol))
        if best is None or val < best:
            best = val
    return best


def _solve(rows: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction] | None:
    """Gauss-Jordan on a square rational system; None when singular."""
    n = len(rows)
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    for c in range(n):
        p = next((r for r in range(c, n) if aug[r][c] != 0), None)
        if p is None:
            return None
        aug[c], aug[p] = aug[p], aug[c]
        pv = aug[c][c]
        aug[c] = [v / pv for v in aug[c]]
        for r in range(n):
            if r != c and aug[r][c] != 0:
                f = aug[r][c]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[c])]
    return [aug[r][n] for r in range(n)]
