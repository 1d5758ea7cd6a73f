"""Setup and jitted helpers shared by the mixed packing/covering solvers.

Weights ``p_i = (1+eps)**(P_i x)`` and ``c_i = (1-eps)**(C_i x)`` are never
formed as doubles. Each is stored as an extended-range pair (mantissa in
[1, 2), int64 exponent); column sums align terms to the largest exponent and
are reported as base-2 logarithms.
"""

from __future__ import annotations

import contextlib
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import numba
from numba import njit

from ..extended import ext_from_log2, ext_log2, ext_norm
from ..instances import InstanceError, MixedInstance

# kernel return codes
SOLVED = 0
SUSPECT_INFEASIBLE = 1
CAP_EXCEEDED = 2

NEG_INF = -math.inf
IMIN = -(2**62)
# terms more than GAP binary orders below the largest cannot change a double sum
GAP = 1100
POW2NEG = np.array([math.ldexp(1.0, -d) for d in range(GAP)])
LN2 = math.log(2.0)


def check_eps(eps: float) -> float:
    eps = float(eps)
    if not (0.0 < eps <= 0.1):
        raise ValueError(f"eps must lie in (0, 0.1], got {eps}")
    return eps


def target(max_start_row: float, m: int, eps: float) -> float:
    """Coverage target ``U = (max_i P_i x0 + ln m) / eps**2``.

    ``ln m`` is floored at 1 so instances with one or two rows still get a
    positive target.
    """
    return (max_start_row + max(math.log(m), 1.0)) / (eps * eps)


@dataclass(frozen=True)
class Arrays:
    """Flat arrays handed to the kernels (CSC views sorted by coefficient)."""

    n: int
    m_p: int
    m_c: int
    p_ptr: np.ndarray
    p_rows: np.ndarray
    p_vals: np.ndarray
    c_ptr: np.ndarray
    c_rows: np.ndarray
    c_vals: np.ndarray
    pr_ptr: np.ndarray
    pr_cols: np.ndarray
    pr_vals: np.ndarray
    cr_ptr: np.ndarray
    cr_cols: np.ndarray
    cr_vals: np.ndarray


def prepare(inst: MixedInstance) -> Arrays:
    if not isinstance(inst, MixedInstance):
        raise TypeError("expected a MixedInstance")
    if not inst.is_normalized:
        raise InstanceError("instance is not normalized; call normalize() first")
    if inst.m == 0:
        raise InstanceError("instance has no rows")
    P, C = inst.packing, inst.covering
    empty = (np.diff(P.col_ptr) + np.diff(C.col_ptr)) == 0
    if empty.any():
        raise InstanceError(f"columns {np.flatnonzero(empty)[:5].tolist()} have no nonzeros")
    return Arrays(
        inst.n, inst.m_p, inst.m_c,
        P.col_ptr, P.col_rows, P.col_vals,
        C.col_ptr, C.col_rows, C.col_vals,
        P.indptr, P.indices, P.data,
        C.indptr, C.indices, C.data,
    )


def empty_covering_rows(inst: MixedInstance) -> np.ndarray:
    return np.flatnonzero(np.diff(inst.covering.indptr) == 0)


@njit(cache=True)
def column_ext_sum(ptr, rows, vals, j, wm, we):
    """``sum_i v_ij * w_i`` over column j as an extended pair, for ``w_i = wm_i * 2**we_i``.

    Terms are aligned to the largest exponent through a table of negative
    powers of two, so no exponential is taken. Inactive rows have ``wm_i = 0``.
    """
    top = IMIN
    for k in range(ptr[j], ptr[j + 1]):
        i = rows[k]
        if wm[i] != 0.0 and we[i] > top:
            top = we[i]
    if top == IMIN:
        return 0.0, 0
    s = 0.0
    for k in range(ptr[j], ptr[j + 1]):
        i = rows[k]
        d = top - we[i]
        if wm[i] != 0.0 and d < GAP:
            s += vals[k] * wm[i] * POW2NEG[d]
    return ext_norm(s, top)


@njit(cache=True)
def column_log2_sum(ptr, rows, vals, j, wm, we):
    """``log2`` of :func:`column_ext_sum`; ``-inf`` for an empty or fully inactive column."""
    m, e = column_ext_sum(ptr, rows, vals, j, wm, we)
    return ext_log2(m, e)


@njit(cache=True)
def vector_log2_sum(wm, we):
    top = IMIN
    for i in range(wm.shape[0]):
        if wm[i] != 0.0 and we[i] > top:
            top = we[i]
    if top == IMIN:
        return NEG_INF
    s = 0.0
    for i in range(wm.shape[0]):
        d = top - we[i]
        if wm[i] != 0.0 and d < GAP:
            s += wm[i] * POW2NEG[d]
    return top + math.log2(s)


@njit(cache=True)
def set_weights(vals, L, active, wm, we):
    """``w_i = 2**(L * vals_i)`` for active rows, 0 for the rest."""
    for i in range(vals.shape[0]):
        if active[i]:
            wm[i], we[i] = ext_from_log2(vals[i] * L)
        else:
            wm[i] = 0.0
            we[i] = 0


@njit(cache=True)
def exact_lambda_min(a_n, p_ptr, p_rows, p_vals, c_ptr, c_rows, c_vals, pm, pe, cmn, ce):
    """Exact ``log2 min_j lambda(x, j)`` (``+inf`` if every column is retired)."""
    best = math.inf
    for j in range(a_n):
        lc = column_log2_sum(c_ptr, c_rows, c_vals, j, cmn, ce)
        if lc == NEG_INF:
            continue
        lp = column_log2_sum(p_ptr, p_rows, p_vals, j, pm, pe)
        lam = lp - lc
        if lam < best:
            best = lam
    return best


@njit(cache=True)
def potential_gap(pm, pe, cmn, ce, max_px0, eps, m):
    """Slack in the lmin/lmax potential relation with explicit constants.

    ``(1+6eps) lmin c - log_{1-eps} m - (1-6eps)(lmax p - max P x0 / eps - log_{1+eps} m)``;
    nonnegative values mean the relation held at this point.
    """
    lp = vector_log2_sum(pm, pe)
    lc = vector_log2_sum(cmn, ce)
    lmax_p = lp * LN2 / math.log1p(eps) if lp != NEG_INF else 0.0
    lmin_c = lc * LN2 / math.log1p(-eps) if lc != NEG_INF else math.inf
    lm = math.log(m)
    return (1 + 6 * eps) * lmin_c - lm / math.log1p(-eps) - (1 - 6 * eps) * (
        lmax_p - max_px0 / eps - lm / math.log1p(eps)
    )


def row_values(arrs: Arrays, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    P = sp.csr_matrix((arrs.pr_vals, arrs.pr_cols, arrs.pr_ptr), shape=(arrs.m_p, arrs.n))
    C = sp.csr_matrix((arrs.cr_vals, arrs.cr_cols, arrs.cr_ptr), shape=(arrs.m_c, arrs.n))
    return np.asarray(P @ x, dtype=np.float64), np.asarray(C @ x, dtype=np.float64)


@contextlib.contextmanager
def thread_count(threads: int | None):
    """Run the body with ``threads`` numba workers, restoring the old count after."""
    if threads is None:
        yield
        return
    if threads < 1:
        raise ValueError("thread count must be positive")
    old = numba.get_num_threads()
    numba.set_num_threads(min(int(threads), numba.config.NUMBA_NUM_THREADS))
    try:
        yield
    finally:
        numba.set_num_threads(old)
