"""Pure covering: minimize ``w . x`` subject to ``A x >= 1``, ``x >= 0``.

Row weights ``a_i = (1-eps)**(A_i x)`` (0 once ``A_i x >= U``) price the
columns by ``lambda(x, j) = w_j / (A_j . a)``. Columns are swept round-robin;
each runs while its price is within ``(1+4eps) lambda0``, every increment
raising the most-affected active row by exactly 1. At the end of each sweep
the exact prices give the weak-duality bound ``|a| min_j lambda(x, j)``; the
best one seen is returned as a certificate.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from .checks import covering_lower_bound
from .extended import ext_from_log2
from .instances import CoveringInstance, InstanceError
from .mpc import _common as cm
from .mpc._common import NEG_INF, column_log2_sum, vector_log2_sum
from .report import LowerBoundCertificate, SolveReport, Status

_SCALINGS, _INCREMENTS, _WORK, _SWEEPS, _ACTIVE = range(5)
_COUNTER_NAMES = ("scalings", "increments", "work", "sweeps")


@njit(cache=True)
def _kernel(n, ptr, rows, vals, w, lw, x, Ax, active, am, ae, cmax_at, lam, st, best_a, cnt, U, eps, cap):
    """Run to completion; ``st`` holds [log2 lambda0, log2 best bound, worst potential slack]."""
    L2 = math.log2(1.0 - eps)
    up1 = math.log2(1.0 + eps)
    up4 = math.log2(1.0 + 4.0 * eps)
    lm = math.log(max(am.shape[0], 1))
    while True:
        for j in range(n):
            if lam[j] > st[0] + up4:
                continue
            lo, hi = ptr[j], ptr[j + 1]
            while True:
                la = column_log2_sum(ptr, rows, vals, j, am, ae)
                cnt[_WORK] += hi - lo
                lam[j] = math.inf if la == NEG_INF else lw[j] - la
                if lam[j] > st[0] + up4:
                    break
                while cmax_at[j] < hi and not active[rows[cmax_at[j]]]:
                    cmax_at[j] += 1
                z = 1.0 / vals[cmax_at[j]]
                x[j] += z
                for k in range(lo, hi):
                    i = rows[k]
                    if not active[i]:
                        continue
                    Ax[i] += vals[k] * z
                    if Ax[i] >= U:
                        active[i] = False
                        am[i] = 0.0
                        ae[i] = 0
                        cnt[_ACTIVE] -= 1
                    else:
                        am[i], ae[i] = ext_from_log2(Ax[i] * L2)
                cnt[_INCREMENTS] += 1
                cnt[_WORK] += hi - lo
                if cnt[_ACTIVE] == 0:
                    return cm.SOLVED
        cnt[_SWEEPS] += 1
        la_tot = vector_log2_sum(am, ae)
        lam_star = math.inf
        for j in range(n):
            la = column_log2_sum(ptr, rows, vals, j, am, ae)
            lam[j] = math.inf if la == NEG_INF else lw[j] - la
            if lam[j] < lam_star:
                lam_star = lam[j]
        cnt[_WORK] += rows.shape[0] + am.shape[0]
        bound = la_tot + lam_star
        if bound > st[1] and lam_star < math.inf:
            st[1] = bound
            for i in range(am.shape[0]):
                best_a[i] = ext_log2_or_neg_inf(am[i], ae[i]) - la_tot
        # potential check with the best bound standing in for the optimum:
        # (1+6eps)(lmin a - log_{1-eps} m) * bound - w.x, scaled by 1/U
        if st[1] > NEG_INF:
            lmin = la_tot / L2
            slack = (1.0 + 6.0 * eps) * (lmin - lm / math.log1p(-eps)) * 2.0 ** st[1] - np.dot(x, w)
            if slack / U < st[2]:
                st[2] = slack / U
        while True:
            st[0] += up1
            cnt[_SCALINGS] += 1
            if cnt[_SCALINGS] > cap:
                return cm.CAP_EXCEEDED
            if lam_star <= st[0] + up4:
                break


@njit(cache=True)
def ext_log2_or_neg_inf(m, e):
    if m == 0.0:
        return NEG_INF
    return e + math.log2(m)


def initial_lambda0(inst: CoveringInstance) -> float:
    """``max_i min_j w_j / (A_ij |a(0)|)`` with ``|a(0)| = m``."""
    A = inst.A
    ratio = inst.w[A.indices] / A.data
    mins = np.minimum.reduceat(ratio, A.indptr[:-1]) if A.nnz else np.zeros(0)
    return float(mins.max()) / A.m


def solve_covering(inst: CoveringInstance, eps: float, cap_factor: float = 10.0) -> SolveReport:
    """(1+O(eps))-approximate fractional cover from ``x = 0``, with a dual lower bound.

    The report carries ``cost = w . x``, ``lower_bound`` and a
    :class:`LowerBoundCertificate` whose weights reproduce the bound.
    """
    eps = cm.check_eps(eps)
    if not isinstance(inst, CoveringInstance):
        raise TypeError("expected a CoveringInstance")
    if not inst.is_normalized:
        raise InstanceError("instance is not normalized; call normalize() first")
    if inst.m == 0:
        raise InstanceError("instance has no rows")
    inst.validate()
    A, w = inst.A, inst.w
    n, m = inst.n, inst.m
    U = cm.target(0.0, m, eps)
    x = np.zeros(n)
    Ax = np.zeros(m)
    active = np.ones(m, dtype=np.bool_)
    am, ae = np.ones(m), np.zeros(m, dtype=np.int64)
    cmax_at = A.col_ptr[:-1].copy()
    with np.errstate(divide="ignore"):
        lw = np.log2(w)
    lam = np.full(n, -math.inf)
    lam0 = initial_lambda0(inst)
    # at x = 0 the bound is |a| lambda* = m min_j w_j / |A_j|
    colsum = np.bincount(A.indices, weights=A.data, minlength=n) if A.nnz else np.zeros(n)
    with np.errstate(divide="ignore", invalid="ignore"):
        start = np.where(colsum > 0, w / np.where(colsum > 0, colsum, 1.0), np.inf)
    first = float(start.min()) * m
    st = np.array([math.log2(lam0) if lam0 > 0 else -math.inf,
                   math.log2(first) if first > 0 else -math.inf, math.inf])
    best_a = np.zeros(m)
    cnt = np.zeros(5, dtype=np.int64)
    cnt[_ACTIVE] = m
    cap = int(math.ceil(cap_factor * U))
    code = _kernel(n, A.col_ptr, A.col_rows, A.col_vals, w, lw, x, Ax, active, am, ae, cmax_at, lam,
                   st, best_a, cnt, U, eps, cap)
    x = x / U
    cost = float(w @ x)
    if np.isfinite(st[1]) and st[1] > -math.inf and np.any(best_a != 0):
        weights = np.exp2(best_a - best_a.max())
    else:
        weights = np.ones(m)
    # report the bound as the independent verifier computes it from the weights
    value = covering_lower_bound(inst, weights)
    counters = {name: int(cnt[k]) for k, name in enumerate(_COUNTER_NAMES)}
    diag = {"log2_lambda0": float(st[0])}
    if np.isfinite(st[2]):
        diag["min_potential_slack"] = float(st[2])
    status = Status.SOLVED if code == cm.SOLVED else Status.CAP_EXCEEDED
    return SolveReport(status, x, "covering", eps, U, cost=cost, lower_bound=value,
                       certificate=LowerBoundCertificate(weights, value), counters=counters, diagnostics=diag)
