"""Phase-based parallel mixed packing/covering solver.

Each phase rebuilds every quantity from scratch, fixes the set J of columns
whose ratio is within ``(1+eps) lambda0`` and then repeatedly scales all of J
at once by ``1 + z``, with z chosen so the largest row increase is exactly 1.
Columns leave J the first time their ratio passes the threshold; the phase
ends (and lambda0 is scaled) when J is empty.

Work inside a phase only touches active edges: per-row lists hold the row's
columns that are still in J and per-column lists hold the column's active
covering rows; both are compacted in place as they go stale. Every sum is
taken by one thread in a fixed order and the only cross-thread reduction is a
maximum, so results are bitwise identical for any thread count.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit, prange

from ..checks import infeasibility_certificate
from ..extended import ext_from_log2
from ..instances import MixedInstance
from ..report import SolveReport, Status
from . import _common as cm
from ._common import GAP, IMIN, NEG_INF, POW2NEG, vector_log2_sum
from .reference import _early_exit

(_PHASES, _INCREMENTS, _WORK, _MAX_PHASE_INC, _Z_VIOL, _ACTIVE, _REBUILDS) = range(7)
_COUNTER_NAMES = ("phases", "increments", "work", "max_phase_increments", "z_violations")
# below this many items a loop runs on the calling thread
GRAIN = 2048


@njit(cache=True)
def _list_log2_sum(rows, vals, lo, hi, wm, we):
    top = IMIN
    for k in range(lo, hi):
        i = rows[k]
        if wm[i] != 0.0 and we[i] > top:
            top = we[i]
    if top == IMIN:
        return NEG_INF
    s = 0.0
    for k in range(lo, hi):
        i = rows[k]
        d = top - we[i]
        if wm[i] != 0.0 and d < GAP:
            s += vals[k] * wm[i] * POW2NEG[d]
    return top + math.log2(s)


@njit(cache=True)
def _column_lambda(j, p_ptr, p_rows, p_vals, cc_start, cc_cnt, cc_rows, cc_vals, active, pm, pe, cmn, ce):
    """``log2 lambda(x, j)`` after dropping deactivated rows from j's covering list."""
    s = cc_start[j]
    w = s
    for k in range(s, s + cc_cnt[j]):
        if active[cc_rows[k]]:
            cc_rows[w] = cc_rows[k]
            cc_vals[w] = cc_vals[k]
            w += 1
    cc_cnt[j] = w - s
    lc = _list_log2_sum(cc_rows, cc_vals, s, w, cmn, ce)
    if lc == NEG_INF:
        return math.inf
    return _list_log2_sum(p_rows, p_vals, p_ptr[j], p_ptr[j + 1], pm, pe) - lc


@njit(cache=True)
def _row_demand(i, start, cnt, cols, vals, x, inJ):
    """``sum_{j in J} v_ij x_j`` over row i's list, dropping columns that left J."""
    s = start[i]
    w = s
    d = 0.0
    for k in range(s, s + cnt[i]):
        j = cols[k]
        if inJ[j]:
            cols[w] = j
            vals[w] = vals[k]
            w += 1
            d += vals[k] * x[j]
    cnt[i] = w - s
    return d


@njit(cache=True)
def _rebuild_row(i, ptr, cols, vals, x):
    s = 0.0
    for k in range(ptr[i], ptr[i + 1]):
        s += vals[k] * x[cols[k]]
    return s


@njit(cache=True)
def _fill_row(i, ptr, cols, vals, inJ, start, cnt, wcols, wvals):
    w = start[i]
    for k in range(ptr[i], ptr[i + 1]):
        if inJ[cols[k]]:
            wcols[w] = cols[k]
            wvals[w] = vals[k]
            w += 1
    cnt[i] = w - start[i]


@njit(cache=True)
def _nchunks(count, grain):
    """Chunks for a loop over ``count`` items; depends on the grain only, never on threads."""
    return max(1, min(64, count // grain))


@njit(cache=True)
def _rebuild_rows(lo, hi, ptr, cols, vals, x, R, wm, we, L, active, U):
    for i in range(lo, hi):
        R[i] = _rebuild_row(i, ptr, cols, vals, x)
        if active[i] and R[i] < U:
            wm[i], we[i] = ext_from_log2(R[i] * L)
        else:
            active[i] = False
            wm[i] = 0.0
            we[i] = 0


@njit(cache=True)
def _lambdas(lo, hi, idx, lam, p_ptr, p_rows, p_vals, cc_start, cc_cnt, cc_rows, cc_vals, active, pm, pe, cmn, ce):
    for t in range(lo, hi):
        j = idx[t]
        lam[j] = _column_lambda(j, p_ptr, p_rows, p_vals, cc_start, cc_cnt, cc_rows, cc_vals, active, pm, pe, cmn, ce)


@njit(cache=True)
def _fill_rows(lo, hi, ptr, cols, vals, inJ, active, cnt, wcols, wvals):
    for i in range(lo, hi):
        if active[i]:
            _fill_row(i, ptr, cols, vals, inJ, ptr, cnt, wcols, wvals)
        else:
            cnt[i] = 0


@njit(cache=True)
def _demands(lo, hi, live, ptr, cnt, cols, vals, x, inJ, D):
    for t in range(lo, hi):
        i = live[t]
        D[i] = _row_demand(i, ptr, cnt, cols, vals, x, inJ)


@njit(cache=True)
def _apply(lo, hi, live, z, D, R, wm, we, L, active, U):
    for t in range(lo, hi):
        i = live[t]
        R[i] += z * D[i]
        if R[i] >= U:
            active[i] = False
            wm[i] = 0.0
            we[i] = 0
        else:
            wm[i], we[i] = ext_from_log2(R[i] * L)


@njit(parallel=True, cache=True)
def _kernel(n, p_ptr, p_rows, p_vals, pr_ptr, pr_cols, pr_vals, cr_ptr, cr_cols, cr_vals,
            cc_start, cc_cnt, cc_rows, cc_vals,
            prw_cols, prw_vals, prw_cnt, crw_cols, crw_vals, crw_cnt,
            x, Px, Cx, active, pm, pe, cmn, ce, lam, inJ, Jl, live_p, live_c, Dp, Dc,
            col_inc, st, cnt, U, eps, cap, grain, scale_first):
    m_p = Px.shape[0]
    m_c = Cx.shape[0]
    L1 = math.log2(1.0 + eps)
    L2 = math.log2(1.0 - eps)
    zmin = 1.0 / (4.0 * U)
    every_p = np.ones(m_p, dtype=np.bool_)
    all_j = np.arange(n)
    if scale_first:
        st[0] += L1
        cnt[_PHASES] += 1
        if cnt[_PHASES] > cap:
            return cm.CAP_EXCEEDED
    while True:
        # phase start: everything from scratch
        cnt[_REBUILDS] += 1
        nc = _nchunks(m_p, grain)
        if nc == 1:
            _rebuild_rows(0, m_p, pr_ptr, pr_cols, pr_vals, x, Px, pm, pe, L1, every_p, math.inf)
        else:
            for c in prange(nc):
                _rebuild_rows(c * m_p // nc, (c + 1) * m_p // nc, pr_ptr, pr_cols, pr_vals, x, Px, pm, pe, L1,
                              every_p, math.inf)
        nc = _nchunks(m_c, grain)
        if nc == 1:
            _rebuild_rows(0, m_c, cr_ptr, cr_cols, cr_vals, x, Cx, cmn, ce, L2, active, U)
        else:
            for c in prange(nc):
                _rebuild_rows(c * m_c // nc, (c + 1) * m_c // nc, cr_ptr, cr_cols, cr_vals, x, Cx, cmn, ce, L2,
                              active, U)
        nc = _nchunks(n, grain)
        if nc == 1:
            _lambdas(0, n, all_j, lam, p_ptr, p_rows, p_vals, cc_start, cc_cnt, cc_rows, cc_vals,
                     active, pm, pe, cmn, ce)
        else:
            for c in prange(nc):
                _lambdas(c * n // nc, (c + 1) * n // nc, all_j, lam, p_ptr, p_rows, p_vals,
                         cc_start, cc_cnt, cc_rows, cc_vals, active, pm, pe, cmn, ce)
        cnt[_WORK] += pr_cols.shape[0] + cr_cols.shape[0] + p_rows.shape[0] + cc_rows.shape[0]
        n_active = 0
        for i in range(m_c):
            if active[i]:
                n_active += 1
        if n_active == 0:
            return cm.SOLVED
        lam_star = math.inf
        for j in range(n):
            if lam[j] < lam_star:
                lam_star = lam[j]
        if lam_star > vector_log2_sum(pm, pe) - vector_log2_sum(cmn, ce):
            return cm.SUSPECT_INFEASIBLE
        # nothing moves while lambda* is above the threshold; apply those
        # scalings without rebuilding
        while lam_star > st[0] + L1:
            st[0] += L1
            cnt[_PHASES] += 1
            if cnt[_PHASES] > cap:
                return cm.CAP_EXCEEDED
        thr = st[0] + L1
        nJ = 0
        for j in range(n):
            inJ[j] = lam[j] <= thr
            if inJ[j]:
                Jl[nJ] = j
                nJ += 1
        nc = _nchunks(m_p, grain)
        if nc == 1:
            _fill_rows(0, m_p, pr_ptr, pr_cols, pr_vals, inJ, every_p, prw_cnt, prw_cols, prw_vals)
        else:
            for c in prange(nc):
                _fill_rows(c * m_p // nc, (c + 1) * m_p // nc, pr_ptr, pr_cols, pr_vals, inJ, every_p,
                           prw_cnt, prw_cols, prw_vals)
        nc = _nchunks(m_c, grain)
        if nc == 1:
            _fill_rows(0, m_c, cr_ptr, cr_cols, cr_vals, inJ, active, crw_cnt, crw_cols, crw_vals)
        else:
            for c in prange(nc):
                _fill_rows(c * m_c // nc, (c + 1) * m_c // nc, cr_ptr, cr_cols, cr_vals, inJ, active,
                           crw_cnt, crw_cols, crw_vals)
        n_lp = 0
        for i in range(m_p):
            if prw_cnt[i] > 0:
                live_p[n_lp] = i
                n_lp += 1
        n_lc = 0
        for i in range(m_c):
            if crw_cnt[i] > 0:
                live_c[n_lc] = i
                n_lc += 1
        phase_inc = 0
        while nJ > 0:
            # candidate increase of every row touched by J
            nc = _nchunks(n_lp, grain)
            if nc == 1:
                _demands(0, n_lp, live_p, pr_ptr, prw_cnt, prw_cols, prw_vals, x, inJ, Dp)
            else:
                for c in prange(nc):
                    _demands(c * n_lp // nc, (c + 1) * n_lp // nc, live_p, pr_ptr, prw_cnt, prw_cols, prw_vals,
                             x, inJ, Dp)
            nc = _nchunks(n_lc, grain)
            if nc == 1:
                _demands(0, n_lc, live_c, cr_ptr, crw_cnt, crw_cols, crw_vals, x, inJ, Dc)
            else:
                for c in prange(nc):
                    _demands(c * n_lc // nc, (c + 1) * n_lc // nc, live_c, cr_ptr, crw_cnt, crw_cols, crw_vals,
                             x, inJ, Dc)
            big = 0.0
            for t in range(n_lp):
                cnt[_WORK] += prw_cnt[live_p[t]]
                if Dp[live_p[t]] > big:
                    big = Dp[live_p[t]]
            for t in range(n_lc):
                cnt[_WORK] += crw_cnt[live_c[t]]
                if Dc[live_c[t]] > big:
                    big = Dc[live_c[t]]
            z = 1.0 / big
            if z < zmin:
                cnt[_Z_VIOL] += 1
            for t in range(nJ):
                j = Jl[t]
                x[j] *= 1.0 + z
                col_inc[j] += 1
            nc = _nchunks(n_lp, grain)
            if nc == 1:
                _apply(0, n_lp, live_p, z, Dp, Px, pm, pe, L1, every_p, math.inf)
            else:
                for c in prange(nc):
                    _apply(c * n_lp // nc, (c + 1) * n_lp // nc, live_p, z, Dp, Px, pm, pe, L1, every_p, math.inf)
            nc = _nchunks(n_lc, grain)
            if nc == 1:
                _apply(0, n_lc, live_c, z, Dc, Cx, cmn, ce, L2, active, U)
            else:
                for c in prange(nc):
                    _apply(c * n_lc // nc, (c + 1) * n_lc // nc, live_c, z, Dc, Cx, cmn, ce, L2, active, U)
            cnt[_INCREMENTS] += 1
            phase_inc += 1
            # a column leaves J the first time its ratio passes the threshold
            nc = _nchunks(nJ, grain)
            if nc == 1:
                _lambdas(0, nJ, Jl, lam, p_ptr, p_rows, p_vals, cc_start, cc_cnt, cc_rows, cc_vals,
                         active, pm, pe, cmn, ce)
            else:
                for c in prange(nc):
                    _lambdas(c * nJ // nc, (c + 1) * nJ // nc, Jl, lam, p_ptr, p_rows, p_vals,
                             cc_start, cc_cnt, cc_rows, cc_vals, active, pm, pe, cmn, ce)
            w = 0
            for t in range(nJ):
                j = Jl[t]
                cnt[_WORK] += (p_ptr[j + 1] - p_ptr[j]) + cc_cnt[j]
                if lam[j] <= thr:
                    Jl[w] = j
                    w += 1
                else:
                    inJ[j] = False
            nJ = w
            w = 0
            for t in range(n_lc):
                i = live_c[t]
                if active[i]:
                    live_c[w] = i
                    w += 1
                else:
                    crw_cnt[i] = 0
                    n_active -= 1
            n_lc = w
            if n_active == 0:
                return cm.SOLVED
            w = 0
            for t in range(n_lp):
                if prw_cnt[live_p[t]] > 0:
                    live_p[w] = live_p[t]
                    w += 1
            n_lp = w
            w = 0
            for t in range(n_lc):
                if crw_cnt[live_c[t]] > 0:
                    live_c[w] = live_c[t]
                    w += 1
            n_lc = w
        if phase_inc > cnt[_MAX_PHASE_INC]:
            cnt[_MAX_PHASE_INC] = phase_inc
        st[0] += L1
        cnt[_PHASES] += 1
        if cnt[_PHASES] > cap:
            return cm.CAP_EXCEEDED


def initial_point(inst: MixedInstance) -> np.ndarray:
    """``x_j = 1 / (n max_i P_ij)``; columns without packing entries use their covering maximum."""
    n = inst.n
    pmax = inst.packing.column_max()
    cmax = inst.covering.column_max()
    scale = np.where(pmax > 0, pmax, cmax)
    return 1.0 / (n * scale)


def solve_parallel(inst: MixedInstance, eps: float, threads: int | None = None,
                   cap_factor: float = 10.0, grain: int = GRAIN) -> SolveReport:
    """Solve a normalized mixed instance with whole-phase parallel increments.

    ``threads`` sets the numba worker count for the call (default: current
    setting); the result does not depend on it. Loops over fewer than
    ``2 * grain`` items run on the calling thread.
    """
    if grain < 1:
        raise ValueError("grain must be positive")
    eps = cm.check_eps(eps)
    arrs = cm.prepare(inst)
    n, m_p, m_c = arrs.n, arrs.m_p, arrs.m_c
    x = initial_point(inst)
    Px, Cx = cm.row_values(arrs, x)
    U = cm.target(float(Px.max()) if m_p else 0.0, inst.m, eps)
    early = _early_exit(inst, x, eps, U, "parallel")
    if early is not None:
        return early

    active = np.ones(m_c, dtype=np.bool_)
    pm, pe = np.empty(m_p), np.empty(m_p, dtype=np.int64)
    cmn, ce = np.empty(m_c), np.empty(m_c, dtype=np.int64)
    cm.set_weights(Px, math.log2(1 + eps), np.ones(m_p, dtype=np.bool_), pm, pe)
    cm.set_weights(Cx, math.log2(1 - eps), Cx < U, cmn, ce)
    # lambda0 = |p(x0)| / |c(x0)|, exact at the starting point
    st = np.array([vector_log2_sum(pm, pe) - vector_log2_sum(cmn, ce)])
    cc_start = arrs.c_ptr[:-1].copy()
    cc_cnt = np.diff(arrs.c_ptr).astype(np.int64)
    cc_rows, cc_vals = arrs.c_rows.copy(), arrs.c_vals.copy()
    work = dict(
        prw_cols=np.empty_like(arrs.pr_cols), prw_vals=np.empty_like(arrs.pr_vals), prw_cnt=np.zeros(m_p, dtype=np.int64),
        crw_cols=np.empty_like(arrs.cr_cols), crw_vals=np.empty_like(arrs.cr_vals), crw_cnt=np.zeros(m_c, dtype=np.int64),
    )
    lam = np.empty(n)
    inJ = np.zeros(n, dtype=np.bool_)
    Jl = np.empty(n, dtype=np.int64)
    live_p, live_c = np.empty(m_p, dtype=np.int64), np.empty(m_c, dtype=np.int64)
    Dp, Dc = np.zeros(m_p), np.zeros(m_c)
    col_inc = np.zeros(n, dtype=np.int64)
    cnt = np.zeros(7, dtype=np.int64)
    cap = int(math.ceil(cap_factor * U))
    scale_first = False
    with cm.thread_count(threads):
        while True:
            code = _kernel(n, arrs.p_ptr, arrs.p_rows, arrs.p_vals, arrs.pr_ptr, arrs.pr_cols, arrs.pr_vals,
                           arrs.cr_ptr, arrs.cr_cols, arrs.cr_vals, cc_start, cc_cnt, cc_rows, cc_vals,
                           work["prw_cols"], work["prw_vals"], work["prw_cnt"],
                           work["crw_cols"], work["crw_vals"], work["crw_cnt"],
                           x, Px, Cx, active, pm, pe, cmn, ce, lam, inJ, Jl, live_p, live_c, Dp, Dc,
                           col_inc, st, cnt, U, eps, cap, grain, scale_first)
            if code != cm.SUSPECT_INFEASIBLE:
                break
            cert = infeasibility_certificate(inst, x, eps, U)
            if cert is not None:
                return _report(Status.INFEASIBLE, x / U, eps, U, cnt, st, col_inc, cert)
            scale_first = True
    status = Status.CAP_EXCEEDED if code == cm.CAP_EXCEEDED else Status.SOLVED
    cert = None
    if status is Status.SOLVED:
        cert = infeasibility_certificate(inst, x, eps, U)
        if cert is not None:
            status = Status.INFEASIBLE
    return _report(status, x / U, eps, U, cnt, st, col_inc, cert)


def _report(status, x, eps, U, cnt, st, col_inc, cert=None) -> SolveReport:
    counters = {name: int(cnt[k]) for k, name in enumerate(_COUNTER_NAMES)}
    counters["scalings"] = counters["phases"]
    counters["max_column_increments"] = int(col_inc.max(initial=0))
    diag = {"log2_lambda0": float(st[0])}
    return SolveReport(status, x, "parallel", eps, U, certificate=cert, counters=counters, diagnostics=diag)
