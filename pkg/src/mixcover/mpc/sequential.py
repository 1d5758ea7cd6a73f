"""Nearly-linear-time mixed packing/covering solver with periodic estimates.

Instead of exact row values the solver keeps estimates ``Ph <= P x`` and
``Ch <= C x`` that lag by less than 1. Within a column, entries are grouped by
their top (smallest power of two >= the coefficient). During a run of
increments to ``x_j`` a group with top ``2**t`` is refreshed once ``x_j`` has
grown by ``2**-(t+1)`` since its last refresh; the scan stops at the first
group that is not due. Every estimate of the column is made exact when the
run ends, so between runs all estimates are exact.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from ..checks import infeasibility_certificate
from ..extended import ext_add, ext_from_log2, ext_log2, ext_norm, ext_sub
from ..instances import MixedInstance
from ..report import SolveReport, Status
from . import _common as cm
from ._common import NEG_INF, column_ext_sum, column_log2_sum, vector_log2_sum
from .reference import _early_exit

(_SCALINGS, _INCREMENTS, _WORK, _SWEEPS, _RUNS, _UPDATES, _ACTIVE,
 _INV_VIOL, _EXACT_VIOL, _LAG_VIOL, _GAIN_VIOL, _REFRESH) = range(12)
_COUNTER_NAMES = ("scalings", "increments", "work", "sweeps", "runs", "estimate_updates")
# a cached covering sum that lost this many binary orders to subtraction is rebuilt
_DRIFT = 20


def top_exponents(vals: np.ndarray) -> np.ndarray:
    """Smallest t with ``vals <= 2**t`` for positive vals."""
    f, k = np.frexp(vals)
    return np.where(f == 0.5, k - 1, k).astype(np.int64)


def build_groups(ptr: np.ndarray, vals: np.ndarray):
    """Group each column's (descending) entries by top.

    Returns ``(col_groups, starts, tops)``: column j owns groups
    ``col_groups[j]:col_groups[j+1]``, group g spans CSC positions
    ``starts[g]:starts[g+1]`` and has top ``2**tops[g]``.
    """
    nnz = vals.shape[0]
    t = top_exponents(vals)
    new = np.zeros(nnz, dtype=bool)
    if nnz:
        new[0] = True
        new[1:] = t[1:] != t[:-1]
        heads = ptr[:-1][ptr[:-1] < ptr[1:]]
        new[heads] = True
    first = np.flatnonzero(new).astype(np.int64)
    starts = np.append(first, nnz).astype(np.int64)
    col_groups = np.searchsorted(first, ptr).astype(np.int64)
    return col_groups, starts, t[first] if nnz else np.zeros(0, dtype=np.int64)


@njit(cache=True)
def _remove_row(i, cr_ptr, c_wpos, c_gpos, cg_start, cg_cnt, cw_rows, cw_vals, cw_csr):
    """Drop row i from every covering group by swapping it past the live members."""
    for k in range(cr_ptr[i], cr_ptr[i + 1]):
        p = c_wpos[k]
        g = c_gpos[p]
        last = cg_start[g] + cg_cnt[g] - 1
        if p != last:
            kk = cw_csr[last]
            cw_rows[p], cw_rows[last] = cw_rows[last], cw_rows[p]
            cw_vals[p], cw_vals[last] = cw_vals[last], cw_vals[p]
            cw_csr[p] = kk
            cw_csr[last] = k
            c_wpos[kk] = p
            c_wpos[k] = last
        cg_cnt[g] -= 1


@njit(cache=True)
def step_size(p_colmax, c_colmax):
    """Increment making the largest row increase of the column exactly 1/2."""
    return 0.5 / max(p_colmax, c_colmax)


@njit(cache=True)
def group_due(lag, top):
    """A group with top ``2**top`` is refreshed once its lag reaches ``2**-(top+1)``."""
    return lag >= math.ldexp(1.0, -top - 1)


def scan_groups(tops, checkpoints, xj: float) -> int:
    """Refresh a column's groups (tops decreasing) after ``x_j`` moved to ``xj``.

    Groups are visited largest top first and the scan stops at the first one
    not due; refreshed groups get ``xj`` as their checkpoint. Returns how many
    were refreshed.
    """
    k = 0
    for t, c in zip(tops, checkpoints):
        if not group_due(xj - c, int(t)):
            break
        checkpoints[k] = xj
        k += 1
    return k


@njit(cache=True)
def _kernel(n, p_ptr, p_rows, p_vals, pg_col, pg_start, pg_top,
            c_ptr, c_rows, c_vals, cg_col, cg_start, cg_top, cg_cnt,
            cw_rows, cw_vals, cw_csr, c_wpos, c_gpos, cr_ptr,
            x, Ph, Ch, active, pm, pe, cmn, ce, cmax_at, lam, chk_p, chk_c, st, cnt,
            Px, Cx, upd_p, upd_c, runs_p, runs_c,
            U, eps, cap, debug, scale_first):
    L1 = math.log2(1.0 + eps)
    L2 = math.log2(1.0 - eps)
    lnp = math.log1p(eps)
    lnc = math.log1p(-eps)
    up1 = L1
    run_thr = math.log2((1.0 + eps) * (1.0 + eps) / (1.0 - eps))
    if scale_first:
        st[0] += up1
        cnt[_SCALINGS] += 1
        if cnt[_SCALINGS] > cap:
            return cm.CAP_EXCEEDED
    while True:
        for j in range(n):
            thr = st[0] + run_thr
            # lambda(x, j) never decreases, so a stale value above the
            # threshold proves the run would be empty.
            if lam[j] > thr:
                continue
            pl, ph = p_ptr[j], p_ptr[j + 1]
            cl, ch = c_ptr[j], c_ptr[j + 1]
            while cmax_at[j] < ch and not active[c_rows[cmax_at[j]]]:
                cmax_at[j] += 1
            if cmax_at[j] == ch:
                lam[j] = math.inf
                continue
            psm, pse = column_ext_sum(p_ptr, p_rows, p_vals, j, pm, pe)
            csm, cse = column_ext_sum(c_ptr, c_rows, c_vals, j, cmn, ce)
            cnt[_WORK] += (ph - pl) + (ch - cl)
            cref = cse
            lam_hat = ext_log2(psm, pse) - ext_log2(csm, cse)
            lam[j] = lam_hat
            if lam_hat > thr:
                continue
            cnt[_RUNS] += 1
            for g in range(pg_col[j], pg_col[j + 1]):
                chk_p[g] = x[j]
            for g in range(cg_col[j], cg_col[j + 1]):
                chk_c[g] = x[j]
            while lam_hat <= thr:
                while cmax_at[j] < ch and not active[c_rows[cmax_at[j]]]:
                    cmax_at[j] += 1
                if cmax_at[j] == ch:
                    break
                z = step_size(p_vals[pl] if ph > pl else 0.0, c_vals[cmax_at[j]])
                x[j] += z
                cnt[_INCREMENTS] += 1
                if debug:
                    for k in range(pl, ph):
                        Px[p_rows[k]] += p_vals[k] * z
                    for k in range(cl, ch):
                        Cx[c_rows[k]] += c_vals[k] * z
                # packing groups, largest top first
                for g in range(pg_col[j], pg_col[j + 1]):
                    d = x[j] - chk_p[g]
                    if not group_due(d, pg_top[g]):
                        break
                    chk_p[g] = x[j]
                    for k in range(pg_start[g], pg_start[g + 1]):
                        i = p_rows[k]
                        dv = p_vals[k] * d
                        om, oe = pm[i], pe[i]
                        Ph[i] += dv
                        pm[i], pe[i] = ext_from_log2(Ph[i] * L1)
                        gm, ge = ext_norm(p_vals[k] * om * math.expm1(dv * lnp), oe)
                        psm, pse = ext_add(psm, pse, gm, ge)
                        cnt[_UPDATES] += 1
                        cnt[_WORK] += 1
                        if debug:
                            upd_p[i] += 1
                            if dv <= 0.25:
                                cnt[_GAIN_VIOL] += 1
                # covering groups; members are scanned from the back so a
                # deactivated row can be swapped out in place
                for g in range(cg_col[j], cg_col[j + 1]):
                    d = x[j] - chk_c[g]
                    if not group_due(d, cg_top[g]):
                        break
                    chk_c[g] = x[j]
                    s = cg_start[g]
                    for idx in range(cg_cnt[g] - 1, -1, -1):
                        pos = s + idx
                        i = cw_rows[pos]
                        v = cw_vals[pos]
                        dv = v * d
                        om, oe = cmn[i], ce[i]
                        Ch[i] += dv
                        cnt[_UPDATES] += 1
                        cnt[_WORK] += 1
                        if debug:
                            upd_c[i] += 1
                            if dv <= 0.25:
                                cnt[_GAIN_VIOL] += 1
                        if Ch[i] >= U:
                            lm, le = ext_norm(v * om, oe)
                            csm, cse = ext_sub(csm, cse, lm, le)
                            active[i] = False
                            cmn[i] = 0.0
                            ce[i] = 0
                            cnt[_ACTIVE] -= 1
                            _remove_row(i, cr_ptr, c_wpos, c_gpos, cg_start, cg_cnt, cw_rows, cw_vals, cw_csr)
                            cnt[_WORK] += cr_ptr[i + 1] - cr_ptr[i]
                        else:
                            cmn[i], ce[i] = ext_from_log2(Ch[i] * L2)
                            lm, le = ext_norm(v * om * -math.expm1(dv * lnc), oe)
                            csm, cse = ext_sub(csm, cse, lm, le)
                if cnt[_ACTIVE] == 0:
                    return cm.SOLVED
                if csm == 0.0 or cse < cref - _DRIFT:
                    csm, cse = column_ext_sum(c_ptr, c_rows, c_vals, j, cmn, ce)
                    cnt[_WORK] += ch - cl
                    cnt[_REFRESH] += 1
                    cref = cse
                lam_hat = math.inf if csm == 0.0 else ext_log2(psm, pse) - ext_log2(csm, cse)
                if debug:
                    _check_lag(j, x, pg_col, pg_top, chk_p, cg_col, cg_top, chk_c, cnt)
                    _check_estimates(j, p_ptr, p_rows, c_ptr, c_rows, Ph, Ch, Px, Cx, active, cnt, False)
            # end of run: bring every estimate of column j up to date
            for g in range(pg_col[j], pg_col[j + 1]):
                d = x[j] - chk_p[g]
                if d > 0.0:
                    for k in range(pg_start[g], pg_start[g + 1]):
                        i = p_rows[k]
                        Ph[i] += p_vals[k] * d
                        pm[i], pe[i] = ext_from_log2(Ph[i] * L1)
                    cnt[_UPDATES] += pg_start[g + 1] - pg_start[g]
                    cnt[_WORK] += pg_start[g + 1] - pg_start[g]
            for g in range(cg_col[j], cg_col[j + 1]):
                d = x[j] - chk_c[g]
                if d > 0.0:
                    s = cg_start[g]
                    cnt[_UPDATES] += cg_cnt[g]
                    cnt[_WORK] += cg_cnt[g]
                    for idx in range(cg_cnt[g] - 1, -1, -1):
                        i = cw_rows[s + idx]
                        Ch[i] += cw_vals[s + idx] * d
                        if Ch[i] >= U:
                            active[i] = False
                            cmn[i] = 0.0
                            ce[i] = 0
                            cnt[_ACTIVE] -= 1
                            _remove_row(i, cr_ptr, c_wpos, c_gpos, cg_start, cg_cnt, cw_rows, cw_vals, cw_csr)
                            cnt[_WORK] += cr_ptr[i + 1] - cr_ptr[i]
                        else:
                            cmn[i], ce[i] = ext_from_log2(Ch[i] * L2)
            if debug:
                for k in range(pl, ph):
                    runs_p[p_rows[k]] += 1
                for k in range(cl, ch):
                    runs_c[c_rows[k]] += 1
                _check_estimates(j, p_ptr, p_rows, c_ptr, c_rows, Ph, Ch, Px, Cx, active, cnt, True)
            if cnt[_ACTIVE] == 0:
                return cm.SOLVED
        cnt[_SWEEPS] += 1
        # Estimates are exact between runs, so these totals are exact.
        lp_tot = vector_log2_sum(pm, pe)
        lc_tot = vector_log2_sum(cmn, ce)
        lam_star = math.inf
        for j in range(n):
            lc = column_log2_sum(c_ptr, c_rows, c_vals, j, cmn, ce)
            lp = column_log2_sum(p_ptr, p_rows, p_vals, j, pm, pe)
            lam[j] = math.inf if lc == NEG_INF else lp - lc
            if lam[j] < lam_star:
                lam_star = lam[j]
        cnt[_WORK] += p_rows.shape[0] + c_rows.shape[0] + pm.shape[0] + cmn.shape[0]
        if lam_star > lp_tot - lc_tot:
            return cm.SUSPECT_INFEASIBLE
        while True:
            st[0] += up1
            cnt[_SCALINGS] += 1
            if cnt[_SCALINGS] > cap:
                return cm.CAP_EXCEEDED
            if lam_star <= st[0] + run_thr:
                break


@njit(cache=True)
def _check_lag(j, x, pg_col, pg_top, chk_p, cg_col, cg_top, chk_c, cnt):
    for g in range(pg_col[j], pg_col[j + 1]):
        if x[j] - chk_p[g] > math.ldexp(1.0, -pg_top[g]) * (1.0 + 1e-12):
            cnt[_LAG_VIOL] += 1
    for g in range(cg_col[j], cg_col[j + 1]):
        if x[j] - chk_c[g] > math.ldexp(1.0, -cg_top[g]) * (1.0 + 1e-12):
            cnt[_LAG_VIOL] += 1


@njit(cache=True)
def _check_estimates(j, p_ptr, p_rows, c_ptr, c_rows, Ph, Ch, Px, Cx, active, cnt, exact):
    """Compare the estimates of column j's rows with shadow exact values.

    Inside a run the estimate must lie in ``(exact - 1, exact]``; at a run
    boundary it must equal the exact value. Both allow ``1e-9`` relative
    slack for rounding. Deactivated covering rows are exempt.
    """
    for k in range(p_ptr[j], p_ptr[j + 1]):
        i = p_rows[k]
        tol = 1e-9 * max(1.0, Px[i])
        if exact:
            if abs(Ph[i] - Px[i]) > tol:
                cnt[_EXACT_VIOL] += 1
        elif Ph[i] > Px[i] + tol or Px[i] - Ph[i] >= 1.0 + tol:
            cnt[_INV_VIOL] += 1
    for k in range(c_ptr[j], c_ptr[j + 1]):
        i = c_rows[k]
        if not active[i]:
            continue
        tol = 1e-9 * max(1.0, Cx[i])
        if exact:
            if abs(Ch[i] - Cx[i]) > tol:
                cnt[_EXACT_VIOL] += 1
        elif Ch[i] > Cx[i] + tol or Cx[i] - Ch[i] >= 1.0 + tol:
            cnt[_INV_VIOL] += 1


def solve_sequential(inst: MixedInstance, eps: float, debug: bool = False,
                     cap_factor: float = 10.0) -> SolveReport:
    """Solve a normalized mixed instance from ``x = 0`` using periodic estimates.

    ``debug=True`` shadows the exact row values and counts violations of the
    estimate bounds, the group lag bound and the per-update gain; meant for
    small instances since it costs a full column scan per increment.
    """
    eps = cm.check_eps(eps)
    arrs = cm.prepare(inst)
    n, m_p, m_c = arrs.n, arrs.m_p, arrs.m_c
    x = np.zeros(n)
    U = cm.target(0.0, inst.m, eps)
    early = _early_exit(inst, x, eps, U, "sequential")
    if early is not None:
        return early

    pg_col, pg_start, pg_top = build_groups(arrs.p_ptr, arrs.p_vals)
    cg_col, cg_start, cg_top = build_groups(arrs.c_ptr, arrs.c_vals)
    cg_cnt = np.diff(cg_start).astype(np.int64)
    c_gpos = np.repeat(np.arange(cg_top.shape[0], dtype=np.int64), cg_cnt)
    cw_rows = arrs.c_rows.copy()
    cw_vals = arrs.c_vals.copy()
    c_wpos = inst.covering.csr_to_csc.copy()
    cw_csr = np.empty_like(c_wpos)
    cw_csr[c_wpos] = np.arange(c_wpos.shape[0], dtype=np.int64)

    Ph, Ch = np.zeros(m_p), np.zeros(m_c)
    active = np.ones(m_c, dtype=np.bool_)
    pm, pe = np.ones(m_p), np.zeros(m_p, dtype=np.int64)
    cmn, ce = np.ones(m_c), np.zeros(m_c, dtype=np.int64)
    cmax_at = arrs.c_ptr[:-1].copy()
    lam = np.full(n, -math.inf)
    chk_p = np.zeros(pg_top.shape[0])
    chk_c = np.zeros(cg_top.shape[0])
    st = np.array([math.log2(m_p / m_c) if m_p else -math.inf])
    cnt = np.zeros(12, dtype=np.int64)
    cnt[_ACTIVE] = m_c
    shadow = (m_p, m_c) if debug else (0, 0)
    Px, Cx = np.zeros(shadow[0]), np.zeros(shadow[1])
    upd_p, upd_c = np.zeros(shadow[0], dtype=np.int64), np.zeros(shadow[1], dtype=np.int64)
    runs_p, runs_c = np.zeros(shadow[0], dtype=np.int64), np.zeros(shadow[1], dtype=np.int64)
    cap = int(math.ceil(cap_factor * U))
    scale_first = False
    while True:
        code = _kernel(n, arrs.p_ptr, arrs.p_rows, arrs.p_vals, pg_col, pg_start, pg_top,
                       arrs.c_ptr, arrs.c_rows, arrs.c_vals, cg_col, cg_start, cg_top, cg_cnt,
                       cw_rows, cw_vals, cw_csr, c_wpos, c_gpos, arrs.cr_ptr,
                       x, Ph, Ch, active, pm, pe, cmn, ce, cmax_at, lam, chk_p, chk_c, st, cnt,
                       Px, Cx, upd_p, upd_c, runs_p, runs_c,
                       U, eps, cap, debug, scale_first)
        if code != cm.SUSPECT_INFEASIBLE:
            break
        cert = infeasibility_certificate(inst, x, eps, U)
        if cert is not None:
            return _report(Status.INFEASIBLE, x / U, eps, U, cnt, st, cert)
        scale_first = True
    rep_status = Status.CAP_EXCEEDED if code == cm.CAP_EXCEEDED else Status.SOLVED
    cert = None
    if rep_status is Status.SOLVED:
        cert = infeasibility_certificate(inst, x, eps, U)
        if cert is not None:
            rep_status = Status.INFEASIBLE
    rep = _report(rep_status, x / U, eps, U, cnt, st, cert)
    if debug:
        rep.counters["invariant_violations"] = int(cnt[_INV_VIOL])
        rep.counters["run_boundary_violations"] = int(cnt[_EXACT_VIOL])
        rep.counters["group_lag_violations"] = int(cnt[_LAG_VIOL])
        rep.counters["update_gain_violations"] = int(cnt[_GAIN_VIOL])
        # each in-run update gains more than 1/4, so per-row update counts
        # stay below 4 (1 + O(eps)) U plus the runs that touched the row
        budget = 4.0 * (1.0 + 5.0 * eps) * U
        excess = np.concatenate([upd_p - runs_p, upd_c - runs_c]) - budget
        rep.diagnostics["row_update_excess"] = float(excess.max(initial=-budget))
        rep.diagnostics["max_row_updates"] = float(max(upd_p.max(initial=0), upd_c.max(initial=0)))
    return rep


def _report(status, x, eps, U, cnt, st, cert=None) -> SolveReport:
    counters = {name: int(cnt[k]) for k, name in enumerate(_COUNTER_NAMES)}
    counters["sum_refreshes"] = int(cnt[_REFRESH])
    diag = {"log2_lambda0": float(st[0])}
    return SolveReport(status, x, "sequential", eps, U, certificate=cert, counters=counters, diagnostics=diag)
