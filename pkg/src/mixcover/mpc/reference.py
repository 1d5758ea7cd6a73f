"""Exact-bookkeeping mixed packing/covering solver.

Every decision is made from exactly maintained row values ``P x`` and ``C x``;
``lambda(x, j)`` is recomputed from scratch whenever it is consulted. This is
slow (each increment costs a full column scan) but simple enough to serve as
the oracle the faster solvers are compared against.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from ..checks import infeasibility_certificate
from ..instances import MixedInstance
from ..report import SolveReport, Status
from . import _common as cm
from ..extended import ext_from_log2
from ._common import NEG_INF, column_log2_sum, potential_gap, vector_log2_sum

# counter slots
_SCALINGS, _INCREMENTS, _WORK, _SWEEPS, _ACTIVE, _LAM0_VIOL, _STEP_VIOL, _PRECOND_VIOL = range(8)
_COUNTER_NAMES = ("scalings", "increments", "work", "sweeps")


@njit(cache=True)
def _kernel(n, p_ptr, p_rows, p_vals, c_ptr, c_rows, c_vals,
            x, Px, Cx, active, pm, pe, cmn, ce, lam, st, cnt, U, eps, cap, max_px0, m, debug, scale_first):
    L1 = math.log2(1.0 + eps)
    L2 = math.log2(1.0 - eps)
    up4 = math.log2(1.0 + 4.0 * eps)
    up1 = math.log2(1.0 + eps)
    if scale_first:
        st[0] += up1
        cnt[_SCALINGS] += 1
        if cnt[_SCALINGS] > cap:
            return cm.CAP_EXCEEDED
    while True:
        for j in range(n):
            # lambda(x, j) never decreases, so a stale value above the
            # threshold proves the run would be empty.
            if lam[j] > st[0] + up4:
                continue
            pl, ph = p_ptr[j], p_ptr[j + 1]
            cl, ch = c_ptr[j], c_ptr[j + 1]
            while True:
                lc = column_log2_sum(c_ptr, c_rows, c_vals, j, cmn, ce)
                lp = column_log2_sum(p_ptr, p_rows, p_vals, j, pm, pe)
                cnt[_WORK] += (ch - cl) + (ph - pl)
                lam[j] = math.inf if lc == NEG_INF else lp - lc
                if lam[j] > st[0] + up4:
                    break
                big = p_vals[pl] if ph > pl else 0.0
                for k in range(cl, ch):
                    if active[c_rows[k]]:
                        if c_vals[k] > big:
                            big = c_vals[k]
                        break
                z = 0.5 / big
                x[j] += z
                rise = 0.0
                for k in range(pl, ph):
                    i = p_rows[k]
                    d = p_vals[k] * z
                    Px[i] += d
                    pm[i], pe[i] = ext_from_log2(Px[i] * L1)
                    if d > rise:
                        rise = d
                for k in range(cl, ch):
                    i = c_rows[k]
                    if not active[i]:
                        continue
                    d = c_vals[k] * z
                    Cx[i] += d
                    if d > rise:
                        rise = d
                    if Cx[i] >= U:
                        active[i] = False
                        cmn[i] = 0.0
                        ce[i] = 0
                        cnt[_ACTIVE] -= 1
                    else:
                        cmn[i], ce[i] = ext_from_log2(Cx[i] * L2)
                cnt[_INCREMENTS] += 1
                cnt[_WORK] += (ph - pl) + (ch - cl)
                if debug and (rise < 0.5 * (1 - 1e-12) or rise > 1.0 + 1e-12):
                    cnt[_STEP_VIOL] += 1
                if cnt[_ACTIVE] == 0:
                    return cm.SOLVED
        cnt[_SWEEPS] += 1
        # exact end-of-sweep quantities: infeasibility test and potential monitor
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
        gap = potential_gap(pm, pe, cmn, ce, max_px0, eps, m)
        if gap < st[1]:
            st[1] = gap
        if lam_star > lp_tot - lc_tot:
            return cm.SUSPECT_INFEASIBLE
        if debug and lam_star < st[0] + up1 - 1e-9:
            cnt[_PRECOND_VIOL] += 1
        # A sweep changes nothing while lambda* exceeds the increment threshold,
        # so such sweeps are skipped and only their scalings are applied.
        while True:
            st[0] += up1
            cnt[_SCALINGS] += 1
            if debug and st[0] > lp_tot - lc_tot + 1e-9:
                cnt[_LAM0_VIOL] += 1
            if cnt[_SCALINGS] > cap:
                return cm.CAP_EXCEEDED
            if lam_star <= st[0] + up4:
                break


def solve_reference(inst: MixedInstance, eps: float, x0=None, debug: bool = False,
                    cap_factor: float = 10.0) -> SolveReport:
    """Solve a normalized mixed instance with exact bookkeeping.

    Returns x with ``C x >= 1`` and ``P x <= 1 + O(eps)``, or an infeasibility
    certificate, or ``CAP_EXCEEDED`` after ``cap_factor * U`` scalings.
    """
    eps = cm.check_eps(eps)
    arrs = cm.prepare(inst)
    x = np.zeros(arrs.n) if x0 is None else np.array(x0, dtype=np.float64)
    if x.shape != (arrs.n,) or np.any(x < 0) or not np.all(np.isfinite(x)):
        raise ValueError("x0 must be a finite nonnegative vector of length n")
    Px, Cx = cm.row_values(arrs, x)
    max_px0 = float(Px.max()) if arrs.m_p else 0.0
    U = cm.target(max_px0, inst.m, eps)
    early = _early_exit(inst, x, eps, U, "reference")
    if early is not None:
        return early

    active = Cx < U
    if not active.any():
        return SolveReport(Status.SOLVED, x / U, "reference", eps, U)
    pm, pe = np.empty(arrs.m_p), np.empty(arrs.m_p, dtype=np.int64)
    cmn, ce = np.empty(arrs.m_c), np.empty(arrs.m_c, dtype=np.int64)
    cm.set_weights(Px, math.log2(1 + eps), np.ones(arrs.m_p, dtype=np.bool_), pm, pe)
    cm.set_weights(Cx, math.log2(1 - eps), active, cmn, ce)
    lam = np.full(arrs.n, -math.inf)
    st = np.array([vector_log2_sum(pm, pe) - vector_log2_sum(cmn, ce), math.inf])
    cnt = np.zeros(8, dtype=np.int64)
    cnt[_ACTIVE] = int(active.sum())
    cap = int(math.ceil(cap_factor * U))
    scale_first = False
    while True:
        code = _kernel(arrs.n, arrs.p_ptr, arrs.p_rows, arrs.p_vals, arrs.c_ptr, arrs.c_rows, arrs.c_vals,
                       x, Px, Cx, active, pm, pe, cmn, ce, lam, st, cnt, U, eps, cap, max_px0, inst.m, debug, scale_first)
        if code == cm.SUSPECT_INFEASIBLE:
            cert = infeasibility_certificate(inst, x, eps, U)
            if cert is not None:
                return _report(Status.INFEASIBLE, x / U, eps, U, cnt, st, debug, cert)
            scale_first = True
            continue
        break
    if code == cm.CAP_EXCEEDED:
        return _report(Status.CAP_EXCEEDED, x / U, eps, U, cnt, st, debug)
    cert = infeasibility_certificate(inst, x, eps, U)
    if cert is not None:
        return _report(Status.INFEASIBLE, x / U, eps, U, cnt, st, debug, cert)
    return _report(Status.SOLVED, x / U, eps, U, cnt, st, debug)


def _early_exit(inst: MixedInstance, x: np.ndarray, eps: float, U: float, algo: str) -> SolveReport | None:
    """Reports for instances decided before any kernel runs."""
    empty = cm.empty_covering_rows(inst)
    if empty.size:
        from ..report import InfeasibilityCertificate

        r = np.zeros(inst.m_c)
        r[empty[0]] = 1.0
        cert = InfeasibilityCertificate(np.zeros(inst.m_p), r, np.zeros(inst.n), None)
        return SolveReport(Status.INFEASIBLE, x / U, algo, eps, U, certificate=cert)
    if inst.m_c == 0:
        return SolveReport(Status.SOLVED, x / U, algo, eps, U)
    return None


def _report(status, x, eps, U, cnt, st, debug, cert=None) -> SolveReport:
    counters = {name: int(cnt[k]) for k, name in enumerate(_COUNTER_NAMES)}
    diag = {"log2_lambda0": float(st[0])}
    if np.isfinite(st[1]):
        diag["min_potential_gap"] = float(st[1])
    if debug:
        counters["lambda0_invariant_violations"] = int(cnt[_LAM0_VIOL])
        counters["step_violations"] = int(cnt[_STEP_VIOL])
        counters["scaling_precondition_violations"] = int(cnt[_PRECOND_VIOL])
    return SolveReport(status, x, "reference", eps, U, certificate=cert, counters=counters, diagnostics=diag)
