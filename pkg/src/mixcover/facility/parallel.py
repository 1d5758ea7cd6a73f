"""Phase-based parallel facility location.

Each phase scales lambda0, tops up every client and then fixes, per
facility, the canonical star at lambda0 and the set J of facilities whose
star is priced within it. Every iteration scales ``y_j`` for all of J, and
``x_ij`` for the star clients, by ``1 + z`` where z makes the largest client
increase exactly 1. Stars and J only shrink inside a phase; the phase ends
when J is empty.

Clients and facilities are processed in fixed chunks, each item written by
one thread only, and the one cross-item reduction (the largest client
increase) is taken serially, so results do not depend on the thread count.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit, prange

from ..mpc import _common as cm
from ..report import Status
from . import _common as fc
from .sequential import _log_total
from .stars import all_min_star_prices, canonical_star, in_star, log_star_price
from .topup import postcondition_violations, topup_chunks

(_PHASES, _INCREMENTS, _WORK, _MAX_PHASE_INC, _Z_VIOL, _TOPUP_VIOL, _STRUCT_VIOL, _GROWTH_VIOL,
 _ACTIVE) = range(9)
_COUNTER_NAMES = ("phases", "increments", "work", "max_phase_increments", "z_violations",
                  "topup_violations", "phase_structure_violations", "star_growth_violations")
GRAIN = 2048


@njit(cache=True)
def _nchunks(count, grain):
    return max(1, min(64, count // grain))


@njit(cache=True)
def _facility_star(j, f, fac_ptr, by_fac, client, cost, Ax, la, log_t, lnc, U, sbuf, scnt, fresh):
    """Canonical star of j at ``log_t`` kept in j's segment of ``sbuf``; return its log price.

    ``fresh`` rebuilds the star from all of j's pairs, otherwise the current
    segment is compacted.
    """
    lo = fac_ptr[j]
    if fresh:
        n = canonical_star(lo, fac_ptr[j + 1], by_fac, client, cost, Ax, log_t, lnc, U, sbuf[lo:])
    else:
        n = 0
        for t in range(lo, lo + scnt[j]):
            k = sbuf[t]
            if in_star(cost[k], log_t, Ax[client[k]], lnc, U):
                sbuf[lo + n] = k
                n += 1
    scnt[j] = n
    return log_star_price(f[j], sbuf[lo:], n, client, cost, la)


@njit(cache=True)
def _stars_range(lo, hi, ids, f, fac_ptr, by_fac, client, cost, Ax, la, log_t, lnc, U, sbuf, scnt, price,
                 fresh, z, y):
    for t in range(lo, hi):
        j = ids[t]
        if z > 0.0:
            y[j] += z * y[j]
        price[j] = _facility_star(j, f, fac_ptr, by_fac, client, cost, Ax, la, log_t, lnc, U, sbuf, scnt, fresh)


@njit(cache=True, parallel=True)
def _stars(cntj, ids, f, fac_ptr, by_fac, client, cost, Ax, la, log_t, lnc, U, sbuf, scnt, price, fresh, z, y,
           grain):
    nc = _nchunks(cntj, grain)
    if nc == 1:
        _stars_range(0, cntj, ids, f, fac_ptr, by_fac, client, cost, Ax, la, log_t, lnc, U, sbuf, scnt, price,
                     fresh, z, y)
        return
    for t in prange(nc):
        _stars_range(t * cntj // nc, (t + 1) * cntj // nc, ids, f, fac_ptr, by_fac, client, cost, Ax, la,
                     log_t, lnc, U, sbuf, scnt, price, fresh, z, y)


@njit(cache=True)
def _demand_range(lo, hi, ids, client_ptr, facility, cost, Ax, y, inJ, log_t, lnc, U, cbuf, ccnt, D, fresh):
    """Per client: its pairs in a star of J (rebuilt or compacted) and ``D_i = sum y_j`` over them."""
    for t in range(lo, hi):
        i = ids[t]
        s = client_ptr[i]
        n = 0
        d = 0.0
        if fresh:
            for k in range(s, client_ptr[i + 1]):
                if inJ[facility[k]] and in_star(cost[k], log_t, Ax[i], lnc, U):
                    cbuf[s + n] = k
                    n += 1
                    d += y[facility[k]]
        else:
            for q in range(s, s + ccnt[i]):
                k = cbuf[q]
                if inJ[facility[k]] and in_star(cost[k], log_t, Ax[i], lnc, U):
                    cbuf[s + n] = k
                    n += 1
                    d += y[facility[k]]
        ccnt[i] = n
        D[i] = d


@njit(cache=True, parallel=True)
def _demands(cnti, ids, client_ptr, facility, cost, Ax, y, inJ, log_t, lnc, U, cbuf, ccnt, D, fresh, grain):
    nc = _nchunks(cnti, grain)
    if nc == 1:
        _demand_range(0, cnti, ids, client_ptr, facility, cost, Ax, y, inJ, log_t, lnc, U, cbuf, ccnt, D, fresh)
        return
    for t in prange(nc):
        _demand_range(t * cnti // nc, (t + 1) * cnti // nc, ids, client_ptr, facility, cost, Ax, y, inJ, log_t,
                      lnc, U, cbuf, ccnt, D, fresh)


@njit(cache=True)
def _assign_range(lo, hi, ids, client_ptr, facility, x, y, Ax, la, cbuf, ccnt, D, z, lnc, U):
    dead = 0
    for t in range(lo, hi):
        i = ids[t]
        s = client_ptr[i]
        for q in range(s, s + ccnt[i]):
            k = cbuf[q]
            x[k] += z * y[facility[k]]
        Ax[i] += z * D[i]
        if Ax[i] >= U:
            la[i] = -math.inf
            ccnt[i] = 0
            dead += 1
        else:
            la[i] = Ax[i] * lnc
    return dead


@njit(cache=True, parallel=True)
def _assign(cnti, ids, client_ptr, facility, x, y, Ax, la, cbuf, ccnt, D, z, lnc, U, grain):
    nc = _nchunks(cnti, grain)
    if nc == 1:
        return _assign_range(0, cnti, ids, client_ptr, facility, x, y, Ax, la, cbuf, ccnt, D, z, lnc, U)
    dead = np.zeros(nc, dtype=np.int64)
    for t in prange(nc):
        dead[t] = _assign_range(t * cnti // nc, (t + 1) * cnti // nc, ids, client_ptr, facility, x, y, Ax, la,
                                cbuf, ccnt, D, z, lnc, U)
    return dead.sum()


@njit(cache=True)
def _structure_check(client_ptr, facility, cost, x, y, Ax, log_t, lnc, U, member, inJ0, price, f, fac_ptr,
                     by_fac, client, la, scratch):
    """Star clients sit at ``x_ij = y_j``; no pair joins a star and no facility joins J mid-phase."""
    bad_struct = 0
    bad_growth = 0
    for i in range(client_ptr.shape[0] - 1):
        for k in range(client_ptr[i], client_ptr[i + 1]):
            if in_star(cost[k], log_t, Ax[i], lnc, U):
                yj = y[facility[k]]
                if abs(x[k] - yj) > 1e-9 * max(1.0, yj):
                    bad_struct += 1
                if not member[k]:
                    bad_growth += 1
    for j in range(f.shape[0]):
        if not inJ0[j]:
            n = canonical_star(fac_ptr[j], fac_ptr[j + 1], by_fac, client, cost, Ax, log_t, lnc, U, scratch)
            if log_star_price(f[j], scratch, n, client, cost, la) <= log_t:
                bad_growth += 1
    return bad_struct, bad_growth


@njit(cache=True)
def _kernel(f, client_ptr, facility, cost, fac_ptr, by_fac, client, x, y, Ax, la, st, best_la, cnt, U, eps, cap,
            grain, debug):
    """Run to completion; ``st`` holds [log lambda0, log best bound]."""
    lnc = math.log1p(-eps)
    up = math.log1p(eps)
    n = f.shape[0]
    m = client_ptr.shape[0] - 1
    nnz = cost.shape[0]
    sbuf = np.empty(nnz, dtype=np.int64)
    scnt = np.zeros(n, dtype=np.int64)
    cbuf = np.empty(nnz, dtype=np.int64)
    ccnt = np.zeros(m, dtype=np.int64)
    price = np.empty(n)
    D = np.zeros(m)
    inJ = np.zeros(n, dtype=np.bool_)
    jids = np.empty(n, dtype=np.int64)
    all_f = np.arange(n)
    cids = np.empty(m, dtype=np.int64)
    minp = np.empty(n)
    scratch = np.empty(nnz, dtype=np.int64)
    member = np.zeros(nnz if debug else 0, dtype=np.bool_)
    inJ0 = np.zeros(n, dtype=np.bool_)
    nct = _nchunks(m, grain)
    while True:
        st[0] += up
        cnt[_PHASES] += 1
        if cnt[_PHASES] > cap:
            return cm.CAP_EXCEEDED
        log_t = st[0]
        topup_chunks(nct, m, client_ptr, facility, cost, x, y, Ax, log_t, lnc, U)
        cnt[_TOPUP_VIOL] += postcondition_violations(client_ptr, facility, cost, x, y, log_t, lnc, U, 1e-9)
        cnt[_WORK] += 2 * nnz
        active = 0
        for i in range(m):
            if Ax[i] >= U:
                la[i] = -math.inf
            else:
                la[i] = Ax[i] * lnc
                active += 1
        if active == 0:
            return cm.SOLVED
        _stars(n, all_f, f, fac_ptr, by_fac, client, cost, Ax, la, log_t, lnc, U, sbuf, scnt, price, True, 0.0, y,
               grain)
        nJ = 0
        for j in range(n):
            inJ[j] = price[j] <= log_t
            if inJ[j]:
                jids[nJ] = j
                nJ += 1
        nC = 0
        for i in range(m):
            if Ax[i] < U:
                cids[nC] = i
                nC += 1
        _demands(nC, cids, client_ptr, facility, cost, Ax, y, inJ, log_t, lnc, U, cbuf, ccnt, D, True, grain)
        cnt[_WORK] += nnz
        if debug:
            for k in range(nnz):
                member[k] = in_star(cost[k], log_t, Ax[client[k]], lnc, U)
            for j in range(n):
                inJ0[j] = inJ[j]
        phase_inc = 0
        while nJ > 0:
            if phase_inc > 0:
                _demands(nC, cids, client_ptr, facility, cost, Ax, y, inJ, log_t, lnc, U, cbuf, ccnt, D, False,
                         grain)
            w = 0
            dmax = 0.0
            for t in range(nC):
                i = cids[t]
                if ccnt[i] > 0:
                    cids[w] = i
                    w += 1
                    cnt[_WORK] += ccnt[i]
                    if D[i] > dmax:
                        dmax = D[i]
            nC = w
            if dmax <= 0.0:
                break
            z = 1.0 / dmax
            if z * U < 1.0 - 1e-9:
                cnt[_Z_VIOL] += 1
            active -= _assign(nC, cids, client_ptr, facility, x, y, Ax, la, cbuf, ccnt, D, z, lnc, U, grain)
            _stars(nJ, jids, f, fac_ptr, by_fac, client, cost, Ax, la, log_t, lnc, U, sbuf, scnt, price, False, z,
                   y, grain)
            w = 0
            for t in range(nJ):
                j = jids[t]
                cnt[_WORK] += scnt[j]
                if price[j] <= log_t:
                    jids[w] = j
                    w += 1
                else:
                    inJ[j] = False
            nJ = w
            cnt[_INCREMENTS] += 1
            phase_inc += 1
            if debug:
                a, b = _structure_check(client_ptr, facility, cost, x, y, Ax, log_t, lnc, U, member, inJ0, price,
                                        f, fac_ptr, by_fac, client, la, scratch)
                cnt[_STRUCT_VIOL] += a
                cnt[_GROWTH_VIOL] += b
            if active == 0:
                return cm.SOLVED
        if phase_inc > cnt[_MAX_PHASE_INC]:
            cnt[_MAX_PHASE_INC] = phase_inc
        best = all_min_star_prices(f, fac_ptr, by_fac, client, cost, Ax, la, lnc, U, minp, scratch)
        cnt[_WORK] += nnz
        tot = _log_total(la)
        if best < math.inf and tot + best > st[1]:
            st[1] = tot + best
            for i in range(m):
                best_la[i] = la[i] - tot


def initial_point(inst, l0: float, eps: float) -> tuple[np.ndarray, np.ndarray]:
    """``x_ij = eps l / ((f_j + c_ij) |F| |C|)`` and ``y_j = sum_i x_ij``."""
    x = eps * l0 / ((inst.open_cost[inst.facility] + inst.cost) * inst.n_facilities * inst.m_clients)
    y = np.zeros(inst.n_facilities)
    for j in range(inst.n_facilities):
        y[j] = math.fsum(x[inst.by_facility[inst.fac_ptr[j]:inst.fac_ptr[j + 1]]])
    return x, y


def solve_fl_parallel(inst, eps: float, threads: int | None = None, cap_factor: float = 10.0,
                      grain: int = GRAIN, debug: bool = False):
    """Parallel (1+O(eps))-approximate fractional facility location.

    Output is bitwise identical for every ``threads`` value. ``debug`` checks
    the phase structure after every iteration (quadratic; small instances).
    """
    eps = cm.check_eps(eps)
    fc.check_instance(inst)
    red = fc.reduce_free(inst)
    sub = red.inst
    if sub.m_clients == 0:
        return fc.trivial(inst, red, "fl-parallel", eps)
    m = sub.m_clients
    U = fc.target(m, eps)
    l0, i0 = fc.ell(sub)
    x, y = initial_point(sub, l0, eps)
    Ax = np.array([math.fsum(x[sub.client_ptr[i]:sub.client_ptr[i + 1]]) for i in range(m)])
    la = np.where(Ax < U, Ax * math.log1p(-eps), -math.inf)
    st = np.array([math.log(l0) - float(_log_total(la)), math.log(l0)])
    best_la = np.full(m, -math.inf)
    best_la[i0] = 0.0
    cnt = np.zeros(9, dtype=np.int64)
    cap = int(math.ceil(cap_factor * U))
    with cm.thread_count(threads):
        code = _kernel(sub.open_cost, sub.client_ptr, sub.facility, sub.cost, sub.fac_ptr, sub.by_facility,
                       sub.client, x, y, Ax, la, st, best_la, cnt, U, eps, cap, int(grain), bool(debug))
    status = Status.SOLVED if code == cm.SOLVED else Status.CAP_EXCEEDED
    names = _COUNTER_NAMES if debug else _COUNTER_NAMES[:6]
    counters = {name: int(cnt[k]) for k, name in enumerate(_COUNTER_NAMES) if name in names}
    return fc.finish(inst, red, x, y, U, fc.best_weights(best_la), status, "fl-parallel", eps, counters,
                     {"log_lambda0": float(st[0])})
