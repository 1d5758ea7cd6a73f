"""Sequential facility location: covering emulated on the implicit star LP.

Facilities are swept round-robin. A run of facility j recomputes its
canonical star at ``(1+eps) lambda0`` and, while the star is priced within
that threshold, opens one more unit of j and assigns one more unit of every
star client; clients that leave the star are dropped from the run's list.
Each sweep ends with exact minimum star prices, giving the lower bound
``|a| min_j lambda(x, j, S)`` and letting empty sweeps be skipped.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from ..mpc import _common as cm
from ..report import Status
from . import _common as fc
from .stars import all_min_star_prices, canonical_star, in_star, log_star_price

_SCALINGS, _INCREMENTS, _WORK, _SWEEPS, _RUNS, _ACTIVE = range(6)
_COUNTER_NAMES = ("scalings", "increments", "work", "sweeps", "runs")


@njit(cache=True)
def _log_total(la):
    top = -math.inf
    for v in la:
        if v > top:
            top = v
    if top == -math.inf:
        return top
    s = 0.0
    for v in la:
        s += math.exp(v - top)
    return top + math.log(s)


@njit(cache=True)
def _kernel(f, fac_ptr, by_fac, client, cost, x, y, Ax, la, minp, st, best_la, cnt, U, eps, cap):
    """Run to completion; ``st`` holds [log lambda0, log best bound]."""
    lnc = math.log1p(-eps)
    up = math.log1p(eps)
    n = f.shape[0]
    buf = np.empty(by_fac.shape[0], dtype=np.int64)
    scratch = np.empty(by_fac.shape[0], dtype=np.int64)
    while True:
        thr = st[0] + up
        for j in range(n):
            if minp[j] > thr:
                continue
            lo, hi = fac_ptr[j], fac_ptr[j + 1]
            ns = canonical_star(lo, hi, by_fac, client, cost, Ax, thr, lnc, U, buf)
            cnt[_RUNS] += 1
            cnt[_WORK] += hi - lo
            price = log_star_price(f[j], buf, ns, client, cost, la)
            while price <= thr:
                y[j] += 1.0
                for t in range(ns):
                    k = buf[t]
                    i = client[k]
                    x[k] += 1.0
                    Ax[i] += 1.0
                    if Ax[i] >= U:
                        la[i] = -math.inf
                        cnt[_ACTIVE] -= 1
                    else:
                        la[i] = Ax[i] * lnc
                cnt[_INCREMENTS] += 1
                cnt[_WORK] += ns
                if cnt[_ACTIVE] == 0:
                    return cm.SOLVED
                keep = 0
                for t in range(ns):
                    k = buf[t]
                    if in_star(cost[k], thr, Ax[client[k]], lnc, U):
                        buf[keep] = k
                        keep += 1
                ns = keep
                price = log_star_price(f[j], buf, ns, client, cost, la)
            minp[j] = price
        cnt[_SWEEPS] += 1
        best = all_min_star_prices(f, fac_ptr, by_fac, client, cost, Ax, la, lnc, U, minp, scratch)
        cnt[_WORK] += by_fac.shape[0]
        tot = _log_total(la)
        if best < math.inf and tot + best > st[1]:
            st[1] = tot + best
            for i in range(la.shape[0]):
                best_la[i] = la[i] - tot
        while True:
            st[0] += up
            cnt[_SCALINGS] += 1
            if cnt[_SCALINGS] > cap:
                return cm.CAP_EXCEEDED
            if best <= st[0] + up + 1e-12:
                break


def solve_fl_sequential(inst, eps: float, cap_factor: float = 10.0):
    """(1+O(eps))-approximate fractional facility location, with a star lower bound.

    Returns a :class:`SolveReport` with ``x`` per pair and ``y`` per facility
    (coverage at least 1, ``x_ij <= y_j``), the cost and a verified lower bound.
    """
    eps = cm.check_eps(eps)
    fc.check_instance(inst)
    red = fc.reduce_free(inst)
    sub = red.inst
    if sub.m_clients == 0:
        return fc.trivial(inst, red, "fl-sequential", eps)
    m = sub.m_clients
    U = fc.target(m, eps)
    x = np.zeros(sub.nnz)
    y = np.zeros(sub.n_facilities)
    Ax = np.zeros(m)
    la = np.zeros(m)
    minp = np.full(sub.n_facilities, -math.inf)
    l0, i0 = fc.ell(sub)
    st = np.array([math.log(l0 / m), math.log(l0)])
    best_la = np.full(m, -math.inf)
    best_la[i0] = 0.0
    cnt = np.zeros(6, dtype=np.int64)
    cnt[_ACTIVE] = m
    cap = int(math.ceil(cap_factor * U))
    code = _kernel(sub.open_cost, sub.fac_ptr, sub.by_facility, sub.client, sub.cost, x, y, Ax, la, minp,
                   st, best_la, cnt, U, eps, cap)
    status = Status.SOLVED if code == cm.SOLVED else Status.CAP_EXCEEDED
    counters = {name: int(cnt[k]) for k, name in enumerate(_COUNTER_NAMES)}
    return fc.finish(inst, red, x, y, U, fc.best_weights(best_la), status, "fl-sequential", eps, counters,
                     {"log_lambda0": float(st[0])})
