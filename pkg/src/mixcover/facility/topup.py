"""Top-up: bring every star assignment up to the facility's opening level.

For each client the facilities are visited by ascending assignment cost and
``x_ij`` is raised toward ``y_j`` until it reaches ``y_j`` or the client's
weight has fallen to ``c_ij / lambda0`` (or the client reaches U). With
prefix sums of the gaps ``y_j - x_ij`` every client is settled in one pass,
independently of the others.

Postcondition: ``c_ij < lambda0 a_i(x)`` implies ``x_ij = y_j``. A boundary
raise is nudged until the membership test fails on the recomputed load, so
the postcondition holds on computed values and a second call changes nothing.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit, prange

from .stars import in_star

_NUDGES = 64


@njit(cache=True)
def client_load(lo, hi, x):
    s = 0.0
    for k in range(lo, hi):
        s += x[k]
    return s


@njit(cache=True)
def topup_client(lo, hi, facility, cost, x, y, log_lam0, lnc, U):
    """Top up one client's pairs ``[lo, hi)``; return its new load ``A_i x``."""
    base = client_load(lo, hi, x)
    d = 0.0
    edge = -1
    edge_at = 0.0
    for k in range(lo, hi):
        c = cost[k]
        yj = y[facility[k]]
        gap = yj - x[k]
        if gap < 0.0:
            gap = 0.0
        if in_star(c, log_lam0, base + d + gap, lnc, U):
            x[k] = max(x[k], yj)
            d += gap
            continue
        if gap > 0.0 and in_star(c, log_lam0, base + d, lnc, U):
            t = U if c == 0.0 else min(U, (math.log(c) - log_lam0) / lnc)
            delta = min(max(t - base - d, 0.0), gap)
            x[k] += delta
            edge = k
            edge_at = t
        break
    s = client_load(lo, hi, x)
    if edge >= 0:
        yj = y[facility[edge]]
        for _ in range(_NUDGES):
            if x[edge] >= yj or not in_star(cost[edge], log_lam0, s, lnc, U):
                break
            bump = max(edge_at - s, 4e-16 * max(1.0, abs(s)))
            x[edge] = min(yj, x[edge] + bump)
            s = client_load(lo, hi, x)
        if in_star(cost[edge], log_lam0, s, lnc, U):
            x[edge] = max(x[edge], yj)
            s = client_load(lo, hi, x)
    return s


@njit(cache=True)
def topup_range(lo, hi, client_ptr, facility, cost, x, y, Ax, log_lam0, lnc, U):
    for i in range(lo, hi):
        Ax[i] = topup_client(client_ptr[i], client_ptr[i + 1], facility, cost, x, y, log_lam0, lnc, U)


@njit(cache=True, parallel=True)
def topup_chunks(nc, m, client_ptr, facility, cost, x, y, Ax, log_lam0, lnc, U):
    """Clients split into ``nc`` fixed chunks; per-client work makes the result thread-independent."""
    if nc == 1:
        topup_range(0, m, client_ptr, facility, cost, x, y, Ax, log_lam0, lnc, U)
        return
    for t in prange(nc):
        topup_range(t * m // nc, (t + 1) * m // nc, client_ptr, facility, cost, x, y, Ax, log_lam0, lnc, U)


@njit(cache=True)
def postcondition_violations(client_ptr, facility, cost, x, y, log_lam0, lnc, U, tol):
    """Pairs inside the canonical star with ``x_ij`` short of ``y_j`` by more than ``tol``."""
    bad = 0
    for i in range(client_ptr.shape[0] - 1):
        lo, hi = client_ptr[i], client_ptr[i + 1]
        s = client_load(lo, hi, x)
        for k in range(lo, hi):
            yj = y[facility[k]]
            if in_star(cost[k], log_lam0, s, lnc, U) and abs(x[k] - yj) > tol * max(1.0, yj):
                bad += 1
    return bad


def top_up(inst, x: np.ndarray, y: np.ndarray, lam0: float, eps: float, U: float) -> np.ndarray:
    """Top up ``x`` in place at threshold ``lam0``; return the client loads ``A x``.

    ``x`` is indexed like ``inst``'s pairs and ``y`` by facility, both in the
    unscaled units where coverage U means covered.
    """
    if lam0 <= 0:
        raise ValueError("lam0 must be positive")
    Ax = np.empty(inst.m_clients)
    topup_chunks(1, inst.m_clients, inst.client_ptr, inst.facility, inst.cost, x, y, Ax,
                 math.log(lam0), math.log1p(-eps), float(U))
    return Ax


def check_top_up(inst, x, y, lam0: float, eps: float, U: float, tol: float = 1e-9) -> int:
    """Number of postcondition violations (0 when the top-up invariant holds)."""
    return int(postcondition_violations(inst.client_ptr, inst.facility, inst.cost, np.asarray(x, float),
                                        np.asarray(y, float), math.log(lam0), math.log1p(-eps), float(U), tol))
