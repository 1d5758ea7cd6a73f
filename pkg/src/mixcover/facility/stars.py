"""Stars (facility j with a client subset S) and the canonical star at a threshold.

A star costs ``f_j + sum_{i in S} c_ij`` and is priced by
``lambda(x, j, S) = cost / sum_{i in S} a_i`` with client weights
``a_i = (1-eps)**(A_i x)`` (0 once ``A_i x >= U``). Weights are handled as
natural logs ``la_i = A_i x * ln(1-eps)``.

For a threshold T the canonical star ``S_j(T) = {i : c_ij < T a_i}`` decides
whether any star of j is priced at most T: ``f_j + sum_S (c_ij - T a_i)`` is
minimized by taking exactly the clients with negative terms.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

NEG_INF = -math.inf


@njit(cache=True)
def in_star(c, log_t, ax, lnc, U):
    """``c < T (1-eps)**ax`` with ``ax < U``; the membership test used everywhere."""
    if ax >= U:
        return False
    if c == 0.0:
        return True
    return math.log(c) < log_t + ax * lnc


@njit(cache=True)
def log_star_price(f, idx, nidx, clients, costs, la):
    """``log lambda`` for the star over pair indices ``idx[:nidx]``; ``+inf`` when empty."""
    if nidx == 0:
        return math.inf
    top = NEG_INF
    num = f
    for t in range(nidx):
        k = idx[t]
        num += costs[k]
        v = la[clients[k]]
        if v > top:
            top = v
    if top == NEG_INF:
        return math.inf
    s = 0.0
    for t in range(nidx):
        s += math.exp(la[clients[idx[t]]] - top)
    if num == 0.0:
        return NEG_INF
    return math.log(num) - top - math.log(s)


@njit(cache=True)
def canonical_star(lo, hi, pairs, clients, costs, Ax, log_t, lnc, U, out):
    """Write the pair indices of ``S_j(T)`` (facility pairs ``pairs[lo:hi]``) into ``out``; return the count."""
    n = 0
    for t in range(lo, hi):
        k = pairs[t]
        if in_star(costs[k], log_t, Ax[clients[k]], lnc, U):
            out[n] = k
            n += 1
    return n


@njit(cache=True)
def min_star_price(f, lo, hi, pairs, clients, costs, Ax, la, lnc, U, scratch):
    """``log min_S lambda(x, j, S)`` over stars of one facility (``+inf`` if none).

    Dinkelbach iteration: price the canonical star at the current value and
    repeat while that strictly lowers it. Each step moves to a strictly
    cheaper prefix of the clients ordered by ``c / a``, so it terminates.
    """
    n = 0
    for t in range(lo, hi):
        k = pairs[t]
        if Ax[clients[k]] < U:
            scratch[n] = k
            n += 1
    cur = log_star_price(f, scratch, n, clients, costs, la)
    while cur > NEG_INF and cur < math.inf:
        n = canonical_star(lo, hi, pairs, clients, costs, Ax, cur, lnc, U, scratch)
        nxt = log_star_price(f, scratch, n, clients, costs, la)
        if not nxt < cur:
            break
        cur = nxt
    return cur


@njit(cache=True)
def all_min_star_prices(open_cost, fac_ptr, by_fac, clients, costs, Ax, la, lnc, U, out, scratch):
    best = math.inf
    for j in range(open_cost.shape[0]):
        out[j] = min_star_price(open_cost[j], fac_ptr[j], fac_ptr[j + 1], by_fac, clients, costs, Ax, la,
                                lnc, U, scratch)
        if out[j] < best:
            best = out[j]
    return best


def client_log_weights(Ax: np.ndarray, eps: float, U: float) -> np.ndarray:
    return np.where(Ax < U, Ax * math.log1p(-eps), -np.inf)


def best_star(inst, j: int, threshold: float, Ax, eps: float, U: float) -> tuple[np.ndarray, float]:
    """Canonical star of facility j at ``threshold`` and its price.

    Returns ``(clients in S_j, lambda(x, j, S_j))``; the price is ``inf`` for
    an empty star. ``lambda(x, j, S_j) <= threshold`` holds exactly when some
    star of j is priced at most ``threshold``.
    """
    Ax = np.asarray(Ax, dtype=np.float64)
    lo, hi = int(inst.fac_ptr[j]), int(inst.fac_ptr[j + 1])
    out = np.empty(hi - lo, dtype=np.int64)
    log_t = math.log(threshold) if threshold > 0 else -math.inf
    cnt = canonical_star(lo, hi, inst.by_facility, inst.client, inst.cost, Ax, log_t, math.log1p(-eps), U, out)
    la = client_log_weights(Ax, eps, U)
    price = log_star_price(float(inst.open_cost[j]), out, cnt, inst.client, inst.cost, la)
    return inst.client[out[:cnt]], math.exp(price)
