"""Shared pieces of the facility-location solvers."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..checks import facility_lower_bound
from ..instances import FacilityInstance, InstanceError
from ..mpc import _common as cm
from ..report import LowerBoundCertificate, SolveReport, Status


@dataclass
class Reduced:
    """Instance without the clients that have a free pair (``f_j + c_ij = 0``).

    ``pair_map`` sends reduced pair indices to original ones, ``client_map``
    reduced clients to original ones; ``free_pairs`` are the original pairs
    that serve the removed clients at no cost.
    """

    inst: FacilityInstance
    pair_map: np.ndarray
    client_map: np.ndarray
    free_pairs: np.ndarray


def check_instance(inst) -> None:
    if not isinstance(inst, FacilityInstance):
        raise TypeError("expected a FacilityInstance")
    if inst.m_clients == 0:
        raise InstanceError("instance has no clients")


def reduce_free(inst: FacilityInstance) -> Reduced:
    free = (inst.open_cost[inst.facility] + inst.cost) == 0.0
    if not free.any():
        return Reduced(inst, np.arange(inst.nnz), np.arange(inst.m_clients), np.zeros(0, dtype=np.int64))
    has_free = np.zeros(inst.m_clients, dtype=bool)
    has_free[inst.client[free]] = True
    # one free pair per removed client: its first (pairs are cost sorted, ties by facility)
    first_free = np.flatnonzero(free)
    _, pick = np.unique(inst.client[first_free], return_index=True)
    free_pairs = first_free[pick]
    keep_pair = ~has_free[inst.client]
    client_map = np.flatnonzero(~has_free)
    renum = np.full(inst.m_clients, -1, dtype=np.int64)
    renum[client_map] = np.arange(client_map.size)
    pair_map = np.flatnonzero(keep_pair)
    sub = FacilityInstance.from_pairs(
        inst.open_cost, int(client_map.size),
        np.column_stack([renum[inst.client[pair_map]], inst.facility[pair_map], inst.cost[pair_map]]))
    # from_pairs keeps the (client, cost, facility) order, so the kept pairs stay aligned
    return Reduced(sub, pair_map, client_map, free_pairs)


def ell(inst: FacilityInstance) -> tuple[float, int]:
    """``max_i min_j f_j + c_ij`` and the client attaining it."""
    near = inst.nearest_cost()
    i = int(np.argmax(near))
    return float(near[i]), i


def finish(inst: FacilityInstance, red: Reduced, x_sub, y_sub, U: float, weights_sub, status: Status,
           algorithm: str, eps: float, counters: dict, diagnostics: dict) -> SolveReport:
    """Scale by 1/U, add the free assignments and attach the verified lower bound."""
    x = np.zeros(inst.nnz)
    y = np.zeros(inst.n_facilities)
    if red.inst.m_clients:
        x[red.pair_map] = x_sub / U
        y[:] = y_sub / U
    x[red.free_pairs] = 1.0
    np.maximum.at(y, inst.facility[red.free_pairs], 1.0)
    weights = np.zeros(inst.m_clients)
    if red.inst.m_clients:
        weights[red.client_map] = weights_sub
    value = facility_lower_bound(inst, weights) if weights.any() else 0.0
    return SolveReport(status, x, algorithm, eps, U, y=y, cost=inst.cost_of(x, y), lower_bound=value,
                       certificate=LowerBoundCertificate(weights, value), counters=counters,
                       diagnostics=diagnostics)


def trivial(inst: FacilityInstance, red: Reduced, algorithm: str, eps: float) -> SolveReport:
    return finish(inst, red, np.zeros(0), np.zeros(inst.n_facilities), 1.0, np.zeros(0), Status.SOLVED,
                  algorithm, eps, {}, {})


def target(m: int, eps: float) -> float:
    return cm.target(0.0, m, eps)


def best_weights(best_la: np.ndarray) -> np.ndarray:
    top = best_la.max()
    if not math.isfinite(top):
        return np.ones(best_la.size)
    return np.exp(best_la - top)
