"""Explicit star expansion of a small facility-location instance.

Every facility j and nonempty subset S of its clients becomes a covering
column of cost ``f_j + sum_{i in S} c_ij`` covering the clients in S. The
covering LP has the same optimum as the facility-location LP; its solutions
map back via ``x_ij = sum_{S contains i} x'_(j,S)`` and ``y_j = max_i x_ij``.
"""

from __future__ import annotations

import numpy as np

from ..instances import CoveringInstance, FacilityInstance
from ..sparse import SparseConstraintSystem

MAX_CLIENTS = 12


def expansion_columns(inst: FacilityInstance) -> list[tuple[int, tuple[int, ...], float]]:
    """``(facility, clients, cost)`` per expansion column, facilities in order, subsets by bitmask."""
    if inst.m_clients > MAX_CLIENTS:
        raise ValueError(f"expansion refused: {inst.m_clients} clients exceeds the limit of {MAX_CLIENTS}")
    cols = []
    for j in range(inst.n_facilities):
        idx = inst.by_facility[inst.fac_ptr[j]:inst.fac_ptr[j + 1]]
        cl = inst.client[idx].tolist()
        cc = inst.cost[idx].tolist()
        for mask in range(1, 1 << len(cl)):
            members = [t for t in range(len(cl)) if mask >> t & 1]
            cost = float(inst.open_cost[j]) + sum(cc[t] for t in members)
            cols.append((j, tuple(cl[t] for t in members), cost))
    return cols


def hochbaum_expand(inst: FacilityInstance) -> CoveringInstance:
    """Set-cover LP with one column per star and one unit row per client."""
    cols = expansion_columns(inst)
    rows: list[list[tuple[int, float]]] = [[] for _ in range(inst.m_clients)]
    for k, (_, clients, _) in enumerate(cols):
        for i in clients:
            rows[i].append((k, 1.0))
    A = SparseConstraintSystem.from_rows(len(cols), [(1.0, r) for r in rows])
    return CoveringInstance(A, np.array([c for _, _, c in cols]))


def map_back(inst: FacilityInstance, xprime) -> tuple[np.ndarray, np.ndarray]:
    """Facility-location ``(x, y)`` (x per pair) from an expansion solution."""
    cols = expansion_columns(inst)
    key = {(int(i), int(j)): k for k, (i, j) in enumerate(zip(inst.client, inst.facility))}
    x = np.zeros(inst.nnz)
    for v, (j, clients, _) in zip(np.asarray(xprime, dtype=float), cols):
        for i in clients:
            x[key[(i, j)]] += v
    y = np.zeros(inst.n_facilities)
    np.maximum.at(y, inst.facility, x)
    return x, y
