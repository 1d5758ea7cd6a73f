"""Seeded instance generators.

Every generator is a pure function of its arguments: the same seed and sizes
give bitwise-identical instances on every platform numpy supports.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .instances import CoveringInstance, FacilityInstance, MixedInstance
from .sparse import SparseConstraintSystem

KINDS = ("mpc-planted-feasible", "mpc-planted-infeasible", "cover-random", "fl-random")


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str
    n: int = 50
    m: int = 50
    density: float = 0.1
    seed: int = 0
    pairs: int | None = None
    cost_low: float = 1.0
    cost_high: float = 10.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown generator kind {self.kind!r}; choose from {', '.join(KINDS)}")
        if self.n < 1 or self.m < 1:
            raise ValueError("n and m must be positive")
        if not (0.0 < self.density <= 1.0):
            raise ValueError("density must lie in (0, 1]")
        if not (0.0 <= self.cost_low <= self.cost_high):
            raise ValueError("need 0 <= cost_low <= cost_high")


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.uint64(seed % 2**64)))


def _random_pattern(rng, m: int, n: int, per_col: int) -> tuple[np.ndarray, np.ndarray]:
    """(row, col) pairs with ``per_col`` distinct rows per column and no empty row."""
    per_col = max(1, min(per_col, m))
    rows = np.concatenate([rng.choice(m, size=per_col, replace=False) for _ in range(n)]) if m > 1 else np.zeros(n, dtype=np.int64)
    cols = np.repeat(np.arange(n), per_col)
    hit = np.zeros(m, dtype=bool)
    hit[rows] = True
    missing = np.flatnonzero(~hit)
    if missing.size:
        rows = np.concatenate([rows, missing])
        cols = np.concatenate([cols, rng.integers(0, n, size=missing.size)])
    # collapse duplicates introduced by the patch-up step
    key = np.unique(rows.astype(np.int64) * n + cols)
    return key // n, key % n


def _system(n: int, rows: np.ndarray, cols: np.ndarray, vals: np.ndarray, m: int, rhs=None) -> SparseConstraintSystem:
    order = np.lexsort((cols, rows))
    rows, cols, vals = rows[order], cols[order], vals[order]
    indptr = np.zeros(m + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=m), out=indptr[1:])
    return SparseConstraintSystem.from_csr(n, np.ones(m) if rhs is None else rhs, indptr, cols, vals)


def planted_mixed(n: int, m_p: int, m_c: int, per_col: int = 4, seed: int = 0,
                  spread: float = 1.0) -> tuple[MixedInstance, np.ndarray]:
    """Unit-rhs mixed instance together with a planted x* (``C x* >= 1``, ``P x* <= 1``).

    Each column has ``per_col`` packing and ``per_col`` covering entries (fewer
    when the matrix is short). Coefficients are log-normal with scale
    ``spread``; covering rows are scaled so ``C_i x*`` lands in [1.05, 1.5] and
    packing rows so ``P_i x*`` lands in [0.5, 0.95].
    """
    rng = _rng(seed)
    x_star = rng.uniform(0.5, 1.5, size=n)
    systems = []
    for m, (lo, hi) in ((m_p, (0.5, 0.95)), (m_c, (1.05, 1.5))):
        if m == 0:
            systems.append(SparseConstraintSystem.empty(n))
            continue
        r, c = _random_pattern(rng, m, n, per_col)
        v = np.exp(spread * rng.standard_normal(r.size))
        load = np.bincount(r, weights=v * x_star[c], minlength=m)
        v = v * (rng.uniform(lo, hi, size=m) / load)[r]
        systems.append(_system(n, r, c, v, m))
    return MixedInstance(systems[0], systems[1]), x_star


def planted_infeasible(n: int, m_p: int, m_c: int, per_col: int = 4, seed: int = 0,
                       spread: float = 1.0) -> MixedInstance:
    """A planted-feasible instance plus one covering row copied as a packing row with rhs 1/2.

    Any x with that covering row at least 1 puts the copy at twice its bound,
    so the result is infeasible.
    """
    inst, _ = planted_mixed(n, m_p, m_c, per_col, seed, spread)
    rng = _rng(seed ^ 0x5EED)
    r = int(rng.integers(0, inst.m_c))
    rows = inst.packing.rows() + [(0.5, inst.covering.row(r))]
    return MixedInstance(SparseConstraintSystem.from_rows(n, rows), inst.covering)


def random_cover(n: int, m: int, per_col: int = 4, seed: int = 0, binary: bool = True,
                 cost_low: float = 1.0, cost_high: float = 10.0) -> CoveringInstance:
    """Random covering instance in which every row has at least one nonzero."""
    rng = _rng(seed)
    r, c = _random_pattern(rng, m, n, per_col)
    v = np.ones(r.size) if binary else rng.uniform(0.1, 1.0, size=r.size)
    w = rng.uniform(cost_low, cost_high, size=n)
    return CoveringInstance(_system(n, r, c, v, m), w)


def random_facility(n_facilities: int, m_clients: int, pairs: int | None = None, seed: int = 0,
                    cost_low: float = 1.0, cost_high: float = 10.0,
                    zero_cost_prob: float = 0.0) -> FacilityInstance:
    """Random facility-location instance; each client gets at least one pair.

    ``pairs`` defaults to about half of all client/facility combinations.
    """
    rng = _rng(seed)
    total = n_facilities * m_clients
    pairs = max(m_clients, min(total, pairs if pairs is not None else max(1, total // 2)))
    first = rng.integers(0, n_facilities, size=m_clients)
    chosen = np.zeros(total, dtype=bool)
    chosen[np.arange(m_clients) * n_facilities + first] = True
    rest = np.flatnonzero(~chosen)
    extra = pairs - m_clients
    if extra > 0:
        chosen[rng.choice(rest, size=extra, replace=False)] = True
    keys = np.flatnonzero(chosen)
    ci, fj = keys // n_facilities, keys % n_facilities
    f = rng.uniform(cost_low, cost_high, size=n_facilities)
    c = rng.uniform(0.0, cost_high, size=keys.size)
    if zero_cost_prob > 0:
        f[rng.random(n_facilities) < zero_cost_prob] = 0.0
        c[rng.random(keys.size) < zero_cost_prob] = 0.0
    return FacilityInstance.from_pairs(f, m_clients, np.column_stack([ci, fj, c]))


def generate(spec: GeneratorSpec):
    """Instance (and planted x* for the feasible kind, else None) for a spec."""
    per_col = max(1, int(round(spec.density * spec.m)))
    if spec.kind == "mpc-planted-feasible":
        return planted_mixed(spec.n, spec.m // 2, spec.m - spec.m // 2, per_col, spec.seed)
    if spec.kind == "mpc-planted-infeasible":
        return planted_infeasible(spec.n, spec.m // 2, spec.m - spec.m // 2, per_col, spec.seed), None
    if spec.kind == "cover-random":
        return random_cover(spec.n, spec.m, per_col, spec.seed, cost_low=spec.cost_low, cost_high=spec.cost_high), None
    return random_facility(spec.n, spec.m, spec.pairs, spec.seed, spec.cost_low, spec.cost_high), None
