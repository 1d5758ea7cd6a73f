"""Problem instances and the unit right-hand-side normalization pass."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .sparse import SparseConstraintSystem


class InstanceError(ValueError):
    """Malformed or inconsistent instance data."""


@dataclass(frozen=True)
class Normalization:
    """How a normalized instance relates to the raw one it came from."""

    n_original: int
    kept_columns: np.ndarray
    fixed_zero: tuple[int, ...] = ()
    dropped_packing_rows: tuple[int, ...] = ()
    dropped_covering_rows: tuple[int, ...] = ()
    empty_covering_rows: tuple[int, ...] = ()

    def expand(self, x: np.ndarray) -> np.ndarray:
        """Lift a solution on the kept columns back to the original variable space."""
        out = np.zeros(self.n_original)
        out[self.kept_columns] = x
        return out


@dataclass(frozen=True, eq=False)
class MixedInstance:
    """Find x >= 0 with ``covering x >= rhs`` and ``packing x <= rhs``."""

    packing: SparseConstraintSystem
    covering: SparseConstraintSystem
    origin: Normalization | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.packing.n != self.covering.n:
            raise InstanceError("packing and covering systems disagree on n")

    @property
    def n(self) -> int:
        return self.packing.n

    @property
    def m_p(self) -> int:
        return self.packing.m

    @property
    def m_c(self) -> int:
        return self.covering.m

    @property
    def m(self) -> int:
        return self.m_p + self.m_c

    @property
    def nnz(self) -> int:
        return self.packing.nnz + self.covering.nnz

    @property
    def is_normalized(self) -> bool:
        return bool(np.all(self.packing.rhs == 1.0) and np.all(self.covering.rhs == 1.0))


@dataclass(frozen=True, eq=False)
class CoveringInstance:
    """Minimize ``w . x`` subject to ``A x >= rhs``, ``x >= 0``."""

    A: SparseConstraintSystem
    w: np.ndarray
    origin: Normalization | None = field(default=None, compare=False)

    def __post_init__(self):
        w = np.asarray(self.w, dtype=np.float64)
        if w.shape != (self.A.n,):
            raise InstanceError(f"cost vector has shape {w.shape}, expected ({self.A.n},)")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise InstanceError("costs must be finite and nonnegative")
        object.__setattr__(self, "w", w)

    @property
    def n(self) -> int:
        return self.A.n

    @property
    def m(self) -> int:
        return self.A.m

    @property
    def nnz(self) -> int:
        return self.A.nnz

    @property
    def is_normalized(self) -> bool:
        return bool(np.all(self.A.rhs == 1.0))

    def validate(self) -> None:
        empty = np.flatnonzero(np.diff(self.A.indptr) == 0)
        if empty.size:
            raise InstanceError(f"covering rows {empty[:5].tolist()} have no nonzeros (infeasible)")


@dataclass(frozen=True, eq=False)
class FacilityInstance:
    """Fractional facility location with only the finite client/facility pairs stored.

    Pairs are kept client-major, each client's pairs sorted by ascending
    assignment cost (ties by facility). ``by_facility`` is a permutation of the
    pair indices grouping them by facility.
    """

    open_cost: np.ndarray
    m_clients: int
    client: np.ndarray
    facility: np.ndarray
    cost: np.ndarray
    client_ptr: np.ndarray = field(repr=False)
    fac_ptr: np.ndarray = field(repr=False)
    by_facility: np.ndarray = field(repr=False)

    @classmethod
    def from_pairs(cls, open_cost, m_clients: int, pairs) -> FacilityInstance:
        f = np.asarray(open_cost, dtype=np.float64)
        arr = np.asarray(pairs, dtype=np.float64).reshape(-1, 3)
        ci = arr[:, 0].astype(np.int64)
        fj = arr[:, 1].astype(np.int64)
        cc = arr[:, 2]
        if np.any(arr[:, 0] != ci) or np.any(arr[:, 1] != fj):
            raise InstanceError("pair indices must be integers")
        n = len(f)
        if np.any(f < 0) or not np.all(np.isfinite(f)):
            raise InstanceError("opening costs must be finite and nonnegative")
        if np.any(cc < 0) or not np.all(np.isfinite(cc)):
            raise InstanceError("assignment costs must be finite and nonnegative")
        if ci.size and (ci.min() < 0 or ci.max() >= m_clients or fj.min() < 0 or fj.max() >= n):
            raise InstanceError("pair index out of range")
        order = np.lexsort((fj, cc, ci))
        ci, fj, cc = ci[order], fj[order], cc[order]
        key = ci * max(n, 1) + fj
        if np.unique(key).size != key.size:
            raise InstanceError("duplicate (client, facility) pair")
        counts = np.bincount(ci, minlength=m_clients)
        if m_clients and np.any(counts == 0):
            raise InstanceError(f"clients {np.flatnonzero(counts == 0)[:5].tolist()} have no eligible facility")
        client_ptr = np.zeros(m_clients + 1, dtype=np.int64)
        np.cumsum(counts, out=client_ptr[1:])
        by_facility = np.lexsort((ci, fj)).astype(np.int64)
        fac_ptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(fj, minlength=n), out=fac_ptr[1:])
        return cls(f, int(m_clients), ci, fj, cc, client_ptr, fac_ptr, by_facility)

    @property
    def n_facilities(self) -> int:
        return len(self.open_cost)

    @property
    def nnz(self) -> int:
        return len(self.cost)

    def pairs(self) -> list[tuple[int, int, float]]:
        return list(zip(self.client.tolist(), self.facility.tolist(), self.cost.tolist()))

    def cost_of(self, x: np.ndarray, y: np.ndarray) -> float:
        """``sum_j f_j y_j + sum_ij c_ij x_ij`` with x indexed like the pairs."""
        return float(np.dot(self.open_cost, y) + np.dot(self.cost, x))

    def coverage(self, x: np.ndarray) -> np.ndarray:
        return np.bincount(self.client, weights=x, minlength=self.m_clients)

    def nearest_cost(self) -> np.ndarray:
        """Per client, ``min_j f_j + c_ij``."""
        tot = self.open_cost[self.facility] + self.cost
        out = np.full(self.m_clients, np.inf)
        np.minimum.at(out, self.client, tot)
        return out


def _normalize_system(sys: SparseConstraintSystem) -> SparseConstraintSystem:
    if np.all(sys.rhs == 1.0):
        return sys
    return sys.scaled_rows(1.0 / sys.rhs, rhs=np.ones(sys.m))


def normalize(raw):
    """Divide every row by its right-hand side.

    Mixed instances: a packing row with rhs 0 forces every variable it touches
    to 0, so those columns and the row are removed. Covering rows with rhs <= 0
    are vacuous and dropped. Columns left with no nonzeros are dropped too. A
    covering row that loses all its support is kept (empty) and recorded in
    ``origin.empty_covering_rows``; such an instance is infeasible.

    Covering instances: rows with rhs <= 0 are dropped, the rest scaled.
    Applying ``normalize`` to a normalized instance returns it unchanged.
    """
    if isinstance(raw, CoveringInstance):
        return _normalize_covering(raw)
    if isinstance(raw, MixedInstance):
        return _normalize_mixed(raw)
    raise TypeError(f"cannot normalize {type(raw).__name__}")


def _normalize_covering(raw: CoveringInstance) -> CoveringInstance:
    A = raw.A
    if raw.is_normalized:
        return raw
    keep = A.rhs > 0
    sub = A if keep.all() else A.select(keep, np.ones(A.n, dtype=bool))
    origin = Normalization(
        A.n, np.arange(A.n), dropped_covering_rows=tuple(np.flatnonzero(~keep).tolist())
    )
    return CoveringInstance(_normalize_system(sub), raw.w, origin=origin)


def _normalize_mixed(raw: MixedInstance) -> MixedInstance:
    P, C = raw.packing, raw.covering
    if raw.is_normalized and raw.origin is not None:
        return raw
    if np.any(P.rhs < 0):
        raise InstanceError("packing rows with negative rhs are infeasible for x >= 0")
    zero_rows = P.rhs == 0
    fixed = np.zeros(raw.n, dtype=bool)
    for i in np.flatnonzero(zero_rows):
        fixed[P.indices[P.indptr[i]:P.indptr[i + 1]]] = True
    keep_c_rows = C.rhs > 0
    P1 = P.select(~zero_rows, ~fixed)
    C1 = C.select(keep_c_rows, ~fixed)
    kept = np.flatnonzero(~fixed)
    # drop columns with no nonzero left
    used = (np.diff(P1.col_ptr) + np.diff(C1.col_ptr)) > 0
    if not used.all():
        P1 = P1.select(np.ones(P1.m, dtype=bool), used)
        C1 = C1.select(np.ones(C1.m, dtype=bool), used)
        kept = kept[used]
    empty = np.flatnonzero(np.diff(C1.indptr) == 0)
    origin = Normalization(
        n_original=raw.n,
        kept_columns=kept,
        fixed_zero=tuple(np.flatnonzero(fixed).tolist()),
        dropped_packing_rows=tuple(np.flatnonzero(zero_rows).tolist()),
        dropped_covering_rows=tuple(np.flatnonzero(~keep_c_rows).tolist()),
        empty_covering_rows=tuple(empty.tolist()),
    )
    return MixedInstance(_normalize_system(P1), _normalize_system(C1), origin=origin)
