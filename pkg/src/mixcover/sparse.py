"""Sparse nonnegative constraint matrices with row- and column-major views."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp


@dataclass(frozen=True, eq=False)
class SparseConstraintSystem:
    """Rows ``sum_j a_ij x_j (>= or <=) rhs_i`` with strictly positive coefficients.

    Row-major storage is CSR with columns ascending inside each row. The
    column-major view lists each column's entries by decreasing coefficient
    (ties by ascending row), which the solvers rely on for column maxima and
    power-of-two grouping. ``csr_to_csc[k]`` maps CSR entry ``k`` to its
    position in the column-major arrays.
    """

    n: int
    rhs: np.ndarray
    indptr: np.ndarray
    indices: np.ndarray
    data: np.ndarray
    col_ptr: np.ndarray = field(repr=False)
    col_rows: np.ndarray = field(repr=False)
    col_vals: np.ndarray = field(repr=False)
    csr_to_csc: np.ndarray = field(repr=False)

    @property
    def m(self) -> int:
        return len(self.rhs)

    @property
    def nnz(self) -> int:
        return len(self.data)

    @classmethod
    def from_csr(cls, n: int, rhs, indptr, indices, data) -> SparseConstraintSystem:
        rhs = np.asarray(rhs, dtype=np.float64)
        mat = sp.csr_matrix(
            (np.asarray(data, dtype=np.float64), np.asarray(indices, dtype=np.int64),
             np.asarray(indptr, dtype=np.int64)),
            shape=(len(rhs), n),
        )
        return cls._build(n, rhs, mat)

    @classmethod
    def from_rows(cls, n: int, rows: Iterable[tuple[float, Sequence[tuple[int, float]]]]) -> SparseConstraintSystem:
        """Build from ``(rhs, [(col, coef), ...])`` pairs. Duplicate entries are summed."""
        rhs, r_idx, c_idx, vals = [], [], [], []
        for i, (b, entries) in enumerate(rows):
            rhs.append(float(b))
            for j, v in entries:
                r_idx.append(i)
                c_idx.append(int(j))
                vals.append(float(v))
        m = len(rhs)
        if c_idx and (min(c_idx) < 0 or max(c_idx) >= n):
            raise ValueError("column index out of range")
        mat = sp.coo_matrix(
            (np.asarray(vals, dtype=np.float64), (np.asarray(r_idx, dtype=np.int64), np.asarray(c_idx, dtype=np.int64))),
            shape=(m, n),
        ).tocsr()
        return cls._build(n, np.asarray(rhs, dtype=np.float64), mat)

    @classmethod
    def empty(cls, n: int) -> SparseConstraintSystem:
        return cls.from_rows(n, [])

    @classmethod
    def _build(cls, n: int, rhs: np.ndarray, mat: sp.csr_matrix) -> SparseConstraintSystem:
        mat.sum_duplicates()
        mat.sort_indices()
        if mat.data.size and (np.any(mat.data < 0) or not np.all(np.isfinite(mat.data))):
            raise ValueError("coefficients must be finite and nonnegative")
        mat.eliminate_zeros()
        if not np.all(np.isfinite(rhs)):
            raise ValueError("right-hand sides must be finite")
        indptr = mat.indptr.astype(np.int64)
        indices = mat.indices.astype(np.int64)
        data = mat.data.astype(np.float64)
        rows = np.repeat(np.arange(len(rhs), dtype=np.int64), np.diff(indptr))
        # column ascending, coefficient descending, row ascending
        order = np.lexsort((rows, -data, indices))
        col_ptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(indices, minlength=n), out=col_ptr[1:])
        csr_to_csc = np.empty(len(data), dtype=np.int64)
        csr_to_csc[order] = np.arange(len(data), dtype=np.int64)
        return cls(
            n=int(n), rhs=rhs, indptr=indptr, indices=indices, data=data,
            col_ptr=col_ptr, col_rows=rows[order], col_vals=data[order], csr_to_csc=csr_to_csc,
        )

    def row(self, i: int) -> list[tuple[int, float]]:
        lo, hi = self.indptr[i], self.indptr[i + 1]
        return list(zip(self.indices[lo:hi].tolist(), self.data[lo:hi].tolist()))

    def rows(self) -> list[tuple[float, list[tuple[int, float]]]]:
        return [(float(self.rhs[i]), self.row(i)) for i in range(self.m)]

    def column(self, j: int) -> list[tuple[int, float]]:
        lo, hi = self.col_ptr[j], self.col_ptr[j + 1]
        return list(zip(self.col_rows[lo:hi].tolist(), self.col_vals[lo:hi].tolist()))

    def column_max(self) -> np.ndarray:
        out = np.zeros(self.n)
        nonempty = np.diff(self.col_ptr) > 0
        out[nonempty] = self.col_vals[self.col_ptr[:-1][nonempty]]
        return out

    def to_scipy(self) -> sp.csr_matrix:
        return sp.csr_matrix((self.data, self.indices, self.indptr), shape=(self.m, self.n))

    def dot(self, x: np.ndarray) -> np.ndarray:
        """Row values ``A x``."""
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.n,):
            raise ValueError(f"expected a vector of length {self.n}, got shape {x.shape}")
        out = np.zeros(self.m)
        if self.nnz:
            rows = np.repeat(np.arange(self.m), np.diff(self.indptr))
            np.add.at(out, rows, self.data * x[self.indices])
        return out

    def scaled_rows(self, factors: np.ndarray, rhs: np.ndarray | None = None) -> SparseConstraintSystem:
        factors = np.asarray(factors, dtype=np.float64)
        data = self.data * np.repeat(factors, np.diff(self.indptr))
        return SparseConstraintSystem.from_csr(
            self.n, self.rhs * factors if rhs is None else rhs, self.indptr, self.indices, data
        )

    def select(self, keep_rows: np.ndarray, keep_cols: np.ndarray) -> SparseConstraintSystem:
        """Submatrix on the given row and column masks (columns renumbered)."""
        keep_rows = np.asarray(keep_rows, dtype=bool)
        keep_cols = np.asarray(keep_cols, dtype=bool)
        sub = self.to_scipy()[keep_rows][:, keep_cols].tocsr()
        return SparseConstraintSystem._build(int(keep_cols.sum()), self.rhs[keep_rows].copy(), sub)

    def same_entries(self, other: SparseConstraintSystem) -> bool:
        return (
            self.n == other.n
            and np.array_equal(self.rhs, other.rhs)
            and np.array_equal(self.indptr, other.indptr)
            and np.array_equal(self.indices, other.indices)
            and np.array_equal(self.data, other.data)
        )
