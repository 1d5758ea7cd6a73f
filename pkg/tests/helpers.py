"""Small hand-built instances shared by the test modules."""

from mixcover.instances import MixedInstance, normalize
from mixcover.sparse import SparseConstraintSystem


def mixed(n, packing, covering):
    """Normalized mixed instance from dense rows given as (rhs, coefficients)."""
    def rows(spec):
        return [(rhs, [(j, v) for j, v in enumerate(coeffs) if v]) for rhs, coeffs in spec]
    raw = MixedInstance(SparseConstraintSystem.from_rows(n, rows(packing)),
                        SparseConstraintSystem.from_rows(n, rows(covering)))
    return normalize(raw)
