"""Width-independent (1+eps)-approximation solvers for mixed packing/covering,
pure covering and fractional facility location LPs."""

import os
import warnings

# Must happen before numba is imported anywhere: allow up to 8 worker threads even
# on small machines so thread-count determinism can be exercised everywhere.
os.environ.setdefault("NUMBA_NUM_THREADS", str(max(8, os.cpu_count() or 1)))
warnings.filterwarnings("ignore", message=".*TBB threading layer.*")

from .extended import ExtendedScalar  # noqa: E402
from .instances import (  # noqa: E402
    CoveringInstance,
    FacilityInstance,
    MixedInstance,
    SparseConstraintSystem,
    normalize,
)
from .report import SolveReport, Status  # noqa: E402

__all__ = [
    "CoveringInstance",
    "ExtendedScalar",
    "FacilityInstance",
    "MixedInstance",
    "SolveReport",
    "SparseConstraintSystem",
    "Status",
    "normalize",
]

__version__ = "0.1.0"
