"""Mixed packing/covering solvers."""

from __future__ import annotations

from .parallel import solve_parallel
from .reference import solve_reference
from .sequential import solve_sequential

ALGORITHMS = ("reference", "sequential", "parallel")


def solve_mpc(inst, eps: float, algo: str = "sequential", threads: int | None = None, **kwargs):
    """Dispatch to one of the mixed packing/covering solvers by name."""
    if algo == "reference":
        return solve_reference(inst, eps, **kwargs)
    if algo == "sequential":
        return solve_sequential(inst, eps, **kwargs)
    if algo == "parallel":
        return solve_parallel(inst, eps, threads=threads, **kwargs)
    raise ValueError(f"unknown algorithm {algo!r}; expected one of {ALGORITHMS}")


__all__ = ["ALGORITHMS", "solve_mpc", "solve_parallel", "solve_reference", "solve_sequential"]
