"""Fractional facility location through the implicit star covering LP."""

from __future__ import annotations

from .hochbaum import expansion_columns, hochbaum_expand, map_back
from .parallel import solve_fl_parallel
from .sequential import solve_fl_sequential
from .stars import best_star
from .topup import check_top_up, top_up


def solve_fl(inst, eps: float, algo: str = "sequential", threads: int | None = None, **kwargs):
    """Dispatch by name; ``reference`` runs the sequential solver."""
    if algo in ("sequential", "reference"):
        return solve_fl_sequential(inst, eps, **kwargs)
    if algo == "parallel":
        return solve_fl_parallel(inst, eps, threads=threads, **kwargs)
    raise ValueError(f"unknown algorithm {algo!r}")


__all__ = ["best_star", "check_top_up", "expansion_columns", "hochbaum_expand", "map_back", "solve_fl",
           "solve_fl_parallel", "solve_fl_sequential", "top_up"]
