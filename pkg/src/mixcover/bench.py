"""Scaling harness: solve a ladder of generated instances and record counters.

Rows carry the size, algorithm, outcome and the work counters; a log-log
least-squares fit of work against N summarizes how work grows with size.
Wall time is recorded but only the counters are meant for comparisons.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .checks import check_solution, verify_lower_bound
from .covering import solve_covering
from .facility import solve_fl
from .generators import planted_mixed, random_cover, random_facility
from .instances import normalize
from .mpc import solve_mpc
from .report import Status

COLUMNS = ("N", "m", "n", "eps", "algo", "status", "cost", "lower_bound", "ratio", "phases", "increments",
           "work", "wall_ms")
KINDS = ("mpc", "cover", "fl")
# rows (mpc, cover) or facilities (fl) held fixed along a ladder so only N varies
LADDER_M = 64
NNZ_PER_COL = 8


class CheckFailed(RuntimeError):
    """A benchmark run produced a solution that does not verify."""


@dataclass
class BenchRow:
    N: int
    m: int
    n: int
    eps: float
    algo: str
    status: str
    cost: float | None
    lower_bound: float | None
    ratio: float | None
    phases: int
    increments: int
    work: int
    wall_ms: float

    def as_csv(self) -> list[str]:
        def fmt(v):
            return "" if v is None else repr(v) if isinstance(v, float) else str(v)
        return [fmt(getattr(self, c)) for c in COLUMNS]


def ladder_instance(kind: str, N: int, seed: int):
    """Instance with about N nonzeros (pairs for fl) and a size-independent row count."""
    if kind == "mpc":
        inst, _ = planted_mixed(max(1, N // NNZ_PER_COL), LADDER_M // 2, LADDER_M // 2, NNZ_PER_COL // 2, seed)
        return inst
    if kind == "cover":
        return random_cover(max(1, N // 4), LADDER_M, 4, seed)
    if kind == "fl":
        clients = max(1, N // 8)
        return random_facility(LADDER_M, clients, N, seed)
    raise ValueError(f"unknown bench kind {kind!r}")


def dims(inst) -> tuple[int, int, int]:
    """(N, m, n): nonzeros or pairs, rows or clients, variables or facilities."""
    if hasattr(inst, "m_clients"):
        return inst.nnz, inst.m_clients, inst.n_facilities
    return inst.nnz, inst.m, inst.n


def run_one(kind: str, inst, eps: float, algo: str, threads: int | None = None, check: bool = True) -> BenchRow:
    t0 = time.perf_counter()
    if kind == "mpc":
        rep = solve_mpc(inst, eps, algo, threads=threads)
    elif kind == "cover":
        rep = solve_covering(inst, eps)
    else:
        rep = solve_fl(inst, eps, algo, threads=threads)
    wall = (time.perf_counter() - t0) * 1000.0
    N, m, n = dims(inst)
    if check:
        verify(kind, inst, rep, eps, (N, m, n, algo))
    c = rep.counters
    phases = c.get("phases", c.get("scalings", 0))
    return BenchRow(N, m, n, eps, algo, rep.status.value, rep.cost, rep.lower_bound, rep.ratio, int(phases),
                    int(c.get("increments", 0)), int(c.get("work", 0)), round(wall, 3))


def verify(kind: str, inst, rep, eps: float, context) -> None:
    if rep.status is not Status.SOLVED:
        raise CheckFailed(f"run {context} ended with status {rep.status.value}")
    if kind == "mpc":
        ok = check_solution(inst, rep.x, ratio_bound=5 * eps).passed
    else:
        ok = check_solution(inst, rep.x, y=rep.y).passed and verify_lower_bound(inst, rep.certificate)
    if not ok:
        raise CheckFailed(f"run {context} failed verification")


def run_ladder(kind: str, sizes: Iterable[int], eps_values: Iterable[float], algos: Iterable[str], seed: int = 0,
               threads: int | None = None, check: bool = True) -> list[BenchRow]:
    rows = []
    for N in sizes:
        inst = ladder_instance(kind, int(N), seed)
        if kind == "mpc":
            inst = normalize(inst)
        for eps in eps_values:
            for algo in algos:
                rows.append(run_one(kind, inst, float(eps), algo, threads, check))
    return rows


def fit_slope(rows: Iterable[BenchRow]) -> float:
    """Least-squares slope of log(work) against log(N)."""
    pts = [(math.log(r.N), math.log(r.work)) for r in rows if r.work > 0 and r.N > 0]
    if len({p[0] for p in pts}) < 2:
        return math.nan
    xs, ys = np.array(pts).T
    return float(np.polyfit(xs, ys, 1)[0])


def slopes(rows: list[BenchRow]) -> dict[tuple[str, float], float]:
    groups: dict[tuple[str, float], list[BenchRow]] = {}
    for r in rows:
        groups.setdefault((r.algo, r.eps), []).append(r)
    return {k: fit_slope(v) for k, v in groups.items()}


def write_csv(rows: Iterable[BenchRow], path_or_file) -> None:
    if hasattr(path_or_file, "write"):
        w = csv.writer(path_or_file, lineterminator="\n")
        w.writerow(COLUMNS)
        for r in rows:
            w.writerow(r.as_csv())
        return
    with open(path_or_file, "w", newline="", encoding="utf-8") as fh:
        write_csv(rows, fh)


def read_csv(path) -> list[BenchRow]:
    def opt(v):
        return None if v == "" else float(v)
    with open(path, newline="", encoding="utf-8") as fh:
        rd = csv.DictReader(fh)
        if tuple(rd.fieldnames or ()) != COLUMNS:
            raise ValueError("unexpected CSV header")
        return [BenchRow(int(d["N"]), int(d["m"]), int(d["n"]), float(d["eps"]), d["algo"], d["status"],
                         opt(d["cost"]), opt(d["lower_bound"]), opt(d["ratio"]), int(d["phases"]),
                         int(d["increments"]), int(d["work"]), float(d["wall_ms"])) for d in rd]


def summary(rows: list[BenchRow]) -> str:
    lines = []
    for (algo, eps), s in sorted(slopes(rows).items()):
        lines.append(f"slope log(work)/log(N) algo={algo} eps={eps:g}: {s:.4f}")
    return "\n".join(lines)
