"""JSON instance and solution files.

Instances::

    {"type": "mpc", "n": 3, "packing": [{"rhs": 1, "entries": [[0, 1.0]]}], "covering": [...]}
    {"type": "cover", "n": 3, "costs": [...], "rows": [{"rhs": 1, "entries": [[col, coef], ...]}]}
    {"type": "fl", "facilities": [{"open": 2.0}], "clients": 2, "pairs": [[client, facility, cost]]}

Indices are 0-based; duplicate matrix entries are summed. Output is written
with a fixed key order and shortest float repr, so equal data gives equal bytes.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any

import numpy as np

from .instances import CoveringInstance, FacilityInstance, InstanceError, MixedInstance
from .report import SolveReport
from .sparse import SparseConstraintSystem


def _num(v: Any, what: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise InstanceError(f"{what} must be a number, got {v!r}")
    f = float(v)
    if not math.isfinite(f):
        raise InstanceError(f"{what} must be finite")
    return f


def _index(v: Any, what: str) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        if isinstance(v, float) and v.is_integer():
            return int(v)
        raise InstanceError(f"{what} must be an integer, got {v!r}")
    return v


def _rows(data: Any, n: int, what: str) -> SparseConstraintSystem:
    if not isinstance(data, list):
        raise InstanceError(f"{what} must be a list of rows")
    rows = []
    for r, row in enumerate(data):
        if not isinstance(row, dict) or "rhs" not in row or "entries" not in row:
            raise InstanceError(f"{what}[{r}] needs 'rhs' and 'entries'")
        entries = []
        for e in row["entries"]:
            if not isinstance(e, (list, tuple)) or len(e) != 2:
                raise InstanceError(f"{what}[{r}] entries must be [col, coef] pairs")
            col = _index(e[0], f"{what}[{r}] column")
            coef = _num(e[1], f"{what}[{r}] coefficient")
            if not 0 <= col < n:
                raise InstanceError(f"{what}[{r}] column {col} out of range [0, {n})")
            if coef < 0:
                raise InstanceError(f"{what}[{r}] has a negative coefficient")
            entries.append((col, coef))
        rows.append((_num(row["rhs"], f"{what}[{r}] rhs"), entries))
    return SparseConstraintSystem.from_rows(n, rows)


def instance_from_json(d: Any):
    """Raw (not yet normalized) instance from parsed JSON; raises InstanceError when malformed."""
    if not isinstance(d, dict) or "type" not in d:
        raise InstanceError("instance must be an object with a 'type' field")
    kind = d["type"]
    try:
        if kind == "mpc":
            n = _index(d["n"], "n")
            if n < 0:
                raise InstanceError("n must be nonnegative")
            return MixedInstance(_rows(d.get("packing", []), n, "packing"), _rows(d.get("covering", []), n, "covering"))
        if kind == "cover":
            n = _index(d["n"], "n")
            costs = [_num(c, "cost") for c in d["costs"]]
            if len(costs) != n:
                raise InstanceError(f"expected {n} costs, got {len(costs)}")
            return CoveringInstance(_rows(d["rows"], n, "rows"), np.array(costs, dtype=np.float64))
        if kind == "fl":
            fac = d["facilities"]
            if not isinstance(fac, list) or any(not isinstance(f, dict) or "open" not in f for f in fac):
                raise InstanceError("facilities must be a list of {'open': cost}")
            f = [_num(v["open"], "opening cost") for v in fac]
            m = _index(d["clients"], "clients")
            pairs = []
            for p in d["pairs"]:
                if not isinstance(p, (list, tuple)) or len(p) != 3:
                    raise InstanceError("pairs must be [client, facility, cost] triples")
                pairs.append((_index(p[0], "client"), _index(p[1], "facility"), _num(p[2], "assignment cost")))
            return FacilityInstance.from_pairs(np.array(f, dtype=np.float64), m, np.array(pairs, dtype=np.float64).reshape(-1, 3))
    except KeyError as e:
        raise InstanceError(f"missing field {e.args[0]!r}") from None
    except TypeError as e:
        raise InstanceError(str(e)) from None
    except InstanceError:
        raise
    except ValueError as e:
        raise InstanceError(str(e)) from None
    raise InstanceError(f"unknown instance type {kind!r}")


def load_instance(path: str | Path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as e:
        raise InstanceError(f"{path}: not UTF-8 ({e.reason})") from None
    try:
        d = json.loads(text)
    except json.JSONDecodeError as e:
        raise InstanceError(f"{path}: invalid JSON: {e}") from None
    return instance_from_json(d)


def _system_rows(sys: SparseConstraintSystem) -> list[dict[str, Any]]:
    return [{"rhs": b, "entries": [[j, v] for j, v in entries]} for b, entries in sys.rows()]


def instance_to_json(inst) -> dict[str, Any]:
    if isinstance(inst, MixedInstance):
        return {"type": "mpc", "n": inst.n, "packing": _system_rows(inst.packing),
                "covering": _system_rows(inst.covering)}
    if isinstance(inst, CoveringInstance):
        return {"type": "cover", "n": inst.n, "costs": inst.w.tolist(), "rows": _system_rows(inst.A)}
    if isinstance(inst, FacilityInstance):
        return {"type": "fl", "facilities": [{"open": f} for f in inst.open_cost.tolist()],
                "clients": inst.m_clients, "pairs": [[i, j, c] for i, j, c in inst.pairs()]}
    raise TypeError(f"cannot serialize {type(inst).__name__}")


def dumps(obj: Any) -> str:
    return json.dumps(obj, separators=(",", ":"), allow_nan=False) + "\n"


def save_instance(inst, path: str | Path) -> None:
    Path(path).write_text(dumps(instance_to_json(inst)), encoding="utf-8")


def solution_to_json(report: SolveReport, inst=None) -> dict[str, Any]:
    """Solution file contents: status, x, optional y, cost, bound, certificate, counters.

    ``inst`` is the instance the solver ran on. Mixed x is lifted back to the
    raw variables when it came out of normalization; facility x is a sparse
    ``[client, facility, value]`` list over the pairs with a nonzero value.
    """
    out: dict[str, Any] = {"status": report.status.value}
    if isinstance(inst, FacilityInstance):
        nz = np.flatnonzero(report.x)
        out["x"] = [[int(inst.client[k]), int(inst.facility[k]), float(report.x[k])] for k in nz]
        out["y"] = report.y.tolist()
    else:
        x = report.x
        origin = getattr(inst, "origin", None)
        if isinstance(inst, MixedInstance) and origin is not None:
            x = origin.expand(x)
        out["x"] = x.tolist()
    if report.cost is not None:
        out["cost"] = report.cost
    if report.lower_bound is not None:
        out["lower_bound"] = report.lower_bound
    out["certificate"] = None if report.certificate is None else report.certificate.to_json()
    out["counters"] = {k: int(v) for k, v in sorted(report.counters.items())}
    return out


def facility_x_from_json(inst: FacilityInstance, entries) -> np.ndarray:
    """Dense per-pair x from a sparse ``[client, facility, value]`` list."""
    key = {(int(i), int(j)): k for k, (i, j) in enumerate(zip(inst.client, inst.facility))}
    x = np.zeros(inst.nnz)
    for i, j, v in entries:
        k = key.get((int(i), int(j)))
        if k is None:
            raise InstanceError(f"solution uses pair ({i}, {j}) which the instance does not have")
        x[k] = float(v)
    return x
