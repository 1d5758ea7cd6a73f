"""Solver outcomes and the certificates attached to them."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any

import numpy as np


class Status(str, enum.Enum):
    SOLVED = "solved"
    INFEASIBLE = "infeasible"
    CAP_EXCEEDED = "iteration_cap_exceeded"


@dataclass
class InfeasibilityCertificate:
    """Row weights proving that no x >= 0 has ``Cx >= 1`` and ``Px <= 1``.

    With ``q = packing_weights / sum`` and ``r = covering_weights / sum``, every
    column j with ``(C^T r)_j > 0`` must have ``(P^T q)_j - (C^T r)_j > 0``.
    Any feasible x* would give ``x* . (C^T r - P^T q) >= 1 - 1 >= 0``, which is
    impossible under those margins.
    """

    packing_weights: np.ndarray
    covering_weights: np.ndarray
    margins: np.ndarray
    x: np.ndarray | None = None

    def to_json(self) -> dict[str, Any]:
        out = {
            "kind": "mixed-infeasibility",
            "packing_weights": self.packing_weights.tolist(),
            "covering_weights": self.covering_weights.tolist(),
            "margins": self.margins.tolist(),
        }
        if self.x is not None:
            out["x"] = self.x.tolist()
        return out

    @classmethod
    def from_json(cls, d: dict[str, Any]) -> InfeasibilityCertificate:
        return cls(
            np.asarray(d["packing_weights"], dtype=float),
            np.asarray(d["covering_weights"], dtype=float),
            np.asarray(d.get("margins", []), dtype=float),
            None if d.get("x") is None else np.asarray(d["x"], dtype=float),
        )


@dataclass
class LowerBoundCertificate:
    """Nonnegative client/row weights ``u`` whose weak-duality bound is ``value``.

    For covering: ``value = min_j w_j / (A_j . u)`` after scaling u to sum 1.
    For facility location the minimum runs over all stars (j, S).
    """

    weights: np.ndarray
    value: float

    def to_json(self) -> dict[str, Any]:
        return {"kind": "dual-lower-bound", "weights": self.weights.tolist(), "value": self.value}

    @classmethod
    def from_json(cls, d: dict[str, Any]) -> LowerBoundCertificate:
        return cls(np.asarray(d["weights"], dtype=float), float(d["value"]))


@dataclass
class SolveReport:
    status: Status
    x: np.ndarray
    algorithm: str
    eps: float
    U: float
    y: np.ndarray | None = None
    cost: float | None = None
    lower_bound: float | None = None
    certificate: InfeasibilityCertificate | LowerBoundCertificate | None = None
    counters: dict[str, int] = field(default_factory=dict)
    diagnostics: dict[str, float] = field(default_factory=dict)

    @property
    def solved(self) -> bool:
        return self.status is Status.SOLVED

    @property
    def ratio(self) -> float | None:
        if self.cost is None or not self.lower_bound:
            return None
        return self.cost / self.lower_bound

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {"status": self.status.value, "algorithm": self.algorithm, "eps": self.eps, "U": self.U}
        out["x"] = self.x.tolist()
        if self.y is not None:
            out["y"] = self.y.tolist()
        if self.cost is not None:
            out["cost"] = self.cost
        if self.lower_bound is not None:
            out["lower_bound"] = self.lower_bound
        out["certificate"] = None if self.certificate is None else self.certificate.to_json()
        out["counters"] = {k: int(v) for k, v in sorted(self.counters.items())}
        if self.diagnostics:
            out["diagnostics"] = {k: float(v) for k, v in sorted(self.diagnostics.items())}
        return out
