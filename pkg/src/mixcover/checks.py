"""Independent feasibility checks and certificate verifiers.

Nothing here shares code with the solver kernels: weights are recomputed in
the log domain with numpy so a solver bug cannot vouch for itself.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .instances import CoveringInstance, FacilityInstance, MixedInstance
from .report import InfeasibilityCertificate, LowerBoundCertificate


@dataclass(frozen=True)
class FeasibilityReport:
    passed: bool
    min_cover: float
    max_pack: float | None = None
    cost: float | None = None
    max_violation_xy: float | None = None

    def __bool__(self) -> bool:
        return self.passed


def check_solution(instance, x, tolerance: float = 1e-9, ratio_bound: float = 0.0, y=None) -> FeasibilityReport:
    """Check a normalized-instance solution.

    Mixed: ``min_i C_i x >= 1 - tolerance`` and ``max_i P_i x <= 1 + ratio_bound``.
    Covering: ``min_i A_i x >= 1 - tolerance`` (cost reported).
    Facility: every client covered to ``1 - tolerance`` and ``x_ij <= y_j``.
    """
    x = np.asarray(x, dtype=np.float64)
    if isinstance(instance, MixedInstance):
        if x.shape != (instance.n,):
            raise ValueError(f"x has shape {x.shape}, expected ({instance.n},)")
        if np.any(x < 0):
            return FeasibilityReport(False, float("nan"), float("nan"))
        cov = instance.covering.dot(x)
        pack = instance.packing.dot(x)
        lo = float(cov.min()) if cov.size else float("inf")
        hi = float(pack.max()) if pack.size else 0.0
        return FeasibilityReport(lo >= 1 - tolerance and hi <= 1 + ratio_bound, lo, hi)
    if isinstance(instance, CoveringInstance):
        if x.shape != (instance.n,):
            raise ValueError(f"x has shape {x.shape}, expected ({instance.n},)")
        cov = instance.A.dot(x)
        lo = float(cov.min()) if cov.size else float("inf")
        ok = lo >= 1 - tolerance and not np.any(x < 0)
        return FeasibilityReport(ok, lo, cost=float(instance.w @ x))
    if isinstance(instance, FacilityInstance):
        if y is None:
            raise ValueError("facility solutions need y")
        y = np.asarray(y, dtype=np.float64)
        if x.shape != (instance.nnz,) or y.shape != (instance.n_facilities,):
            raise ValueError("x must be indexed by pairs and y by facilities")
        cov = instance.coverage(x)
        lo = float(cov.min()) if cov.size else float("inf")
        excess = x - y[instance.facility]
        worst = float(excess.max()) if excess.size else 0.0
        ok = lo >= 1 - tolerance and worst <= tolerance * max(1.0, float(y.max(initial=0.0))) and not np.any(x < 0)
        return FeasibilityReport(ok, lo, cost=instance.cost_of(x, y), max_violation_xy=worst)
    raise TypeError(f"unsupported instance type {type(instance).__name__}")


def _normalized(w: np.ndarray) -> np.ndarray:
    w = np.asarray(w, dtype=np.float64)
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite and nonnegative")
    s = w.sum()
    return w / s if s > 0 else w


def _colsum(sys, weights: np.ndarray) -> np.ndarray:
    if sys.m == 0:
        return np.zeros(sys.n)
    return sys.to_scipy().T @ weights


def certificate_margins(instance: MixedInstance, packing_weights, covering_weights) -> np.ndarray:
    """Per-column ``P_j . q - C_j . r`` for the weights scaled to unit sum."""
    q = _normalized(packing_weights)
    r = _normalized(covering_weights)
    return _colsum(instance.packing, q) - _colsum(instance.covering, r)


def verify_infeasibility(instance: MixedInstance, cert: InfeasibilityCertificate, rel_tol: float = 1e-12) -> bool:
    """True when the certificate proves the normalized instance infeasible."""
    q = _normalized(cert.packing_weights)
    r = _normalized(cert.covering_weights)
    if q.shape != (instance.m_p,) or r.shape != (instance.m_c,):
        return False
    if instance.m_c == 0 or r.sum() == 0:
        return False
    pw = _colsum(instance.packing, q)
    cw = _colsum(instance.covering, r)
    margin = pw - cw
    need = cw > 0
    return bool(np.all(margin[need] > rel_tol * (pw[need] + cw[need])))


def mixed_weights(instance: MixedInstance, x: np.ndarray, eps: float, U: float) -> tuple[np.ndarray, np.ndarray]:
    """Normalized ``p(x)/|p(x)|`` and ``c(x)/|c(x)|`` computed in the log domain."""
    px = instance.packing.dot(x)
    cx = instance.covering.dot(x)
    lp = px * np.log1p(eps)
    lc = np.where(cx < U, cx * np.log1p(-eps), -np.inf)
    return _softmax(lp), _softmax(lc)


def _softmax(logw: np.ndarray) -> np.ndarray:
    if logw.size == 0:
        return logw.copy()
    top = logw.max()
    if top == -np.inf:
        return np.zeros_like(logw)
    w = np.exp(logw - top)
    return w / w.sum()


def infeasibility_certificate(instance: MixedInstance, x: np.ndarray, eps: float, U: float) -> InfeasibilityCertificate | None:
    """Certificate from the weights at x, or None when they do not prove infeasibility."""
    q, r = mixed_weights(instance, x, eps, U)
    cert = InfeasibilityCertificate(q, r, certificate_margins(instance, q, r), np.asarray(x, dtype=float).copy())
    return cert if verify_infeasibility(instance, cert) else None


def covering_lower_bound(instance: CoveringInstance, weights) -> float:
    """``min_j w_j / (A_j . u)`` for u = weights scaled to unit sum (weak duality)."""
    u = _normalized(weights)
    if u.sum() == 0:
        return 0.0
    aw = _colsum(instance.A, u)
    with np.errstate(divide="ignore", invalid="ignore"):
        lam = np.where(aw > 0, instance.w / np.where(aw > 0, aw, 1.0), np.inf)
    best = float(lam.min()) if lam.size else np.inf
    return best if np.isfinite(best) else 0.0


def facility_lower_bound(instance: FacilityInstance, weights) -> float:
    """``min over stars (j, S) of (f_j + sum_S c_ij) / sum_S u_i`` with u scaled to unit sum.

    For each facility the optimal star is a prefix of its clients ordered by
    ``c_ij / u_i``; clients with zero weight never help.
    """
    u = _normalized(weights)
    if u.sum() == 0:
        return 0.0
    best = np.inf
    for j in range(instance.n_facilities):
        idx = instance.by_facility[instance.fac_ptr[j]:instance.fac_ptr[j + 1]]
        cl = instance.client[idx]
        uu = u[cl]
        keep = uu > 0
        if not keep.any():
            continue
        cc = instance.cost[idx][keep]
        uu = uu[keep]
        order = np.argsort(cc / uu, kind="stable")
        num = instance.open_cost[j] + np.cumsum(cc[order])
        den = np.cumsum(uu[order])
        best = min(best, float((num / den).min()))
    return best if np.isfinite(best) else 0.0


def verify_lower_bound(instance, cert: LowerBoundCertificate, rel_tol: float = 1e-9) -> bool:
    """Recompute the bound from the certificate weights and compare to its claimed value."""
    if isinstance(instance, CoveringInstance):
        value = covering_lower_bound(instance, cert.weights)
    elif isinstance(instance, FacilityInstance):
        value = facility_lower_bound(instance, cert.weights)
    else:
        raise TypeError(f"unsupported instance type {type(instance).__name__}")
    return cert.value <= value * (1 + rel_tol) + 1e-300
