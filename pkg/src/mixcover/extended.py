"""Extended-exponent reals: a float mantissa in [1, 2) and an int64 exponent.

Weights such as (1+eps)**(P_i x) reach 2**(1e4) and beyond for small eps, far
outside the double range. The solver kernels carry these as ``(mantissa,
exponent)`` pairs using the jitted helpers below; :class:`ExtendedScalar` wraps
the same helpers for use from ordinary Python code.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import total_ordering

from numba import njit

LN2 = math.log(2.0)
# Exponent gap beyond which the smaller addend cannot affect a double mantissa.
_NEGLIGIBLE = 1100


@njit(cache=True)
def ext_norm(v, e):
    """Renormalize ``v * 2**e`` (v >= 0) so the mantissa lies in [1, 2)."""
    if v == 0.0:
        return 0.0, 0
    f, k = math.frexp(v)
    return 2.0 * f, e + k - 1


@njit(cache=True)
def ext_from_log2(lg):
    """The value ``2**lg``; ``lg = -inf`` gives zero."""
    if lg == -math.inf:
        return 0.0, 0
    e = math.floor(lg)
    m = math.exp((lg - e) * 0.6931471805599453)
    ei = int(e)
    # lg - e lies in [0, 1); rounding can still land exactly on 2
    if m >= 2.0:
        return m * 0.5, ei + 1
    return m, ei


@njit(cache=True)
def ext_log2(m, e):
    if m == 0.0:
        return -math.inf
    return e + math.log2(m)


@njit(cache=True)
def ext_add(m1, e1, m2, e2):
    if m1 == 0.0:
        return m2, e2
    if m2 == 0.0:
        return m1, e1
    if e1 >= e2:
        d = e2 - e1
        if d < -1100:
            return m1, e1
        return ext_norm(m1 + math.ldexp(m2, d), e1)
    d = e1 - e2
    if d < -1100:
        return m2, e2
    return ext_norm(m2 + math.ldexp(m1, d), e2)


@njit(cache=True)
def ext_sub(m1, e1, m2, e2):
    """``max(a - b, 0)``; callers use it only for sums known to stay nonnegative."""
    if m2 == 0.0:
        return m1, e1
    if e2 > e1 or (e2 == e1 and m2 >= m1):
        return 0.0, 0
    d = e2 - e1
    if d < -1100:
        return m1, e1
    v = m1 - math.ldexp(m2, d)
    if v <= 0.0:
        return 0.0, 0
    return ext_norm(v, e1)


@njit(cache=True)
def ext_mul(m1, e1, m2, e2):
    if m1 == 0.0 or m2 == 0.0:
        return 0.0, 0
    return ext_norm(m1 * m2, e1 + e2)


@njit(cache=True)
def ext_scale(m, e, k):
    """Multiply by a nonnegative double ``k``."""
    if m == 0.0 or k == 0.0:
        return 0.0, 0
    return ext_norm(m * k, e)


@njit(cache=True)
def ext_lt(m1, e1, m2, e2):
    if m1 == 0.0:
        return m2 > 0.0
    if m2 == 0.0:
        return False
    if e1 != e2:
        return e1 < e2
    return m1 < m2


@njit(cache=True)
def ext_to_float(m, e):
    """Convert to a double; returns ``(value, saturated)``."""
    if m == 0.0:
        return 0.0, False
    if e > 1023:
        return math.inf, True
    if e < -1074:
        return 0.0, True
    v = math.ldexp(m, e)
    return v, (v == 0.0 or v == math.inf)


@njit(cache=True)
def ext_ratio(m1, e1, m2, e2):
    """``a / b`` as a double with a saturation flag (``b == 0`` gives inf)."""
    if m2 == 0.0:
        return math.inf, True
    if m1 == 0.0:
        return 0.0, False
    return ext_to_float(m1 / m2, e1 - e2)


@total_ordering
@dataclass(frozen=True)
class ExtendedScalar:
    """Nonnegative real ``mantissa * 2**exponent`` with ``mantissa`` in [1, 2) or 0."""

    mantissa: float
    exponent: int = 0

    def __post_init__(self):
        m = self.mantissa
        if m != 0.0 and not (1.0 <= m < 2.0):
            raise ValueError(f"mantissa {m!r} is not normalized")
        if m == 0.0 and self.exponent != 0:
            object.__setattr__(self, "exponent", 0)

    @classmethod
    def from_float(cls, v: float) -> ExtendedScalar:
        if v < 0 or math.isnan(v) or math.isinf(v):
            raise ValueError(f"cannot represent {v!r}")
        return cls(*ext_norm(float(v), 0))

    @classmethod
    def from_log2(cls, lg: float) -> ExtendedScalar:
        return cls(*ext_from_log2(float(lg)))

    @classmethod
    def zero(cls) -> ExtendedScalar:
        return cls(0.0, 0)

    @classmethod
    def one(cls) -> ExtendedScalar:
        return cls(1.0, 0)

    def is_zero(self) -> bool:
        return self.mantissa == 0.0

    def __add__(self, other: ExtendedScalar) -> ExtendedScalar:
        return ExtendedScalar(*ext_add(self.mantissa, self.exponent, other.mantissa, other.exponent))

    def __sub__(self, other: ExtendedScalar) -> ExtendedScalar:
        """Truncated subtraction: never goes below zero."""
        return ExtendedScalar(*ext_sub(self.mantissa, self.exponent, other.mantissa, other.exponent))

    def __mul__(self, other):
        if isinstance(other, ExtendedScalar):
            return ExtendedScalar(*ext_mul(self.mantissa, self.exponent, other.mantissa, other.exponent))
        return ExtendedScalar(*ext_scale(self.mantissa, self.exponent, float(other)))

    __rmul__ = __mul__

    def __pow__(self, k: int) -> ExtendedScalar:
        """Integer power by repeated squaring."""
        if k < 0:
            raise ValueError("negative powers are not supported")
        result = ExtendedScalar.one()
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other) -> bool:
        if not isinstance(other, ExtendedScalar):
            return NotImplemented
        return self.mantissa == other.mantissa and self.exponent == other.exponent

    def __lt__(self, other: ExtendedScalar) -> bool:
        return bool(ext_lt(self.mantissa, self.exponent, other.mantissa, other.exponent))

    def __hash__(self) -> int:
        return hash((self.mantissa, self.exponent))

    def ratio(self, other: ExtendedScalar) -> tuple[float, bool]:
        """``self / other`` as a float, plus a flag set when the result saturated."""
        v, sat = ext_ratio(self.mantissa, self.exponent, other.mantissa, other.exponent)
        return float(v), bool(sat)

    def log2(self) -> float:
        return float(ext_log2(self.mantissa, self.exponent))

    def to_float(self) -> float:
        v, _ = ext_to_float(self.mantissa, self.exponent)
        return float(v)

    def __repr__(self) -> str:
        return f"ExtendedScalar({self.mantissa!r}, e={self.exponent})"
