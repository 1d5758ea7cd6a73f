import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mixcover.extended import ExtendedScalar, ext_from_log2

mpmath.mp.prec = 200


def _mp(a: ExtendedScalar):
    return mpmath.mpf(a.mantissa) * mpmath.mpf(2) ** a.exponent


ext = st.builds(
    lambda m, e: ExtendedScalar(m, e),
    st.floats(1.0, 2.0, exclude_max=True),
    st.integers(-5000, 5000),
)


def test_add_equal_values_bumps_exponent():
    assert ExtendedScalar(1.0, 10) + ExtendedScalar(1.0, 10) == ExtendedScalar(1.0, 11)


def test_mul_renormalizes():
    assert ExtendedScalar(1.5, 0) * ExtendedScalar(1.5, 0) == ExtendedScalar(1.125, 1)


def test_zero_is_identity():
    a = ExtendedScalar(1.75, -40)
    assert a + ExtendedScalar.zero() == a
    assert (a * ExtendedScalar.zero()).is_zero()


def test_unnormalized_mantissa_rejected():
    with pytest.raises(ValueError):
        ExtendedScalar(2.0, 0)


@pytest.fixture(scope="module")
def big_power():
    exact = mpmath.mpf("1.01") ** 70000
    e = int(mpmath.floor(mpmath.log(exact, 2)))
    return exact / mpmath.mpf(2) ** e, e


def test_large_power_matches_arbitrary_precision(big_power):
    mant, e = big_power
    got = ExtendedScalar.from_float(1.01) ** 70000
    assert e == 1004
    assert got.exponent == 1004
    assert abs(mpmath.mpf(got.mantissa) - mant) / mant < 1e-10


def test_ratio_saturates_out_of_range():
    v, sat = ExtendedScalar(1.0, 5000).ratio(ExtendedScalar(1.0, 0))
    assert sat and v == math.inf
    v, sat = ExtendedScalar(1.5, 3).ratio(ExtendedScalar(1.0, 1))
    assert not sat and v == 6.0


def test_comparison_matches_arbitrary_precision_on_random_pairs():
    rng = np.random.default_rng(11)
    for _ in range(10_000):
        a = ExtendedScalar(float(rng.uniform(1, 2)), int(rng.integers(-3000, 3000)))
        # half the pairs share an exponent so mantissa comparisons are exercised
        eb = a.exponent if rng.random() < 0.5 else int(rng.integers(-3000, 3000))
        b = ExtendedScalar(float(rng.uniform(1, 2)), eb)
        assert (a < b) == (_mp(a) < _mp(b))


@given(ext, ext)
def test_add_commutative(a, b):
    assert a + b == b + a


@given(ext, ext, ext)
def test_add_monotone(a, b, c):
    if a < b or a == b:
        assert not (b + c < a + c)


@given(ext, ext)
@settings(max_examples=300)
def test_add_and_mul_accurate(a, b):
    s = _mp(a + b)
    assert abs(s - (_mp(a) + _mp(b))) <= s * mpmath.mpf(2) ** -50
    p = _mp(a * b)
    assert abs(p - _mp(a) * _mp(b)) <= p * mpmath.mpf(2) ** -50


@given(st.floats(-1e6, 1e6))
def test_from_log2_normalized_and_accurate(lg):
    m, e = ext_from_log2(lg)
    assert 1.0 <= m < 2.0
    assert abs((e + math.log2(m)) - lg) <= 1e-9 * max(1.0, abs(lg))


def test_from_log2_neg_inf_is_zero():
    assert ext_from_log2(-math.inf) == (0.0, 0)


@given(ext, ext)
def test_truncated_subtraction_never_negative(a, b):
    d = a - b
    assert d.is_zero() or d.mantissa >= 1.0
    if b < a:
        assert abs(_mp(d) - (_mp(a) - _mp(b))) <= _mp(a) * mpmath.mpf(2) ** -50
    else:
        assert d.is_zero()
