"""Scalar construction, arithmetic propagation and comparison."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from preciseum import (
    BINARY32,
    BINARY64,
    BitsRangeError,
    Comparison,
    XScalar,
    add,
    approx_eq,
    div,
    from_decimal,
    from_exact,
    max_op,
    min_op,
    mul,
    neg,
    round_op,
    sub,
    with_bits,
)


class TestConstruction:
    def test_from_exact_full_bits(self):
        x = from_exact(1.5)
        assert x.exact_bits == 53 and x.exact

    def test_with_bits_plain(self):
        x = with_bits(1.5, 20)
        assert x.exact_bits == 20 and not x.exact

    def test_bits_out_of_range(self):
        with pytest.raises(BitsRangeError):
            with_bits(1.5, 54)
        with pytest.raises(BitsRangeError):
            with_bits(1.5, -1)

    def test_nan_and_inf_carry_no_bits(self):
        assert XScalar(math.nan, 40).exact_bits == 0
        assert XScalar(math.inf, 40).exact_bits == 0
        assert not XScalar(math.inf, 40).exact

    def test_zero_is_exact(self):
        x = XScalar(0.0, 3)
        assert x.exact and x.exact_bits == 53 and x.delta() == 0.0

    def test_narrow_format_rounds_value(self):
        x = from_exact(0.1, BINARY32)
        assert x.value == float(np.float32(0.1))
        assert x.exact_bits == 24

    def test_from_decimal_exact_when_representable(self):
        assert from_decimal("0.5").exact
        assert from_decimal("3").exact

    def test_from_decimal_inexact_loses_last_bit(self):
        x = from_decimal("0.1")
        assert not x.exact and x.exact_bits == 52

    def test_from_decimal_rejects_junk(self):
        with pytest.raises(ValueError):
            from_decimal("zebra")
        with pytest.raises(ValueError):
            from_decimal("nan")

    def test_delta_magnitude(self):
        x = with_bits(6.0, 2)
        # binary exponent of 6.0 is 3, so two exact bits leave 2^1
        assert x.delta() == 2.0
        assert x.inaccuracy_exponent() == 1.0


class TestArithmetic:
    def test_exact_add_stays_exact(self):
        r = add(from_exact(0.25), from_exact(0.5))
        assert r.value == 0.75 and r.exact

    def test_exact_add_with_rounding_stays_exact(self):
        # the stored sum is the only information either operand ever had
        r = add(from_exact(0.1), from_exact(0.2))
        assert r.exact and r.exact_bits == 53

    def test_cancellation_destroys_bits(self):
        a = with_bits(1.0, 30)
        b = with_bits(1.0 + 2.0**-20, 30)
        r = sub(b, a)
        assert r.value == 2.0**-20
        assert r.exact_bits == 9

    def test_mul_coarse_inputs(self):
        x = with_bits(6.0, 2)
        r = mul(x, x)
        assert r.value == 36.0 and r.exact_bits == 2

    def test_mul_by_exact_power_of_two_preserves_bits(self):
        r = mul(with_bits(7.5, 17), from_exact(2.0))
        assert r.value == 15.0 and r.exact_bits == 17

    def test_div_by_exact_one_preserves_bits(self):
        r = div(with_bits(7.5, 17), from_exact(1.0))
        assert r.value == 7.5 and r.exact_bits == 17

    def test_div_inverse_of_coarse(self):
        r = div(from_exact(1.0), with_bits(3.0, 10))
        assert r.value == 1.0 / 3.0 and r.exact_bits == 11

    def test_div_by_zero(self):
        r = div(from_exact(1.0), from_exact(0.0))
        assert math.isinf(r.value) and r.exact_bits == 0

    def test_div_by_straddling_zero(self):
        # divisor interval contains zero: no result digit survives
        r = div(from_exact(1.0), with_bits(2.0**-40, 1))
        assert r.exact_bits == 0

    def test_min_coarse_overlap(self):
        r = min_op(with_bits(1.0, 2), with_bits(1.5, 1))
        assert r.value == 1.0 and r.exact_bits == 1

    def test_max_disjoint_keeps_winner_bits(self):
        r = max_op(with_bits(1.0, 40), with_bits(100.0, 12))
        assert r.value == 100.0 and r.exact_bits == 12

    def test_neg_preserves_tracking(self):
        x = with_bits(2.5, 19)
        r = neg(x)
        assert r.value == -2.5 and r.exact_bits == 19 and not r.exact

    def test_format_mismatch_rejected(self):
        with pytest.raises(ValueError):
            add(from_exact(1.0), from_exact(1.0, BINARY32))


class TestRounding:
    def test_floor_of_well_known_value_is_exact(self):
        r = round_op("floor", with_bits(2.75, 30))
        assert r.value == 2.0 and r.exact

    def test_floor_of_coarse_value_keeps_uncertainty(self):
        r = round_op("floor", with_bits(2.75, 2))
        assert r.value == 2.0 and r.exact_bits == 2 and not r.exact

    def test_modes(self):
        x = with_bits(-1.5, 40)
        assert round_op("ceil", x).value == -1.0
        assert round_op("trunc", x).value == -1.0
        assert round_op("floor", x).value == -2.0

    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            round_op("stochastic", from_exact(1.0))


class TestApproxEq:
    def test_exact_equal(self):
        assert approx_eq(from_exact(1.25), from_exact(1.25)) is Comparison.EQUAL

    def test_overlapping_uncertainty(self):
        a = with_bits(1.0, 10)
        b = with_bits(1.0005, 10)
        assert approx_eq(a, b) is Comparison.INDISTINGUISHABLE

    def test_clearly_different(self):
        assert approx_eq(from_exact(1.0), from_exact(2.0)) is Comparison.UNEQUAL

    def test_infinities(self):
        inf = XScalar(math.inf, 0)
        assert approx_eq(inf, inf) is Comparison.INDISTINGUISHABLE
        assert approx_eq(inf, XScalar(-math.inf, 0)) is Comparison.UNEQUAL

    def test_nan_compares_unequal(self):
        assert approx_eq(XScalar(math.nan, 0), XScalar(math.nan, 0)) is Comparison.UNEQUAL


finite = st.floats(allow_nan=False, allow_infinity=False, min_value=-1e12, max_value=1e12)
bit_counts = st.integers(min_value=1, max_value=53)


@settings(max_examples=200, deadline=None)
@given(finite, bit_counts, finite, bit_counts)
def test_binary_results_stay_in_range(v1, b1, v2, b2):
    x, y = with_bits(v1, b1), with_bits(v2, b2)
    for op in (add, sub, mul, div, min_op, max_op):
        r = op(x, y)
        assert 0 <= r.exact_bits <= 53
        if r.exact:
            assert r.exact_bits == 53


@settings(max_examples=200, deadline=None)
@given(finite, bit_counts)
def test_result_bits_never_exceed_input_claim_inflation(v, b):
    # a tracked value can never report a tighter inaccuracy than the
    # half-ulp floor of its own magnitude allows
    x = with_bits(v, b)
    if x.value != 0.0 and not x.exact:
        assert x.delta() >= abs(x.value) * 2.0**-53
