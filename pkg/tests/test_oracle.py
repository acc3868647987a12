"""Interval brackets, perturbation replay and the contract checker."""

import math

import numpy as np
import pytest

from preciseum import CapabilityError, ShapeError, with_bits
from preciseum.oracle import (
    FULL,
    CallableProgram,
    Instr,
    Interval,
    ScalarProgram,
    check_black_bits,
    interval_propagate,
    iv_add,
    iv_div,
    iv_max,
    iv_min,
    iv_mul,
    iv_sub,
    iv_unary,
    perturb_run,
)

from helpers import random_scalar_program


class TestInterval:
    def test_nan_endpoints_widen_to_full(self):
        iv = Interval(math.nan, 1.0)
        assert iv.lo == -math.inf and iv.hi == math.inf

    def test_inverted_endpoints_rejected(self):
        with pytest.raises(ValueError):
            Interval(2.0, 1.0)

    def test_of_scalar_brackets_value(self):
        x = with_bits(3.0, 10)
        iv = Interval.of_scalar(x)
        assert iv.lo <= 3.0 <= iv.hi
        assert iv.width == pytest.approx(2.0 * x.delta())

    def test_binary_containment_on_sampled_points(self):
        rng = np.random.default_rng(14)
        ops = {
            "add": (iv_add, lambda a, b: a + b),
            "sub": (iv_sub, lambda a, b: a - b),
            "mul": (iv_mul, lambda a, b: a * b),
            "div": (iv_div, lambda a, b: a / b),
            "min": (iv_min, min),
            "max": (iv_max, max),
        }
        for _ in range(500):
            lo1 = rng.normal() * 4.0
            lo2 = rng.normal() * 4.0
            x = Interval(lo1, lo1 + abs(rng.normal()))
            y = Interval(lo2, lo2 + abs(rng.normal()))
            for name, (iv_op, f_op) in ops.items():
                if name == "div" and y.contains(0.0):
                    continue
                out = iv_op(x, y)
                for _ in range(8):
                    a = x.lo + rng.random() * x.width
                    b = y.lo + rng.random() * y.width
                    assert out.contains(f_op(a, b)), (name, a, b)

    def test_div_straddling_zero_is_full(self):
        assert iv_div(Interval(1.0, 2.0), Interval(-1.0, 1.0)) is FULL

    def test_monotone_unary_containment(self):
        rng = np.random.default_rng(15)
        fns = {
            "exp": math.exp,
            "atan": math.atan,
            "tanh": math.tanh,
            "sigmoid": lambda v: 1.0 / (1.0 + math.exp(-v)),
        }
        for _ in range(200):
            lo = rng.normal() * 3.0
            x = Interval(lo, lo + abs(rng.normal()))
            for name, f in fns.items():
                out = iv_unary(name, x)
                for _ in range(8):
                    v = x.lo + rng.random() * x.width
                    assert out.contains(f(v))

    def test_sin_interval_includes_interior_extremum(self):
        out = iv_unary("sin", Interval(1.0, 5.0))
        # 3*pi/2 lies inside, so the true minimum -1 must be bracketed
        assert out.contains(-1.0) and out.contains(math.sin(1.0))

    def test_cos_interval_over_small_range(self):
        out = iv_unary("cos", Interval(0.1, 0.2))
        assert out.contains(math.cos(0.15))
        assert out.width < 0.2

    def test_domain_violations_widen_to_full(self):
        assert iv_unary("ln", Interval(-1.0, 1.0)) is FULL
        assert iv_unary("sqrt", Interval(-1.0, 1.0)) is FULL
        assert iv_unary("asin", Interval(0.5, 1.5)) is FULL

    def test_unknown_unary(self):
        with pytest.raises(CapabilityError):
            iv_unary("erf", Interval(0.0, 1.0))


class TestScalarProgram:
    def _sample(self):
        prog = ScalarProgram(
            2,
            [
                Instr("mul", (0, 1)),
                Instr("unary", (2,), fn_id="sqrt"),
                Instr("add", (3, 1)),
            ],
        )
        return prog

    def test_float_replay(self):
        prog = self._sample()
        (out,) = prog.run_float([4.0, 9.0])
        assert out == math.sqrt(36.0) + 9.0

    def test_tracked_and_interval_agree_with_float(self):
        prog = self._sample()
        xs = [with_bits(4.0, 30), with_bits(9.0, 25)]
        (tracked,) = prog.run_tracked(xs)
        (f,) = prog.run_float([4.0, 9.0])
        assert tracked.value == f
        (iv,) = interval_propagate(prog, [Interval.of_scalar(x) for x in xs])
        assert iv.contains(f)

    def test_tracked_value_inside_interval_for_random_programs(self):
        rng = np.random.default_rng(16)
        for _ in range(50):
            prog, inputs = random_scalar_program(rng)
            (tracked,) = prog.run_tracked(inputs)
            (iv,) = prog.run_interval([Interval.of_scalar(x) for x in inputs])
            if math.isfinite(tracked.value):
                assert iv.contains(tracked.value)

    def test_input_count_checked(self):
        with pytest.raises(ShapeError):
            interval_propagate(self._sample(), [FULL])


class TestPerturbation:
    def test_reproducible_with_seed(self):
        rng = np.random.default_rng(17)
        prog, inputs = random_scalar_program(rng)
        a = perturb_run(prog, inputs, samples=16, seed=5)
        b = perturb_run(prog, inputs, samples=16, seed=5)
        assert np.array_equal(a[0].minimum, b[0].minimum)
        assert np.array_equal(a[0].maximum, b[0].maximum)

    def test_requires_two_samples(self):
        prog = ScalarProgram(1, [Instr("add", (0, 0))])
        with pytest.raises(ValueError):
            perturb_run(prog, [with_bits(1.0, 10)], samples=1, seed=0)

    def test_callable_program_adapter(self):
        prog = CallableProgram(lambda a, b: a * b)
        outs = prog.replay([np.asarray(3.0), np.asarray(4.0)])
        assert outs[0] == 12.0


class TestChecker:
    def test_passes_on_simple_case(self):
        rng = np.random.default_rng(18)
        prog, inputs = random_scalar_program(rng)
        (est,) = prog.run_tracked(inputs)
        report = check_black_bits(prog, inputs, [est], samples=32, seed=0)
        assert report.passed

    def test_inflated_estimates_fail(self):
        rng = np.random.default_rng(19)
        prog, inputs = random_scalar_program(rng)
        (est,) = prog.run_tracked(inputs)
        report = check_black_bits(prog, inputs, [est], samples=32, seed=0, inflate=1e6)
        assert not report.passed and report.violations

    def test_report_serializes(self):
        rng = np.random.default_rng(20)
        prog, inputs = random_scalar_program(rng)
        (est,) = prog.run_tracked(inputs)
        d = check_black_bits(prog, inputs, [est]).to_dict()
        assert set(d) == {"passed", "checked", "informational", "violations"}

    def test_estimate_count_checked(self):
        prog = ScalarProgram(1, [Instr("add", (0, 0))])
        x = with_bits(1.0, 10)
        (est,) = prog.run_tracked([x])
        with pytest.raises(ShapeError):
            check_black_bits(prog, [x], [est, est])
