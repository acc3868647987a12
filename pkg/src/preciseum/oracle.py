"""Independent ground truth: interval propagation and perturbation runs.

The interval layer brackets every reachable real result with directed
rounding (exact residual-sign adjustment for arithmetic, one-ulp outward
widening for transcendentals).  The perturbation layer replays a program
in plain floating arithmetic on sampled inputs and reports per-output
spread, which check_black_bits compares against the library's claims.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from . import scalar as sc
from . import unary
from .array import XArray
from .errors import CapabilityError, ShapeError
from .scalar import XScalar

_INF = math.inf


def _down(v: float) -> float:
    return math.nextafter(v, -_INF)


def _up(v: float) -> float:
    return math.nextafter(v, _INF)


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if math.isnan(self.lo) or math.isnan(self.hi):
            object.__setattr__(self, "lo", -_INF)
            object.__setattr__(self, "hi", _INF)
        elif self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, v: float) -> "Interval":
        return cls(v, v)

    @classmethod
    def of_scalar(cls, x: XScalar) -> "Interval":
        if not math.isfinite(x.value):
            return FULL
        d = x.delta()
        return cls(x.value - d, x.value + d)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, v: float) -> bool:
        return self.lo <= v <= self.hi

    def is_unbounded(self) -> bool:
        return math.isinf(self.lo) or math.isinf(self.hi)


FULL = Interval(-_INF, _INF)


def _sum_lo(a: float, b: float) -> float:
    s, err = _two_sum(a, b)
    if not math.isfinite(s):
        return s if s < 0 else _down(math.inf)
    return s if err >= 0.0 else _down(s)


def _sum_hi(a: float, b: float) -> float:
    s, err = _two_sum(a, b)
    if not math.isfinite(s):
        return s if s > 0 else _up(-math.inf)
    return s if err <= 0.0 else _up(s)


def _two_sum(a: float, b: float) -> Tuple[float, float]:
    s = a + b
    bp = s - a
    err = (a - (s - bp)) + (b - bp)
    if math.isnan(err):
        err = 0.0
    return s, err


def _prod_bounds(a: float, b: float) -> Tuple[float, float]:
    p = a * b
    if not math.isfinite(p):
        return p, p
    exact = Fraction(a) * Fraction(b)
    lo = p if Fraction(p) <= exact else _down(p)
    hi = p if Fraction(p) >= exact else _up(p)
    return lo, hi


def _quot_bounds(a: float, b: float) -> Tuple[float, float]:
    q = a / b
    if not math.isfinite(q):
        return q, q
    exact = Fraction(a) / Fraction(b)
    lo = q if Fraction(q) <= exact else _down(q)
    hi = q if Fraction(q) >= exact else _up(q)
    return lo, hi


def iv_add(x: Interval, y: Interval) -> Interval:
    return Interval(_sum_lo(x.lo, y.lo), _sum_hi(x.hi, y.hi))


def iv_sub(x: Interval, y: Interval) -> Interval:
    return Interval(_sum_lo(x.lo, -y.hi), _sum_hi(x.hi, -y.lo))


def iv_mul(x: Interval, y: Interval) -> Interval:
    if x.is_unbounded() or y.is_unbounded():
        return FULL
    los, his = [], []
    for a in (x.lo, x.hi):
        for b in (y.lo, y.hi):
            lo, hi = _prod_bounds(a, b)
            los.append(lo)
            his.append(hi)
    return Interval(min(los), max(his))


def iv_div(x: Interval, y: Interval) -> Interval:
    if y.contains(0.0) or x.is_unbounded() or y.is_unbounded():
        return FULL
    los, his = [], []
    for a in (x.lo, x.hi):
        for b in (y.lo, y.hi):
            lo, hi = _quot_bounds(a, b)
            los.append(lo)
            his.append(hi)
    return Interval(min(los), max(his))


def iv_min(x: Interval, y: Interval) -> Interval:
    return Interval(min(x.lo, y.lo), min(x.hi, y.hi))


def iv_max(x: Interval, y: Interval) -> Interval:
    return Interval(max(x.lo, y.lo), max(x.hi, y.hi))


def iv_round(mode: str, x: Interval) -> Interval:
    fns = {"floor": math.floor, "ceil": math.ceil, "trunc": math.trunc}
    if mode == "nearest":
        fn = lambda v: float(np.rint(v))
    elif mode in fns:
        fn = lambda v: float(fns[mode](v))
    else:
        raise CapabilityError(f"no interval rule for rounding mode {mode!r}")
    if x.is_unbounded():
        return FULL
    return Interval(fn(x.lo), fn(x.hi))


def _monotone(fn, x: Interval, increasing: bool = True) -> Interval:
    a = float(fn(x.lo))
    b = float(fn(x.hi))
    lo, hi = (a, b) if increasing else (b, a)
    if math.isnan(lo) or math.isnan(hi):
        return FULL
    return Interval(_down(lo), _up(hi))


_SIN_X_LIMIT = 1e8


def _iv_trig(fn, x: Interval, crit_offset: float) -> Interval:
    """sin/cos over an interval: endpoint values plus contained extrema.

    Extrema of sin sit at pi/2 + k*pi (crit_offset pi/2), of cos at k*pi
    (offset 0).  Beyond |x| ~ 1e8 the enumeration is abandoned.
    """
    if x.is_unbounded() or abs(x.lo) > _SIN_X_LIMIT or abs(x.hi) > _SIN_X_LIMIT:
        return Interval(-1.0, 1.0)
    lo = min(fn(x.lo), fn(x.hi))
    hi = max(fn(x.lo), fn(x.hi))
    # extrema sit at crit_offset + k*pi with value +1 for even k, -1 for
    # odd k (both for sin and for cos); widen the k range by a hair since
    # the endpoints themselves are only known to ~1 ulp
    k_lo = math.ceil((x.lo - crit_offset) / math.pi - 1e-9)
    k_hi = math.floor((x.hi - crit_offset) / math.pi + 1e-9)
    for k in range(k_lo, k_hi + 1):
        val = 1.0 if k % 2 == 0 else -1.0
        lo = min(lo, val)
        hi = max(hi, val)
    return Interval(max(_down(lo), -1.0), min(_up(hi), 1.0))


def iv_unary(fn_id: str, x: Interval, param: Optional[float] = None) -> Interval:
    if fn_id == "exp":
        return _monotone(math.exp, x)
    if fn_id == "ln":
        if x.lo <= 0.0:
            return FULL
        return _monotone(math.log, x)
    if fn_id == "sqrt":
        if x.lo < 0.0:
            return FULL
        return _monotone(math.sqrt, x)
    if fn_id == "atan":
        return _monotone(math.atan, x)
    if fn_id == "tanh":
        return _monotone(math.tanh, x)
    if fn_id == "sigmoid":
        return _monotone(lambda v: 1.0 / (1.0 + math.exp(-v)), x)
    if fn_id == "asin":
        if x.lo < -1.0 or x.hi > 1.0:
            return FULL
        return _monotone(math.asin, x)
    if fn_id == "acos":
        if x.lo < -1.0 or x.hi > 1.0:
            return FULL
        return _monotone(math.acos, x, increasing=False)
    if fn_id == "recip":
        if x.contains(0.0):
            return FULL
        return _monotone(lambda v: 1.0 / v, x, increasing=False)
    if fn_id == "sin":
        return _iv_trig(math.sin, x, math.pi / 2.0)
    if fn_id == "cos":
        return _iv_trig(math.cos, x, 0.0)
    if fn_id == "scale":
        a = float(param)
        if a == 0.0:
            return Interval.point(0.0)
        lo1, hi1 = _prod_bounds(x.lo, a)
        lo2, hi2 = _prod_bounds(x.hi, a)
        return Interval(min(lo1, lo2), max(hi1, hi2))
    if fn_id == "add_const":
        a = float(param)
        return Interval(_sum_lo(x.lo, a), _sum_hi(x.hi, a))
    if fn_id == "pow_int":
        n = int(param)
        if n == 0:
            return Interval.point(1.0)
        if n < 0:
            return iv_unary("recip", iv_unary("pow_int", x, -n))
        if x.is_unbounded():
            return FULL
        cands = [x.lo**n, x.hi**n]
        if n % 2 == 0 and x.contains(0.0):
            cands.append(0.0)
        if any(math.isnan(c) for c in cands):
            return FULL
        return Interval(_down(min(cands)), _up(max(cands)))
    raise CapabilityError(f"no interval rule for unary function {fn_id!r}")


# -- replayable scalar programs ---------------------------------------


@dataclass(frozen=True)
class Instr:
    """One SSA step; args index earlier registers (inputs come first)."""

    op: str  # add | sub | mul | div | min | max | round | unary
    args: Tuple[int, ...]
    fn_id: Optional[str] = None
    param: Optional[float] = None
    mode: Optional[str] = None


_BINARY_SCALAR = {
    "add": sc.add,
    "sub": sc.sub,
    "mul": sc.mul,
    "div": sc.div,
    "min": sc.min_op,
    "max": sc.max_op,
}

_BINARY_FLOAT = {
    "add": lambda a, b: a + b,
    "sub": lambda a, b: a - b,
    "mul": lambda a, b: a * b,
    "div": lambda a, b: a / b,
    "min": min,
    "max": max,
}

_BINARY_INTERVAL = {
    "add": iv_add,
    "sub": iv_sub,
    "mul": iv_mul,
    "div": iv_div,
    "min": iv_min,
    "max": iv_max,
}

_ROUND_FLOAT = {
    "floor": math.floor,
    "ceil": math.ceil,
    "trunc": math.trunc,
    "nearest": lambda v: float(np.rint(v)),
}


@dataclass
class ScalarProgram:
    n_inputs: int
    instrs: List[Instr] = field(default_factory=list)
    outputs: Optional[List[int]] = None  # default: last register

    def _output_regs(self) -> List[int]:
        if self.outputs is not None:
            return self.outputs
        return [self.n_inputs + len(self.instrs) - 1]

    def run_float(self, xs: Sequence[float]) -> List[float]:
        regs = [float(v) for v in xs]
        with np.errstate(all="ignore"):
            for ins in self.instrs:
                if ins.op in _BINARY_FLOAT:
                    i, j = ins.args
                    try:
                        r = _BINARY_FLOAT[ins.op](regs[i], regs[j])
                    except ZeroDivisionError:
                        r = math.nan
                elif ins.op == "round":
                    r = float(_ROUND_FLOAT[ins.mode](regs[ins.args[0]]))
                elif ins.op == "unary":
                    desc = unary.by_name(ins.fn_id, ins.param)
                    r = float(np.asarray(desc.value_map(np.asarray([regs[ins.args[0]]])))[0])
                else:
                    raise ValueError(f"unknown op {ins.op!r}")
                regs.append(float(r))
        return [regs[i] for i in self._output_regs()]

    def run_tracked(self, xs: Sequence[XScalar]) -> List[XScalar]:
        regs = list(xs)
        for ins in self.instrs:
            if ins.op in _BINARY_SCALAR:
                i, j = ins.args
                r = _BINARY_SCALAR[ins.op](regs[i], regs[j])
            elif ins.op == "round":
                r = sc.round_op(ins.mode, regs[ins.args[0]])
            elif ins.op == "unary":
                r = sc.apply_unary(unary.by_name(ins.fn_id, ins.param), regs[ins.args[0]])
            else:
                raise ValueError(f"unknown op {ins.op!r}")
            regs.append(r)
        return [regs[i] for i in self._output_regs()]

    def run_interval(self, ivs: Sequence[Interval]) -> List[Interval]:
        regs = list(ivs)
        for ins in self.instrs:
            if ins.op in _BINARY_INTERVAL:
                i, j = ins.args
                r = _BINARY_INTERVAL[ins.op](regs[i], regs[j])
            elif ins.op == "round":
                r = iv_round(ins.mode, regs[ins.args[0]])
            elif ins.op == "unary":
                r = iv_unary(ins.fn_id, regs[ins.args[0]], ins.param)
            else:
                raise CapabilityError(f"no interval rule for op {ins.op!r}")
            regs.append(r)
        return [regs[i] for i in self._output_regs()]

    # uniform replay interface shared with array programs
    def replay(self, values: Sequence[np.ndarray]) -> List[np.ndarray]:
        outs = self.run_float([float(np.asarray(v).reshape(())) for v in values])
        return [np.asarray(o) for o in outs]


def interval_propagate(prog: ScalarProgram, inputs: Sequence[Interval]) -> List[Interval]:
    if len(inputs) != prog.n_inputs:
        raise ShapeError(f"expected {prog.n_inputs} input intervals, got {len(inputs)}")
    return prog.run_interval(list(inputs))


class CallableProgram:
    """Adapter giving any plain-float replay function the program shape
    perturb_run expects."""

    def __init__(self, fn):
        self._fn = fn

    def replay(self, values: Sequence[np.ndarray]) -> List[np.ndarray]:
        out = self._fn(*values)
        if isinstance(out, (list, tuple)):
            return [np.asarray(o) for o in out]
        return [np.asarray(out)]


# -- perturbation sampling --------------------------------------------


@dataclass
class SpreadStats:
    minimum: np.ndarray
    maximum: np.ndarray

    @property
    def width(self) -> np.ndarray:
        return self.maximum - self.minimum


def _input_buffers(inputs):
    vals, deltas = [], []
    for x in inputs:
        if isinstance(x, XScalar):
            vals.append(np.asarray(x.value))
            deltas.append(np.asarray(x.delta()))
        elif isinstance(x, XArray):
            vals.append(x.values)
            deltas.append(x.delta())
        else:
            raise TypeError(f"unsupported input type {type(x).__name__}")
    return vals, deltas


def perturb_run(program, inputs, samples: int, seed: int) -> List[SpreadStats]:
    """Replay in plain floats on endpoint/center/uniform input samples."""
    if samples < 2:
        raise ValueError("samples must be >= 2")
    vals, deltas = _input_buffers(inputs)
    los = [v - d for v, d in zip(vals, deltas)]
    his = [v + d for v, d in zip(vals, deltas)]
    rng = np.random.default_rng(seed)
    stats: Optional[List[SpreadStats]] = None
    for k in range(samples):
        if k == 0:
            draw = los
        elif k == 1:
            draw = his
        elif k == 2:
            draw = vals
        else:
            draw = [
                lo + rng.uniform(size=np.shape(lo)) * (hi - lo)
                for lo, hi in zip(los, his)
            ]
        with np.errstate(all="ignore"):
            outs = program.replay(draw)
        if stats is None:
            stats = [SpreadStats(np.array(o, dtype=float), np.array(o, dtype=float)) for o in outs]
        else:
            for st, o in zip(stats, outs):
                st.minimum = np.minimum(st.minimum, o)
                st.maximum = np.maximum(st.maximum, o)
    return stats


# -- the lower-bound contract -----------------------------------------


@dataclass
class BlackBitReport:
    passed: bool
    checked: int
    informational: int
    violations: List[dict]

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "checked": self.checked,
            "informational": self.informational,
            "violations": self.violations,
        }


def check_black_bits(
    program,
    inputs,
    estimates,
    samples: int = 32,
    seed: int = 0,
    slack: float = 4.0,
    inflate: float = 1.0,
) -> BlackBitReport:
    """PASS iff every estimated inaccuracy is at most slack * observed
    half-width + 1 ulp wherever the perturbation spread is nonzero.

    ``inflate`` scales the estimated inaccuracies; the regression canary
    sets it to 1e6 and must FAIL.
    """
    stats = perturb_run(program, inputs, samples, seed)
    est_list = estimates if isinstance(estimates, (list, tuple)) else [estimates]
    if len(est_list) != len(stats):
        raise ShapeError(f"{len(est_list)} estimates for {len(stats)} program outputs")
    checked = 0
    informational = 0
    violations: List[dict] = []
    for out_idx, (est, st) in enumerate(zip(est_list, stats)):
        if isinstance(est, XScalar):
            d_est = np.asarray(est.delta())
            values = np.asarray(est.value)
        else:
            d_est = est.delta()
            values = est.values
        if d_est.shape != st.width.shape:
            raise ShapeError(
                f"estimate shape {d_est.shape} != sampled output shape {st.width.shape}"
            )
        d_est = d_est * inflate
        half_width = st.width / 2.0
        ulp = np.abs(np.spacing(values))
        flat = np.broadcast_to(half_width, d_est.shape).ravel()
        for i, hw in enumerate(flat):
            de = d_est.ravel()[i]
            if not (hw > 0.0):
                informational += 1
                continue
            checked += 1
            if not np.isfinite(de) or de > slack * hw + ulp.ravel()[i]:
                violations.append(
                    {
                        "output": out_idx,
                        "element": i,
                        "delta_estimate": float(de),
                        "observed_half_width": float(hw),
                    }
                )
    return BlackBitReport(not violations, checked, informational, violations)
