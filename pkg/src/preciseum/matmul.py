"""Matrix multiplication with tropical-semiring precision estimates.

The inaccuracy of each output element is bounded from below by one of
three estimators (V1, V2, Holder) built from ordinary matrix products of
exponentiated inaccuracy matrices, then combined with the accumulation
rounding allowance.  Because the bound is from below, every digit the
result marks as unreliable is genuinely unreliable.
"""

from __future__ import annotations

import math
from typing import Union

import numpy as np

from . import _kernels
from .array import XArray, parallel_row_blocks
from .errors import ShapeError

NEG_INF = -16384.0
# anything at or below this exponent is indistinguishable from exact
EXACT_THRESHOLD = -15000.0

_HOLDER_P_CHOICES = (32, 16, 8, 4, 2, 1)


class InaccuracyExponentMatrix:
    """2-d matrix of log2 absolute inaccuracies.

    Entry k means the element's absolute error is bounded by 2^k;
    NEG_INF stands in for exactly-known entries and +inf for NaN/Inf
    values.  Stored as plain float64 so ordinary matmuls apply.
    """

    __slots__ = ("exponents",)

    def __init__(self, exponents):
        e = np.asarray(exponents, dtype=np.float64)
        if e.ndim != 2:
            raise ShapeError("inaccuracy exponent matrix must be 2-d")
        self.exponents = e

    @classmethod
    def from_xarray(cls, a: XArray) -> "InaccuracyExponentMatrix":
        if a.ndim != 2:
            raise ShapeError("expected a 2-d array")
        e = _kernels.frexp_exponent(a.values).astype(np.float64)
        k = e - a.bits
        k = np.where(a.exact | (a.values == 0.0), NEG_INF, k)
        k = np.where(np.isfinite(a.values), k, np.inf)
        return cls(k)

    @property
    def shape(self):
        return self.exponents.shape

    def is_exact(self) -> np.ndarray:
        return self.exponents <= EXACT_THRESHOLD


def _as_exponents(m) -> np.ndarray:
    if isinstance(m, InaccuracyExponentMatrix):
        return m.exponents
    return np.asarray(m, dtype=np.float64)


def _check_inner(x: np.ndarray, y: np.ndarray):
    if x.ndim != 2 or y.ndim != 2:
        raise ShapeError("tropical operands must be 2-d")
    if x.shape[1] != y.shape[0]:
        raise ShapeError(f"inner dimensions differ: {x.shape} vs {y.shape}")


def tropical_matmul(x, y) -> np.ndarray:
    """Max-plus product: out_ij = max_l (x_il + y_lj)."""
    x = _as_exponents(x)
    y = _as_exponents(y)
    _check_inner(x, y)
    m, n = x.shape
    k = y.shape[1]
    out = np.full((m, k), -np.inf)
    with np.errstate(invalid="ignore"):
        for l in range(n):
            np.maximum(out, x[:, l : l + 1] + y[l : l + 1, :], out=out)
    return np.maximum(out, NEG_INF)


def _log2_abs(values: np.ndarray) -> np.ndarray:
    """log2 |v| with zero mapped to the exact sentinel and non-finite to +inf."""
    with np.errstate(divide="ignore", invalid="ignore"):
        lg = np.log2(np.abs(values))
    lg = np.where(values == 0.0, NEG_INF, lg)
    return np.where(np.isfinite(values), lg, np.inf)


def mixed_tropical(a_values, a_exp, b_values, b_exp) -> np.ndarray:
    """Exact v2 bound: max_l max(log2|A_il| + b_lj, a_il + log2|B_lj|)."""
    la = _log2_abs(np.asarray(a_values, np.float64))
    lb = _log2_abs(np.asarray(b_values, np.float64))
    side_a = tropical_matmul(la, _as_exponents(b_exp))
    side_b = tropical_matmul(_as_exponents(a_exp), lb)
    return np.maximum(side_a, side_b)


def _exp2(k: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore", under="ignore"):
        return np.exp2(k)


def _log2_est(total: np.ndarray, n: int) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        est = np.log2(total) - math.log2(n)
    return np.where(np.isnan(total), np.inf, est)


def estimate_v1(a_exp, b_exp) -> np.ndarray:
    """Mean-relaxed tropical bound from one ordinary product."""
    x = _as_exponents(a_exp)
    y = _as_exponents(b_exp)
    _check_inner(x, y)
    total = _exp2(x) @ _exp2(y)
    return _log2_est(total, x.shape[1])


def estimate_v2(a_values, a_exp, b_values, b_exp) -> np.ndarray:
    """Value-weighted bound from two ordinary products (the default)."""
    av = np.abs(np.asarray(a_values, np.float64))
    bv = np.abs(np.asarray(b_values, np.float64))
    x = _as_exponents(a_exp)
    y = _as_exponents(b_exp)
    _check_inner(x, y)
    with np.errstate(over="ignore", under="ignore", invalid="ignore"):
        total = np.maximum(av @ _exp2(y), _exp2(x) @ bv)
    return _log2_est(total, x.shape[1])


def select_holder_p(a_values, a_exp, b_values, b_exp) -> int:
    """Largest power-of-two p whose intermediates stay clear of overflow."""
    n = _as_exponents(a_exp).shape[1]
    mags = []
    for vals in (a_values, b_values):
        v = np.asarray(vals, np.float64)
        finite = np.isfinite(v) & (v != 0.0)
        if finite.any():
            mags.append(np.abs(_kernels.frexp_exponent(v)[finite]).max())
    for exp in (a_exp, b_exp):
        k = _as_exponents(exp)
        live = np.isfinite(k) & (k > EXACT_THRESHOLD)
        if live.any():
            mags.append(np.abs(k[live]).max())
    worst = float(max(mags)) if mags else 0.0
    budget = worst + math.log2(max(n, 1)) + 4.0
    for p in _HOLDER_P_CHOICES:
        if p * budget < 1020.0:
            return p
    return 1


def _finite_axis_max(k: np.ndarray, axis: int) -> np.ndarray:
    masked = np.where(np.isfinite(k), k, -np.inf)
    mx = masked.max(axis=axis)
    return np.where(np.isfinite(mx), mx, 0.0)


def _shifted_log_product(left_log2: np.ndarray, right_log2: np.ndarray, n: int) -> np.ndarray:
    """log2 of exp2(left) @ exp2(right), factoring out power-of-two row and
    column maxima so large exponents cannot overflow the intermediates."""
    rshift = _finite_axis_max(left_log2, axis=1)
    cshift = _finite_axis_max(right_log2, axis=0)
    with np.errstate(over="ignore", under="ignore", invalid="ignore", divide="ignore"):
        total = _exp2(left_log2 - rshift[:, None]) @ _exp2(right_log2 - cshift[None, :])
        est = np.log2(total) - math.log2(n) + rshift[:, None] + cshift[None, :]
    return np.where(np.isnan(total), np.inf, est)


def estimate_holder(a_values, a_exp, b_values, b_exp, p: Union[float, str] = "auto") -> np.ndarray:
    """Power-mean sharpening of v2; p = 1 coincides with estimate_v2."""
    if p == "auto":
        p = select_holder_p(a_values, a_exp, b_values, b_exp)
    p = float(p)
    if p < 1.0:
        raise ValueError(f"Holder exponent must be >= 1, got {p}")
    x = _as_exponents(a_exp)
    y = _as_exponents(b_exp)
    _check_inner(x, y)
    la = _log2_abs(np.asarray(a_values, np.float64))
    lb = _log2_abs(np.asarray(b_values, np.float64))
    n = x.shape[1]
    side_a = _shifted_log_product(p * la, p * y, n)
    side_b = _shifted_log_product(p * x, p * lb, n)
    return np.maximum(side_a, side_b) / p


_ESTIMATORS = ("v1", "v2", "holder")


def _estimate(estimator, a: XArray, b: XArray, p) -> np.ndarray:
    a_exp = InaccuracyExponentMatrix.from_xarray(a)
    b_exp = InaccuracyExponentMatrix.from_xarray(b)
    if estimator == "v1":
        return estimate_v1(a_exp, b_exp)
    if estimator == "v2":
        return estimate_v2(a.values, a_exp, b.values, b_exp)
    if estimator == "holder":
        return estimate_holder(a.values, a_exp, b.values, b_exp, p)
    raise ValueError(f"unknown estimator {estimator!r}; expected one of {_ESTIMATORS}")


def matmul(a: XArray, b: XArray, estimator: str = "v2", p: Union[float, str] = "auto") -> XArray:
    """Precision-tracked product of a (m, n) by b (n, k) array."""
    if a.ndim != 2 or b.ndim != 2:
        raise ShapeError("matmul expects 2-d arrays")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"inner dimensions differ: {a.shape} vs {b.shape}")
    if a.shape[1] < 1:
        raise ShapeError("matmul requires inner dimension >= 1")
    if a.format.name != b.format.name:
        raise ShapeError(f"format mismatch: {a.format.name} vs {b.format.name}")
    fmt = a.format
    M = fmt.mantissa_bits
    m, n = a.shape
    k = b.shape[1]
    av, bv = a.values, b.values
    out = np.zeros((m, k))
    rounded = np.zeros((m, k), dtype=bool)

    def work(lo, hi):
        acc = np.zeros((hi - lo, k))
        any_round = np.zeros((hi - lo, k), dtype=bool)
        with np.errstate(all="ignore"):
            for l in range(n):
                p_raw, p_err = _kernels.two_prod(av[lo:hi, l : l + 1], bv[l : l + 1, :])
                term = fmt.round_values(p_raw)
                any_round |= (p_err != 0.0) | (term != p_raw) | ~np.isfinite(p_err)
                s_raw, s_err = _kernels.two_sum(acc, term)
                res = fmt.round_values(s_raw)
                any_round |= (s_err != 0.0) | (res != s_raw) | ~np.isfinite(s_err)
                acc = res
        out[lo:hi] = acc
        rounded[lo:hi] = any_round

    parallel_row_blocks(m, work)

    est = _estimate(estimator, a, b, p)
    with np.errstate(all="ignore"):
        if n > 1:
            round_exp = math.log2(n - 1) + np.log2(_kernels.half_ulp(out, M))
            round_exp = np.where(out == 0.0, -np.inf, round_exp)
        else:
            round_exp = np.full((m, k), -np.inf)
        combined = np.maximum(est, round_exp)
    all_exact = np.logical_and.outer(a.exact.all(axis=1), b.exact.all(axis=0))
    clean = all_exact & ~rounded
    e = _kernels.frexp_exponent(out)
    with np.errstate(invalid="ignore"):
        quant = np.floor(combined + _kernels.NUDGE)
    bits = np.where(
        np.isfinite(combined) & (combined > EXACT_THRESHOLD),
        np.clip(e - quant, 0, M),
        np.where(combined <= EXACT_THRESHOLD, M, 0),
    ).astype(np.int64)
    bits = np.where(clean, M, bits)
    return XArray(out, bits, clean, fmt)
