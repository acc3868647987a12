"""Vectorized precision-propagation kernels.

Every rule operates on parallel numpy buffers: ``v`` (float64 values),
``s`` (int64 exact-bit counts) and ``x`` (bool, True when the absolute
error is exactly zero).  Scalar and array front ends both call these, so
the elementwise/scalar coherence law holds by construction.

Quantization convention: converting an internal error magnitude ``d``
back to a bit count uses ``floor(log2(d) + NUDGE)``.  The floor keeps the
reported inaccuracy a from-below estimate (digits marked unreliable are
genuinely unreliable); the nudge swallows float fuzz so that dominated
terms such as the 2^-53 rounding charge cannot eat a whole bit.
"""

from __future__ import annotations

import numpy as np

from .formats import FloatFormat

NUDGE = 1e-9
_SPLITTER = 134217729.0  # 2**27 + 1, Dekker/Veltkamp split for binary64


def frexp_exponent(v: np.ndarray) -> np.ndarray:
    """Binary exponent with mantissa normalized to [0.5, 1)."""
    _, e = np.frexp(v)
    return e.astype(np.int64)


def half_ulp(v: np.ndarray, M: int) -> np.ndarray:
    """Half a unit in the last place of each finite nonzero value."""
    e = frexp_exponent(v)
    out = np.ldexp(1.0, (e - (M + 1)).astype(np.int32))
    return np.where(np.isfinite(v) & (v != 0.0), out, 0.0)


def delta(v: np.ndarray, s: np.ndarray, x: np.ndarray, M: int) -> np.ndarray:
    """Absolute inaccuracy magnitude 2^(e - s); 0 for exact, inf for NaN/Inf."""
    v = np.asarray(v, dtype=np.float64)
    e = frexp_exponent(v)
    with np.errstate(over="ignore"):
        mag = np.ldexp(1.0, np.clip(e - s, -1100, 1100).astype(np.int32))
    out = np.where(x | (v == 0.0), 0.0, mag)
    return np.where(np.isfinite(v), out, np.inf)


def rel_delta(s: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Relative inaccuracy 2^-s, or 0 for exact operands."""
    return np.where(x, 0.0, np.ldexp(1.0, -np.asarray(s, dtype=np.int64).astype(np.int32)))


def _floor_log2_nudged(d: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.floor(np.log2(d) + NUDGE)


def bits_from_delta(v_res, d, M: int):
    """Convert an absolute error bound to (bits, exact) under the zero and
    special-value invariants."""
    v_res = np.asarray(v_res, dtype=np.float64)
    d = np.asarray(d, dtype=np.float64)
    e = frexp_exponent(v_res)
    k = _floor_log2_nudged(np.where(d > 0, d, 1.0))
    bits = np.clip(e - k, 0, M).astype(np.int64)
    bits = np.where(d == 0.0, M, bits)
    bits = np.where(v_res == 0.0, M, bits)
    bits = np.where(~np.isfinite(v_res) | ~np.isfinite(d), 0, bits)
    exact = (d == 0.0) | (v_res == 0.0)
    exact &= np.isfinite(v_res)
    return bits, exact


def bits_from_rel_delta(v_res, rel, M: int):
    """Convert a relative error bound to (bits, exact)."""
    v_res = np.asarray(v_res, dtype=np.float64)
    rel = np.asarray(rel, dtype=np.float64)
    # from-below direction: 2^-bits must not exceed the relative bound,
    # so round the bit count up after shaving float fuzz
    with np.errstate(divide="ignore", invalid="ignore"):
        raw = np.ceil(-np.log2(np.where(rel > 0, rel, 1.0)) - NUDGE)
    bits = np.clip(raw, 0, M).astype(np.int64)
    bits = np.where(rel == 0.0, M, bits)
    bits = np.where(v_res == 0.0, M, bits)
    bits = np.where(~np.isfinite(v_res) | ~np.isfinite(rel), 0, bits)
    exact = (rel == 0.0) | (v_res == 0.0)
    exact &= np.isfinite(v_res)
    return bits, exact


def two_sum(a: np.ndarray, b: np.ndarray):
    """Knuth branch-free exact sum: a + b = fl(a+b) + err."""
    s = a + b
    bp = s - a
    err = (a - (s - bp)) + (b - bp)
    return s, err


def _split(a: np.ndarray):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def two_prod(a: np.ndarray, b: np.ndarray):
    """Dekker exact product: a * b = fl(a*b) + err (err NaN on overflow)."""
    p = a * b
    ahi, alo = _split(a)
    bhi, blo = _split(b)
    err = ((ahi * bhi - p) + ahi * blo + alo * bhi) + alo * blo
    return p, err


def _finalize(res, bits, exact, M: int):
    nonfinite = ~np.isfinite(res)
    bits = np.where(nonfinite, 0, bits)
    exact = exact & ~nonfinite
    bits = np.where(np.isfinite(res) & (res == 0.0), M, bits)
    exact = exact | (np.isfinite(res) & (res == 0.0))
    return res, bits.astype(np.int64), exact


def add(v1, s1, x1, v2, s2, x2, fmt: FloatFormat, negate_second=False):
    M = fmt.mantissa_bits
    if negate_second:
        v2 = -np.asarray(v2, dtype=np.float64)
    with np.errstate(all="ignore"):
        raw, err = two_sum(np.asarray(v1, np.float64), np.asarray(v2, np.float64))
        res = fmt.round_values(raw)
        inexact = (err != 0.0) | (res != raw) | ~np.isfinite(err)
        # with both operands exact the IEEE result is the tracked object
        # itself, so its rounding is not an error
        inexact &= ~(np.asarray(x1, bool) & np.asarray(x2, bool))
        d = delta(v1, s1, x1, M) + delta(v2, s2, x2, M)
        d = d + np.where(inexact, half_ulp(res, M), 0.0)
    bits, exact = bits_from_delta(res, d, M)
    return _finalize(res, bits, exact, M)


def sub(v1, s1, x1, v2, s2, x2, fmt: FloatFormat):
    return add(v1, s1, x1, v2, s2, x2, fmt, negate_second=True)


def mul(v1, s1, x1, v2, s2, x2, fmt: FloatFormat):
    M = fmt.mantissa_bits
    v1 = np.asarray(v1, np.float64)
    v2 = np.asarray(v2, np.float64)
    with np.errstate(all="ignore"):
        raw, err = two_prod(v1, v2)
        res = fmt.round_values(raw)
        inexact = (err != 0.0) | (res != raw) | ~np.isfinite(err)
        inexact &= ~(np.asarray(x1, bool) & np.asarray(x2, bool))
        d1 = delta(v1, s1, x1, M)
        d2 = delta(v2, s2, x2, M)
        # exact corner bound: |(x+dx)(y+dy) - xy| = |x|dy + |y|dx + dx dy
        d = np.abs(v1) * d2 + np.abs(v2) * d1 + d1 * d2
        d = d + np.where(inexact, half_ulp(res, M), 0.0)
    bits, exact = bits_from_delta(res, d, M)
    return _finalize(res, bits, exact, M)


def div(v1, s1, x1, v2, s2, x2, fmt: FloatFormat):
    M = fmt.mantissa_bits
    v1 = np.asarray(v1, np.float64)
    v2 = np.asarray(v2, np.float64)
    with np.errstate(all="ignore"):
        raw = v1 / v2
        res = fmt.round_values(raw)
        # quotient is exact iff res * v2 reconstructs v1 exactly
        p, perr = two_prod(raw, v2)
        inexact = (p != v1) | (perr != 0.0) | (res != raw) | ~np.isfinite(p)
        inexact &= ~(np.asarray(x1, bool) & np.asarray(x2, bool))
        d1 = delta(v1, s1, x1, M)
        d2 = delta(v2, s2, x2, M)
        # worst corner (x+dx)/(y-dy); a divisor straddling zero loses all bits
        denom = np.abs(v2) - d2
        d = np.where(
            denom > 0.0,
            (np.abs(v2) * d1 + np.abs(v1) * d2) / (np.abs(v2) * denom),
            np.inf,
        )
        d = d + np.where(inexact, half_ulp(res, M), 0.0)
    bits, exact = bits_from_delta(res, d, M)
    return _finalize(res, bits, exact, M)


def _minmax(v1, s1, x1, v2, s2, x2, fmt: FloatFormat, take_max: bool):
    M = fmt.mantissa_bits
    v1 = np.asarray(v1, np.float64)
    v2 = np.asarray(v2, np.float64)
    res = np.maximum(v1, v2) if take_max else np.minimum(v1, v2)
    d1 = delta(v1, s1, x1, M)
    d2 = delta(v2, s2, x2, M)
    with np.errstate(invalid="ignore"):
        disjoint = ((v1 + d1) < (v2 - d2)) | ((v2 + d2) < (v1 - d1))
        first_wins = (res == v1)
    win_s = np.where(first_wins, s1, s2)
    win_x = np.where(first_wins, x1, x2)
    d = np.maximum(d1, d2)
    ov_bits, ov_exact = bits_from_delta(res, d, M)
    bits = np.where(disjoint, win_s, ov_bits)
    exact = np.where(disjoint, win_x, ov_exact)
    return _finalize(res, bits, exact, M)


def min_op(v1, s1, x1, v2, s2, x2, fmt: FloatFormat):
    return _minmax(v1, s1, x1, v2, s2, x2, fmt, take_max=False)


def max_op(v1, s1, x1, v2, s2, x2, fmt: FloatFormat):
    return _minmax(v1, s1, x1, v2, s2, x2, fmt, take_max=True)


_ROUND_FNS = {
    "floor": np.floor,
    "ceil": np.ceil,
    "nearest": np.rint,
    "trunc": np.trunc,
}


def _highest_changed_bit(a: float, b: float) -> int:
    """Power-of-two weight of the highest bit where |a| and |b| differ."""
    n1, d1 = abs(a).as_integer_ratio()
    n2, d2 = abs(b).as_integer_ratio()
    # common scale 2^-w with w = max bit shift of the denominators
    w1 = d1.bit_length() - 1
    w2 = d2.bit_length() - 1
    w = max(w1, w2)
    z = (n1 << (w - w1)) ^ (n2 << (w - w2))
    return z.bit_length() - 1 - w


def round_op(mode: str, v, s, x, fmt: FloatFormat):
    if mode not in _ROUND_FNS:
        raise ValueError(f"unknown rounding mode: {mode!r}")
    M = fmt.mantissa_bits
    v = np.atleast_1d(np.asarray(v, np.float64))
    s = np.atleast_1d(np.asarray(s, np.int64))
    x = np.atleast_1d(np.asarray(x, bool))
    res = fmt.round_values(_ROUND_FNS[mode](v))
    bits = s.copy()
    exact = x.copy()
    e = frexp_exponent(v)
    changed = np.isfinite(v) & (res != v)
    for i in np.argwhere(changed)[:, 0]:
        if res[i] == 0.0:
            continue  # zero rule applied in _finalize
        p_changed = _highest_changed_bit(float(v[i]), float(res[i]))
        if x[i]:
            p_inexact = None  # exact argument: rounding is exactly known
        else:
            p_inexact = int(e[i]) - int(s[i]) - 1
        if p_inexact is None or p_inexact < p_changed:
            bits[i] = M
            exact[i] = True
        # else: bits unchanged
    return _finalize(res, bits, exact, M)


def apply_unary(desc, v, s, x, fmt: FloatFormat):
    """Condition-number rule: bits_out = s - ceil(log2 max(C,1)) - rounding."""
    M = fmt.mantissa_bits
    v = np.asarray(v, np.float64)
    with np.errstate(all="ignore"):
        raw = desc.value_map(v)
        res = fmt.round_values(np.asarray(raw, np.float64))
        cond = np.asarray(desc.condition_number(v), np.float64)
        cond = np.maximum(cond, 1.0)
        extra = np.ceil(np.log2(cond) - NUDGE)
        if desc.exact_arith:
            rerr = desc.residual(v, res)
            charge = np.where((rerr != 0.0) | ~np.isfinite(rerr), 1, 0)
        else:
            charge = np.ones_like(v, dtype=np.int64)
    ok = np.isfinite(cond)
    bits = np.where(ok, np.clip(s - np.where(ok, extra, 0) - charge, 0, M), 0)
    exact = x & ok & np.equal(charge, 0) & (extra <= 0)
    bits = np.where(exact, M, bits)
    return _finalize(res, bits, exact, M)
