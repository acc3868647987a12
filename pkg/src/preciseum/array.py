"""N-dimensional arrays of extended floats.

Parallel buffers hold values, exact-bit counts and the exact-error flags.
Arrays are immutable after construction; reductions accumulate in a fixed
left-to-right order over the reduced axis so results are bit-identical
regardless of the worker-thread count (threads only ever partition the
independent output elements).
"""

from __future__ import annotations

import struct
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence, Union

import numpy as np

from . import _kernels, unary
from .errors import AxisError, BitsRangeError, SerializationError, ShapeError
from .formats import BINARY64, FORMATS_BY_CODE, FloatFormat
from .scalar import XScalar

MAX_RANK = 8
MAX_EXTENT = 1 << 48
_MAGIC = b"XARR1"

_num_threads = 1


def set_num_threads(n: int) -> None:
    """Worker threads used for the independent-output parts of matmul and
    reductions.  Any value produces bit-identical results."""
    global _num_threads
    if n < 1:
        raise ValueError("thread count must be >= 1")
    _num_threads = n


def get_num_threads() -> int:
    return _num_threads


def parallel_row_blocks(n_rows: int, work):
    """Run ``work(lo, hi)`` over a deterministic partition of row indices."""
    w = min(get_num_threads(), max(n_rows, 1))
    if w <= 1 or n_rows < 2:
        work(0, n_rows)
        return
    bounds = np.linspace(0, n_rows, w + 1).astype(int)
    with ThreadPoolExecutor(max_workers=w) as pool:
        futures = [
            pool.submit(work, int(lo), int(hi))
            for lo, hi in zip(bounds[:-1], bounds[1:])
            if hi > lo
        ]
        for f in futures:
            f.result()


class XArray:
    __slots__ = ("values", "bits", "exact", "format")

    def __init__(self, values, bits, exact=None, format: FloatFormat = BINARY64):
        # np.array rather than ascontiguousarray: the latter promotes
        # rank-0 inputs to rank 1
        v = np.array(values, dtype=np.float64, order="C")
        if v.ndim > MAX_RANK:
            raise ShapeError(f"rank {v.ndim} exceeds limit {MAX_RANK}")
        if any(ext > MAX_EXTENT for ext in v.shape):
            raise ShapeError("extent exceeds 2**48")
        b = np.array(np.broadcast_to(np.asarray(bits, dtype=np.int64), v.shape), order="C")
        if exact is None:
            exact = np.zeros(v.shape, dtype=bool)
        x = np.array(np.broadcast_to(np.asarray(exact, dtype=bool), v.shape), order="C")
        M = format.mantissa_bits
        if b.size and (b.min() < 0 or b.max() > M):
            raise BitsRangeError(f"exact bits outside [0, {M}]")
        v = format.round_values(v)
        nonfinite = ~np.isfinite(v)
        b[nonfinite] = 0
        x[nonfinite] = False
        zero = np.isfinite(v) & (v == 0.0)
        b[zero] = M
        x[zero] = True
        b[x] = M
        v.flags.writeable = False
        b.flags.writeable = False
        x.flags.writeable = False
        self.values = v
        self.bits = b
        self.exact = x
        self.format = format

    # -- construction -------------------------------------------------

    @classmethod
    def from_exact(cls, values, format: FloatFormat = BINARY64) -> "XArray":
        v = np.asarray(values, dtype=np.float64)
        return cls(v, np.full(v.shape, format.mantissa_bits), np.ones(v.shape, bool), format)

    @classmethod
    def with_bits(cls, values, bits, format: FloatFormat = BINARY64) -> "XArray":
        return cls(values, bits, None, format)

    @classmethod
    def from_scalars(cls, scalars: Sequence[XScalar]) -> "XArray":
        fmt = scalars[0].format if scalars else BINARY64
        return cls(
            [s.value for s in scalars],
            [s.exact_bits for s in scalars],
            [s.exact for s in scalars],
            fmt,
        )

    # -- basics -------------------------------------------------------

    @property
    def shape(self):
        return self.values.shape

    @property
    def ndim(self):
        return self.values.ndim

    @property
    def size(self):
        return self.values.size

    def item(self, *idx) -> XScalar:
        i = idx if idx else ()
        return XScalar(
            float(self.values[i]), int(self.bits[i]), bool(self.exact[i]), self.format
        )

    def scalars(self):
        flat_v = self.values.ravel()
        flat_b = self.bits.ravel()
        flat_x = self.exact.ravel()
        return [
            XScalar(float(flat_v[i]), int(flat_b[i]), bool(flat_x[i]), self.format)
            for i in range(flat_v.size)
        ]

    def transpose(self, axes=None) -> "XArray":
        return XArray(
            self.values.transpose(axes),
            self.bits.transpose(axes),
            self.exact.transpose(axes),
            self.format,
        )

    @property
    def T(self) -> "XArray":
        return self.transpose()

    def reshape(self, shape) -> "XArray":
        return XArray(
            self.values.reshape(shape),
            self.bits.reshape(shape),
            self.exact.reshape(shape),
            self.format,
        )

    def delta(self) -> np.ndarray:
        return _kernels.delta(self.values, self.bits, self.exact, self.format.mantissa_bits)

    def __repr__(self):
        return f"XArray(shape={self.shape}, format={self.format.name})"


_BINARY_KERNELS = {
    "add": _kernels.add,
    "sub": _kernels.sub,
    "mul": _kernels.mul,
    "div": _kernels.div,
    "min": _kernels.min_op,
    "max": _kernels.max_op,
}


def _check_same_format(a: XArray, b: XArray):
    if a.format.name != b.format.name:
        raise ShapeError(f"format mismatch: {a.format.name} vs {b.format.name}")


def _broadcast(a: XArray, b: XArray):
    try:
        shape = np.broadcast_shapes(a.shape, b.shape)
    except ValueError as err:
        raise ShapeError(f"cannot broadcast {a.shape} with {b.shape}") from err
    return (
        np.broadcast_to(a.values, shape),
        np.broadcast_to(a.bits, shape),
        np.broadcast_to(a.exact, shape),
        np.broadcast_to(b.values, shape),
        np.broadcast_to(b.bits, shape),
        np.broadcast_to(b.exact, shape),
    )


def map_binary(op: str, a: XArray, b: XArray) -> XArray:
    if op not in _BINARY_KERNELS:
        raise ValueError(f"unknown binary op: {op!r}")
    _check_same_format(a, b)
    v1, s1, x1, v2, s2, x2 = _broadcast(a, b)
    res, bits, exact = _BINARY_KERNELS[op](v1, s1, x1, v2, s2, x2, a.format)
    return XArray(res, bits, exact, a.format)


def map_unary(f: unary.UnaryFnDescriptor, a: XArray) -> XArray:
    res, bits, exact = _kernels.apply_unary(f, a.values, a.bits, a.exact, a.format)
    return XArray(res, bits, exact, a.format)


def round_array(mode: str, a: XArray) -> XArray:
    res, bits, exact = _kernels.round_op(
        mode, a.values.ravel(), a.bits.ravel(), a.exact.ravel(), a.format
    )
    return XArray(res.reshape(a.shape), bits.reshape(a.shape), exact.reshape(a.shape), a.format)


def _move_axis_last(a: XArray, axis: Optional[int]):
    if axis is None:
        return (
            a.values.reshape(1, -1) if a.size else a.values.reshape(1, 0),
            a.bits.reshape(1, -1),
            a.exact.reshape(1, -1),
            (),
        )
    if not -a.ndim <= axis < a.ndim:
        raise AxisError(f"axis {axis} out of range for rank {a.ndim}")
    axis %= a.ndim
    v = np.moveaxis(a.values, axis, -1)
    out_shape = v.shape[:-1]
    n = v.shape[-1]
    return (
        v.reshape(-1, n),
        np.moveaxis(a.bits, axis, -1).reshape(-1, n),
        np.moveaxis(a.exact, axis, -1).reshape(-1, n),
        out_shape,
    )


def sum_reduce(a: XArray, axis: Optional[int] = None) -> XArray:
    """Fixed-order sum with one atomic inaccuracy estimate per output."""
    fmt = a.format
    M = fmt.mantissa_bits
    v2d, s2d, x2d, out_shape = _move_axis_last(a, axis)
    rows, n = v2d.shape
    acc = np.zeros(rows)
    d_acc = np.zeros(rows)
    rounding_steps = np.zeros(rows)
    max_abs = np.zeros(rows)
    all_exact = np.ones(rows, dtype=bool)

    def work(lo, hi):
        sl = slice(lo, hi)
        with np.errstate(all="ignore"):
            for i in range(n):
                vi = v2d[sl, i]
                raw, err = _kernels.two_sum(acc[sl], vi)
                res = fmt.round_values(raw)
                inexact = (err != 0.0) | (res != raw) | ~np.isfinite(err)
                rounding_steps[sl] += inexact
                acc[sl] = res
                d_acc[sl] += _kernels.delta(vi, s2d[sl, i], x2d[sl, i], M)
                all_exact[sl] &= x2d[sl, i]
                np.maximum(max_abs[sl], np.abs(res), out=max_abs[sl])

    parallel_row_blocks(rows, work)
    with np.errstate(all="ignore"):
        d = d_acc + np.where(all_exact, 0.0, rounding_steps * _kernels.half_ulp(max_abs, M))
        d = np.where(all_exact, 0.0, d)
    bits, exact = _kernels.bits_from_delta(acc, d, M)
    res, bits, exact = _kernels._finalize(acc, bits, exact, M)
    return XArray(res.reshape(out_shape), bits.reshape(out_shape), exact.reshape(out_shape), fmt)


def chained_sum_reduce(a: XArray, axis: Optional[int] = None) -> XArray:
    """Pairwise left fold through the scalar add rule (test reference)."""
    v2d, s2d, x2d, out_shape = _move_axis_last(a, axis)
    rows, n = v2d.shape
    fmt = a.format
    if n == 0:
        z = np.zeros(rows)
        return XArray(z.reshape(out_shape), np.full(rows, fmt.mantissa_bits).reshape(out_shape),
                      np.ones(rows, bool).reshape(out_shape), fmt)
    v, s, x = v2d[:, 0].copy(), s2d[:, 0].copy(), x2d[:, 0].copy()
    for i in range(1, n):
        v, s, x = _kernels.add(v, s, x, v2d[:, i], s2d[:, i], x2d[:, i], fmt)
    return XArray(v.reshape(out_shape), s.reshape(out_shape), x.reshape(out_shape), fmt)


def prod_reduce(a: XArray, axis: Optional[int] = None) -> XArray:
    fmt = a.format
    M = fmt.mantissa_bits
    v2d, s2d, x2d, out_shape = _move_axis_last(a, axis)
    rows, n = v2d.shape
    acc = np.ones(rows)
    rel_acc = np.zeros(rows)
    rounding_steps = np.zeros(rows)
    all_exact = np.ones(rows, dtype=bool)

    def work(lo, hi):
        sl = slice(lo, hi)
        with np.errstate(all="ignore"):
            for i in range(n):
                vi = v2d[sl, i]
                raw, err = _kernels.two_prod(acc[sl], vi)
                res = fmt.round_values(raw)
                inexact = (err != 0.0) | (res != raw) | ~np.isfinite(err)
                rounding_steps[sl] += inexact
                acc[sl] = res
                rel_acc[sl] += _kernels.rel_delta(s2d[sl, i], x2d[sl, i])
                all_exact[sl] &= x2d[sl, i]

    parallel_row_blocks(rows, work)
    with np.errstate(all="ignore"):
        rel = rel_acc + np.where(all_exact, 0.0, rounding_steps * np.ldexp(1.0, -M))
        rel = np.where(all_exact, 0.0, rel)
    bits, exact = _kernels.bits_from_rel_delta(acc, rel, M)
    res, bits, exact = _kernels._finalize(acc, bits, exact, M)
    return XArray(res.reshape(out_shape), bits.reshape(out_shape), exact.reshape(out_shape), fmt)


def _minmax_reduce(a: XArray, axis, take_max: bool) -> XArray:
    fmt = a.format
    v2d, s2d, x2d, out_shape = _move_axis_last(a, axis)
    rows, n = v2d.shape
    if n == 0:
        raise AxisError("min/max reduction over an empty axis")
    kernel = _kernels.max_op if take_max else _kernels.min_op
    v, s, x = v2d[:, 0].copy(), s2d[:, 0].copy(), x2d[:, 0].copy()
    for i in range(1, n):
        v, s, x = kernel(v, s, x, v2d[:, i], s2d[:, i], x2d[:, i], fmt)
    return XArray(v.reshape(out_shape), s.reshape(out_shape), x.reshape(out_shape), fmt)


def min_reduce(a: XArray, axis: Optional[int] = None) -> XArray:
    return _minmax_reduce(a, axis, take_max=False)


def max_reduce(a: XArray, axis: Optional[int] = None) -> XArray:
    return _minmax_reduce(a, axis, take_max=True)


def mean(a: XArray, axis: Optional[int] = None) -> XArray:
    n = a.size if axis is None else a.shape[axis]
    total = sum_reduce(a, axis)
    count = XArray.from_exact(np.full(total.shape, float(n)), a.format)
    return map_binary("div", total, count)


def dot(a: XArray, b: XArray) -> XScalar:
    from .matmul import matmul  # local import to avoid a cycle

    if a.ndim != 1 or b.ndim != 1:
        raise ShapeError("dot expects 1-d arrays")
    if a.shape[0] != b.shape[0]:
        raise ShapeError(f"length mismatch: {a.shape[0]} vs {b.shape[0]}")
    _check_same_format(a, b)
    if a.shape[0] == 0:
        return XScalar(0.0, a.format.mantissa_bits, True, a.format)
    return matmul(a.reshape((1, -1)), b.reshape((-1, 1))).item(0, 0)


# -- serialization (XARR1 container) ----------------------------------


def save(a: XArray, sink) -> None:
    close = False
    if isinstance(sink, (str, bytes)) or hasattr(sink, "__fspath__"):
        sink = open(sink, "wb")
        close = True
    try:
        sink.write(_MAGIC)
        sink.write(struct.pack("<B", a.format.code))
        sink.write(struct.pack("<B", a.ndim))
        for ext in a.shape:
            sink.write(struct.pack("<Q", ext))
        sink.write(a.format.encode_values(a.values))
        sink.write(a.bits.astype("<u1").tobytes())
    finally:
        if close:
            sink.close()


def load(source) -> XArray:
    close = False
    if isinstance(source, (str, bytes)) or hasattr(source, "__fspath__"):
        source = open(source, "rb")
        close = True
    try:
        data = source.read()
    finally:
        if close:
            source.close()

    def take(n, what):
        nonlocal data
        if len(data) < n:
            raise SerializationError(f"truncated stream while reading {what}")
        chunk, data = data[:n], data[n:]
        return chunk

    if take(5, "magic") != _MAGIC:
        raise SerializationError("bad magic; not an XARR1 stream")
    code = take(1, "format code")[0]
    if code not in FORMATS_BY_CODE:
        raise SerializationError(f"unknown format code {code}")
    fmt = FORMATS_BY_CODE[code]
    rank = take(1, "rank")[0]
    if rank > MAX_RANK:
        raise SerializationError(f"rank {rank} exceeds limit {MAX_RANK}")
    shape = tuple(
        struct.unpack("<Q", take(8, f"extent {i}"))[0] for i in range(rank)
    )
    count = 1
    for ext in shape:
        count *= ext
    width = fmt.storage_dtype().itemsize
    values = fmt.decode_values(take(count * width, "values"), count).reshape(shape)
    bits = np.frombuffer(take(count, "bits"), dtype=np.uint8).astype(np.int64).reshape(shape)
    if bits.size and bits.max() > fmt.mantissa_bits:
        raise BitsRangeError(
            f"bits value {bits.max()} out of range for {fmt.name}"
        )
    return XArray(values, bits, None, fmt)
