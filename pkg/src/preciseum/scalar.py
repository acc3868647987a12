"""Extended floating-point scalars: a value plus its count of exact
mantissa bits, with an extra flag for values whose absolute error is
exactly zero."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from fractions import Fraction

import numpy as np

from . import _kernels, unary
from .errors import BitsRangeError
from .formats import BINARY64, FloatFormat


class Comparison(enum.Enum):
    EQUAL = "equal"
    UNEQUAL = "unequal"
    INDISTINGUISHABLE = "indistinguishable"


@dataclass(frozen=True)
class XScalar:
    value: float
    exact_bits: int
    exact: bool = False
    format: FloatFormat = BINARY64

    def __post_init__(self):
        M = self.format.mantissa_bits
        if not 0 <= self.exact_bits <= M:
            raise BitsRangeError(
                f"exact_bits {self.exact_bits} outside [0, {M}] for {self.format.name}"
            )
        v = self.value
        if math.isnan(v) or math.isinf(v):
            object.__setattr__(self, "exact_bits", 0)
            object.__setattr__(self, "exact", False)
        elif v == 0.0:
            object.__setattr__(self, "exact_bits", M)
            object.__setattr__(self, "exact", True)
        elif self.exact and self.exact_bits != M:
            object.__setattr__(self, "exact_bits", M)

    # -- inaccuracy ---------------------------------------------------

    def delta(self) -> float:
        """Absolute inaccuracy magnitude (0 when exact, inf for NaN/Inf)."""
        if not math.isfinite(self.value):
            return math.inf
        if self.exact or self.value == 0.0:
            return 0.0
        e = math.frexp(self.value)[1]
        return math.ldexp(1.0, e - self.exact_bits)

    def inaccuracy_exponent(self) -> float:
        """log2 of the absolute inaccuracy; -inf when exact."""
        if not math.isfinite(self.value):
            return math.inf
        if self.exact or self.value == 0.0:
            return -math.inf
        return float(math.frexp(self.value)[1] - self.exact_bits)

    def __str__(self):
        from .formatting import format_scalar, Scientific

        return format_scalar(self, Scientific(16))


def _round_value(value: float, fmt: FloatFormat) -> float:
    return float(fmt.round_values(np.asarray([value], dtype=np.float64))[0])


def from_exact(value: float, fmt: FloatFormat = BINARY64) -> XScalar:
    """Wrap a value whose stored representation is taken as exactly true."""
    v = _round_value(float(value), fmt)
    if math.isnan(v) or math.isinf(v):
        return XScalar(v, 0, False, fmt)
    return XScalar(v, fmt.mantissa_bits, True, fmt)


def with_bits(value: float, bits: int, fmt: FloatFormat = BINARY64) -> XScalar:
    """Wrap a value carrying a caller-asserted exact-bit count."""
    if not 0 <= bits <= fmt.mantissa_bits:
        raise BitsRangeError(f"bits {bits} outside [0, {fmt.mantissa_bits}]")
    v = _round_value(float(value), fmt)
    return XScalar(v, bits, False, fmt)


def from_decimal(text: str, fmt: FloatFormat = BINARY64) -> XScalar:
    """Parse a decimal numeral; inexact conversions occupy the last bit."""
    try:
        dec = Decimal(text.strip())
    except InvalidOperation as err:
        raise ValueError(f"not a decimal numeral: {text!r}") from err
    if not dec.is_finite():
        raise ValueError(f"not a finite decimal numeral: {text!r}")
    v = _round_value(float(dec), fmt)
    if not math.isfinite(v):
        return XScalar(v, 0, False, fmt)
    if Fraction(dec) == Fraction(v):
        return XScalar(v, fmt.mantissa_bits, True, fmt)
    return XScalar(v, fmt.mantissa_bits - 1, False, fmt)


def _unpack(x: XScalar):
    return (
        np.asarray([x.value], np.float64),
        np.asarray([x.exact_bits], np.int64),
        np.asarray([x.exact], bool),
    )


def _pack(res, bits, exact, fmt: FloatFormat) -> XScalar:
    return XScalar(float(res[0]), int(bits[0]), bool(exact[0]), fmt)


def _check_formats(x: XScalar, y: XScalar):
    if x.format is not y.format and x.format.name != y.format.name:
        raise ValueError(f"format mismatch: {x.format.name} vs {y.format.name}")


def _binary(kernel, x: XScalar, y: XScalar) -> XScalar:
    _check_formats(x, y)
    return _pack(*kernel(*_unpack(x), *_unpack(y), x.format), x.format)


def add(x: XScalar, y: XScalar) -> XScalar:
    return _binary(_kernels.add, x, y)


def sub(x: XScalar, y: XScalar) -> XScalar:
    return _binary(_kernels.sub, x, y)


def mul(x: XScalar, y: XScalar) -> XScalar:
    return _binary(_kernels.mul, x, y)


def div(x: XScalar, y: XScalar) -> XScalar:
    return _binary(_kernels.div, x, y)


def min_op(x: XScalar, y: XScalar) -> XScalar:
    return _binary(_kernels.min_op, x, y)


def max_op(x: XScalar, y: XScalar) -> XScalar:
    return _binary(_kernels.max_op, x, y)


def apply_unary(f: unary.UnaryFnDescriptor, x: XScalar) -> XScalar:
    return _pack(*_kernels.apply_unary(f, *_unpack(x), x.format), x.format)


def round_op(mode: str, x: XScalar) -> XScalar:
    return _pack(*_kernels.round_op(mode, *_unpack(x), x.format), x.format)


def neg(x: XScalar) -> XScalar:
    return XScalar(-x.value, x.exact_bits, x.exact, x.format)


def approx_eq(x: XScalar, y: XScalar) -> Comparison:
    _check_formats(x, y)
    if math.isnan(x.value) or math.isnan(y.value):
        return Comparison.UNEQUAL
    if x.value == y.value and math.copysign(1.0, x.value) == math.copysign(1.0, y.value):
        if x.exact and y.exact:
            return Comparison.EQUAL
    if math.isinf(x.value) or math.isinf(y.value):
        # infinities carry no exact bits: same-signed ones cannot be told apart
        return Comparison.INDISTINGUISHABLE if x.value == y.value else Comparison.UNEQUAL
    if abs(x.value - y.value) <= x.delta() + y.delta():
        return Comparison.INDISTINGUISHABLE
    return Comparison.UNEQUAL
