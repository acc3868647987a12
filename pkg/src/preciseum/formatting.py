"""'?'-masked rendering of extended scalars.

A digit is masked when perturbing the value by its inaccuracy could
change it; the cutoff is the full interval width 2*delta, so the digit
whose place value falls at or below 2*delta is already unreliable.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .scalar import XScalar


@dataclass(frozen=True)
class Fixed:
    digits: int  # digits after the decimal point

    def __post_init__(self):
        if self.digits < 1:
            raise ValueError("display digits must be >= 1")


@dataclass(frozen=True)
class Scientific:
    digits: int  # total significant digits shown

    def __post_init__(self):
        if self.digits < 1:
            raise ValueError("display digits must be >= 1")


def _mask_digits(body: str, leading_place: int, threshold: float) -> str:
    """Replace digits at decimal places <= threshold with '?'.

    ``leading_place`` is the power of ten of the first digit in ``body``;
    the decimal point and sign are preserved.
    """
    out = []
    place = leading_place
    for ch in body:
        if ch.isdigit():
            if threshold > 0 and 10.0 ** place <= threshold:
                out.append("?")
            else:
                out.append(ch)
            place -= 1
        else:
            out.append(ch)
    return "".join(out)


def format_scalar(x: XScalar, style) -> str:
    v = x.value
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "-inf" if v < 0 else "inf"
    threshold = 0.0 if x.exact else 2.0 * x.delta()
    if isinstance(style, Scientific):
        text = f"{v:.{style.digits - 1}e}"
        m = re.match(r"(-?)(\d\.?\d*)e([+-]\d+)", text)
        sign, body, exp = m.groups()
        leading_place = int(exp)
        return sign + _mask_digits(body, leading_place, threshold) + "e" + exp
    if isinstance(style, Fixed):
        text = f"{v:.{style.digits}f}"
        sign = "-" if text.startswith("-") else ""
        body = text[len(sign):]
        int_part = body.split(".")[0]
        leading_place = len(int_part) - 1
        return sign + _mask_digits(body, leading_place, threshold)
    raise TypeError(f"unknown style: {style!r}")


def exact_decimal_digits(x: XScalar) -> int:
    """Number of unmasked significant digits a scientific rendering keeps."""
    if not math.isfinite(x.value):
        return 0
    width = math.ceil(x.format.mantissa_bits * math.log10(2.0)) + 1
    rendered = format_scalar(x, Scientific(width))
    mantissa = rendered.split("e")[0]
    return sum(1 for ch in mantissa if ch.isdigit())
