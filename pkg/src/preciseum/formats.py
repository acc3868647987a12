"""Floating-point formats supported by the extended-float types.

Values are carried in binary64 regardless of format; after every operation
the value is rounded to the target format, so narrower formats behave like
hardware that computes in the wide accumulator and stores narrow.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class FloatFormat:
    name: str
    mantissa_bits: int  # counts the implicit leading bit
    code: int  # byte tag used by the XARR1 container

    def __post_init__(self):
        if self.mantissa_bits <= 0:
            raise ValueError("mantissa_bits must be positive")

    def round_values(self, values: np.ndarray) -> np.ndarray:
        """Round a float64 array to this format, returned as float64."""
        if self.name == "binary64":
            return np.asarray(values, dtype=np.float64)
        if self.name == "binary32":
            return np.asarray(values, dtype=np.float64).astype(np.float32).astype(np.float64)
        if self.name == "binary16":
            return np.asarray(values, dtype=np.float64).astype(np.float16).astype(np.float64)
        # bfloat16: round the binary32 image to 8 mantissa bits, ties to even
        f32 = np.asarray(values, dtype=np.float64).astype(np.float32)
        u = f32.view(np.uint32)
        rounded = np.where(
            np.isnan(f32.astype(np.float64)),
            u,  # keep NaN payloads untouched
            (u + np.uint32(0x7FFF) + ((u >> np.uint32(16)) & np.uint32(1))) & np.uint32(0xFFFF0000),
        )
        return rounded.astype(np.uint32).view(np.float32).astype(np.float64)

    def storage_dtype(self):
        """Dtype used for the raw values buffer in the XARR1 container."""
        return {
            "binary64": np.dtype("<f8"),
            "binary32": np.dtype("<f4"),
            "binary16": np.dtype("<f2"),
            "bfloat16": np.dtype("<u2"),  # raw bit pattern of the upper f32 half
        }[self.name]

    def encode_values(self, values: np.ndarray) -> bytes:
        if self.name == "bfloat16":
            f32 = values.astype(np.float32)
            bits = (f32.view(np.uint32) >> np.uint32(16)).astype("<u2")
            return bits.tobytes()
        return values.astype(self.storage_dtype()).tobytes()

    def decode_values(self, raw: bytes, count: int) -> np.ndarray:
        arr = np.frombuffer(raw, dtype=self.storage_dtype(), count=count)
        if self.name == "bfloat16":
            return (arr.astype(np.uint32) << np.uint32(16)).view(np.float32).astype(np.float64)
        return arr.astype(np.float64)


BINARY64 = FloatFormat("binary64", 53, 0)
BINARY32 = FloatFormat("binary32", 24, 1)
BINARY16 = FloatFormat("binary16", 11, 2)
BFLOAT16 = FloatFormat("bfloat16", 8, 3)

FORMATS = {f.name: f for f in (BINARY64, BINARY32, BINARY16, BFLOAT16)}
FORMATS_BY_CODE = {f.code: f for f in FORMATS.values()}
