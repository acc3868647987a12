"""Differentiable unary operations and their condition numbers.

The error amplification factor of f at x is |x * f'(x) / f(x)|; each
descriptor carries a closure for it alongside the plain value map.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import _kernels


@dataclass(frozen=True)
class UnaryFnDescriptor:
    fn_id: str
    value_map: Callable[[np.ndarray], np.ndarray]
    condition_number: Callable[[np.ndarray], np.ndarray]
    # arithmetic maps (a*x, x+a) can have exactly representable results;
    # residual() reports the representation error so the rounding charge
    # can be skipped when it is zero.
    exact_arith: bool = False
    residual: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    param: Optional[float] = None


def _c_sin(v):
    return np.abs(v * np.cos(v) / np.sin(v))


def _c_cos(v):
    return np.abs(v * np.tan(v))


def _c_tan(v):
    return np.abs(v / (np.sin(v) * np.cos(v)))


def _c_asin(v):
    return np.abs(v / (np.sqrt(1.0 - v * v) * np.arcsin(v)))


def _c_acos(v):
    return np.abs(v / (np.sqrt(1.0 - v * v) * np.arccos(v)))


def _c_atan(v):
    return np.abs(v / ((1.0 + v * v) * np.arctan(v)))


def _c_ln(v):
    return np.abs(1.0 / np.log(v))


def _c_tanh(v):
    t = np.tanh(v)
    # analytic limit 1 at the removable singularity x = 0
    return np.where(t == 0.0, 1.0, np.abs(v * (1.0 - t * t) / np.where(t == 0.0, 1.0, t)))


def _c_sigmoid(v):
    sig = 1.0 / (1.0 + np.exp(-v))
    return np.abs(v * (1.0 - sig))


SIN = UnaryFnDescriptor("sin", np.sin, _c_sin)
COS = UnaryFnDescriptor("cos", np.cos, _c_cos)
TAN = UnaryFnDescriptor("tan", np.tan, _c_tan)
ASIN = UnaryFnDescriptor("asin", np.arcsin, _c_asin)
ACOS = UnaryFnDescriptor("acos", np.arccos, _c_acos)
ATAN = UnaryFnDescriptor("atan", np.arctan, _c_atan)
LN = UnaryFnDescriptor("ln", np.log, _c_ln)
EXP = UnaryFnDescriptor("exp", np.exp, lambda v: np.abs(v))
SQRT = UnaryFnDescriptor("sqrt", np.sqrt, lambda v: np.full_like(np.asarray(v, np.float64), 0.5))
RECIP = UnaryFnDescriptor(
    "recip",
    lambda v: 1.0 / v,
    lambda v: np.ones_like(np.asarray(v, np.float64)),
)
TANH = UnaryFnDescriptor("tanh", np.tanh, _c_tanh)
SIGMOID = UnaryFnDescriptor("sigmoid", lambda v: 1.0 / (1.0 + np.exp(-v)), _c_sigmoid)


def pow_int(n: int) -> UnaryFnDescriptor:
    if n == 0:
        return UnaryFnDescriptor(
            "pow_int", lambda v: np.ones_like(np.asarray(v, np.float64)),
            lambda v: np.zeros_like(np.asarray(v, np.float64)), param=0,
        )
    return UnaryFnDescriptor(
        "pow_int",
        lambda v: np.power(v, n) if n > 0 else 1.0 / np.power(v, -n),
        lambda v: np.full_like(np.asarray(v, np.float64), float(abs(n))),
        param=n,
    )


def scale(a: float) -> UnaryFnDescriptor:
    def residual(v, res):
        _, err = _kernels.two_prod(np.asarray(v, np.float64), a)
        return err + (a * v - res)

    return UnaryFnDescriptor(
        "scale",
        lambda v: a * np.asarray(v, np.float64),
        lambda v: np.ones_like(np.asarray(v, np.float64)),
        exact_arith=True,
        residual=residual,
        param=a,
    )


def add_const(a: float) -> UnaryFnDescriptor:
    def residual(v, res):
        _, err = _kernels.two_sum(np.asarray(v, np.float64), np.asarray(a, np.float64))
        return err + ((v + a) - res)

    return UnaryFnDescriptor(
        "add_const",
        lambda v: np.asarray(v, np.float64) + a,
        lambda v: np.abs(v / (np.asarray(v, np.float64) + a)),
        exact_arith=True,
        residual=residual,
        param=a,
    )


_SIMPLE = {
    d.fn_id: d
    for d in (SIN, COS, TAN, ASIN, ACOS, ATAN, LN, EXP, SQRT, RECIP, TANH, SIGMOID)
}


def by_name(fn_id: str, param: Optional[float] = None) -> UnaryFnDescriptor:
    """Look up a descriptor; pow_int/scale/add_const take a parameter."""
    if fn_id in _SIMPLE:
        return _SIMPLE[fn_id]
    if fn_id == "pow_int":
        return pow_int(int(param))
    if fn_id == "scale":
        return scale(float(param))
    if fn_id == "add_const":
        return add_const(float(param))
    raise ValueError(f"unknown unary function: {fn_id!r}")
