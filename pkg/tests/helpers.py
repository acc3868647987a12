"""Shared random-case builders for the property suites."""

from __future__ import annotations

import math
from typing import List, Tuple

import numpy as np

from preciseum import scalar as sc
from preciseum import unary
from preciseum.array import XArray
from preciseum.oracle import Instr, ScalarProgram
from preciseum.scalar import XScalar

UNARY_POOL = (
    unary.SIN,
    unary.COS,
    unary.ATAN,
    unary.EXP,
    unary.LN,
    unary.SQRT,
    unary.TANH,
    unary.SIGMOID,
)

_DERIVATIVE = {
    "sin": lambda v: abs(math.cos(v)),
    "cos": lambda v: abs(math.sin(v)),
    "atan": lambda v: 1.0 / (1.0 + v * v),
    "exp": lambda v: math.exp(v),
    "ln": lambda v: 1.0 / abs(v),
    "sqrt": lambda v: 0.5 / math.sqrt(v),
    "tanh": lambda v: 1.0 - math.tanh(v) ** 2,
    "sigmoid": lambda v: (s := 1.0 / (1.0 + math.exp(-v))) * (1.0 - s),
}

# accept a unary step only while the propagated inaccuracy stays within a
# factor of the first-order forecast delta_in * |f'(x)|; saturated regions
# (tanh far from zero, for instance) would otherwise dominate every
# downstream spread comparison
_SATURATION_FACTOR = 2.0


def random_tracked_scalar(rng) -> XScalar:
    mag = 2.0 ** rng.uniform(-6.0, 6.0)
    value = mag if rng.random() < 0.5 else -mag
    bits = int(rng.integers(8, 41))
    return sc.with_bits(value, bits)


def _unary_applicable(desc, x: XScalar) -> bool:
    v, d = x.value, x.delta()
    if not math.isfinite(v):
        return False
    if desc.fn_id in ("ln", "sqrt"):
        return v - d > 0.0
    if desc.fn_id == "exp":
        return abs(v) < 500.0
    if desc.fn_id in ("sin", "cos"):
        return abs(v) < 1e6
    return abs(v) < 500.0


def _try_unary(rng, x: XScalar):
    desc = UNARY_POOL[int(rng.integers(len(UNARY_POOL)))]
    if not _unary_applicable(desc, x):
        return None
    res = sc.apply_unary(desc, x)
    if not math.isfinite(res.value) or res.exact_bits == 0:
        return None
    d_in = x.delta()
    if d_in > 0.0:
        forecast = d_in * _DERIVATIVE[desc.fn_id](x.value)
        if not res.delta() <= _SATURATION_FACTOR * forecast:
            return None
    return desc, res


def random_scalar_program(rng) -> Tuple[ScalarProgram, List[XScalar]]:
    """Tree-shaped program: each register feeds at most one later step.

    Division steps keep the divisor clear of zero and at most two unary
    steps appear, both subject to the saturation guard above.
    """
    depth = int(rng.integers(5, 21))
    n_inputs = depth + 1
    inputs = [random_tracked_scalar(rng) for _ in range(n_inputs)]
    prog = ScalarProgram(n_inputs)
    tracked = list(inputs)
    avail = list(range(n_inputs))
    unary_budget = 2
    remaining = depth
    while remaining:
        if unary_budget and len(avail) > 1 and rng.random() < 0.15:
            j = avail[int(rng.integers(len(avail)))]
            attempt = _try_unary(rng, tracked[j])
            if attempt is not None:
                desc, res = attempt
                prog.instrs.append(Instr("unary", (j,), fn_id=desc.fn_id, param=desc.param))
                avail.remove(j)
                avail.append(len(tracked))
                tracked.append(res)
                unary_budget -= 1
                continue
        i = avail.pop(int(rng.integers(len(avail))))
        j = avail.pop(int(rng.integers(len(avail))))
        op = ("add", "sub", "mul", "div", "min", "max")[int(rng.integers(6))]
        if op == "div":
            denom = tracked[j]
            if not abs(denom.value) > 4.0 * denom.delta():
                op = "add"
        res = {
            "add": sc.add,
            "sub": sc.sub,
            "mul": sc.mul,
            "div": sc.div,
            "min": sc.min_op,
            "max": sc.max_op,
        }[op](tracked[i], tracked[j])
        prog.instrs.append(Instr(op, (i, j)))
        avail.append(len(tracked))
        tracked.append(res)
        remaining -= 1
    return prog, inputs


_ACT_NP = {
    "tanh": np.tanh,
    "sigmoid": lambda v: 1.0 / (1.0 + np.exp(-v)),
    "relu": lambda v: np.maximum(v, 0.0),
    None: lambda v: v,
}


def numpy_loss(x, target, layers):
    h = x
    for w, b, act in layers:
        h = _ACT_NP[act](h @ w + b)
    return float(np.mean((h - target) ** 2))


def build_tracked_net(tape, x, target, layers):
    from preciseum.autodiff import forward_activation, forward_linear, mse_loss

    nx = tape.input(XArray.from_exact(x))
    nt = tape.input(XArray.from_exact(target))
    param_nodes = []
    h = nx
    for w, b, act in layers:
        nw = tape.input(XArray.from_exact(w))
        nb = tape.input(XArray.from_exact(b))
        param_nodes.append((nw, nb))
        h = forward_linear(tape, h, nw, nb)
        if act is not None:
            h = forward_activation(tape, act, h)
    return mse_loss(tape, h, nt), param_nodes


def finite_difference(x, target, layers, li, which, idx, h=1e-5):
    bumped = [list(l) for l in layers]
    arr = bumped[li][which].copy()
    arr[idx] += h
    bumped[li][which] = arr
    up = numpy_loss(x, target, bumped)
    arr2 = layers[li][which].copy()
    arr2[idx] -= h
    bumped[li][which] = arr2
    down = numpy_loss(x, target, bumped)
    return (up - down) / (2.0 * h)


def random_dense_net(rng, n_layers):
    dims = [2] + [int(rng.integers(2, 5)) for _ in range(n_layers)]
    layers = []
    for li in range(n_layers):
        w = rng.normal(size=(dims[li], dims[li + 1])) * 0.7
        b = rng.normal(size=(1, dims[li + 1])) * 0.1
        act = ("tanh", "sigmoid")[int(rng.integers(2))] if li < n_layers - 1 else None
        layers.append((w, b, act))
    x = rng.normal(size=(4, 2))
    target = rng.normal(size=(4, dims[-1]))
    return x, target, layers


def random_tracked_matrix(rng, shape, log_range=6.0) -> XArray:
    mags = 2.0 ** rng.uniform(-log_range, log_range, size=shape)
    values = mags * np.where(rng.random(shape) < 0.5, -1.0, 1.0)
    bits = rng.integers(8, 41, size=shape)
    return XArray.with_bits(values, bits)
