"""Tape-based reverse-mode differentiation with precision tracking.

Forward operations are recorded on a Tape; backward replays the chain
rule through the same tracked kernels, so gradient bit counts carry the
same guarantees as forward values.  Gradients accumulate in node
creation order, which keeps backward deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from . import array as xarray_mod
from . import unary
from .array import XArray, map_binary, map_unary, mean, sum_reduce
from .errors import ShapeError
from .matmul import matmul
from .scalar import XScalar


@dataclass(eq=False)
class Node:
    op: str
    inputs: Tuple["Node", ...]
    value: XArray
    meta: Optional[object] = None

    @property
    def shape(self):
        return self.value.shape


_ACTIVATIONS = ("relu", "sigmoid", "tanh")


class Tape:
    """Records a computation graph in topological order."""

    def __init__(self):
        self.nodes: List[Node] = []

    def _record(self, op, inputs, value, meta=None) -> Node:
        node = Node(op, tuple(inputs), value, meta)
        self.nodes.append(node)
        return node

    def input(self, a: XArray) -> Node:
        return self._record("input", (), a)

    def add(self, x: Node, y: Node) -> Node:
        return self._record("add", (x, y), map_binary("add", x.value, y.value))

    def sub(self, x: Node, y: Node) -> Node:
        return self._record("sub", (x, y), map_binary("sub", x.value, y.value))

    def mul(self, x: Node, y: Node) -> Node:
        return self._record("mul", (x, y), map_binary("mul", x.value, y.value))

    def matmul(self, x: Node, w: Node) -> Node:
        return self._record("matmul", (x, w), matmul(x.value, w.value, "v2"))

    def mean(self, x: Node) -> Node:
        return self._record("mean", (x,), mean(x.value))

    def activation(self, kind: str, x: Node) -> Node:
        if kind not in _ACTIVATIONS:
            raise ValueError(f"unknown activation {kind!r}; expected one of {_ACTIVATIONS}")
        if kind == "relu":
            zero = XArray.from_exact(np.zeros(x.shape), x.value.format)
            out = map_binary("max", x.value, zero)
        else:
            desc = unary.SIGMOID if kind == "sigmoid" else unary.TANH
            out = map_unary(desc, x.value)
        return self._record(kind, (x,), out)


def forward_linear(tape: Tape, x: Node, w: Node, b: Node) -> Node:
    """Recorded x @ w + b with bias broadcast over the batch axis."""
    return tape.add(tape.matmul(x, w), b)


def forward_activation(tape: Tape, kind: str, x: Node) -> Node:
    return tape.activation(kind, x)


def mse_loss(tape: Tape, pred: Node, target: Node) -> Node:
    """Mean squared error, recorded as sub, square and mean nodes."""
    if pred.shape != target.shape:
        raise ShapeError(f"shape mismatch: {pred.shape} vs {target.shape}")
    diff = tape.sub(pred, target)
    return tape.mean(tape.mul(diff, diff))


def _neg(a: XArray) -> XArray:
    return XArray(-a.values, a.bits, a.exact, a.format)


def _reduce_to_shape(g: XArray, shape) -> XArray:
    """Sum a gradient down to the shape it was broadcast from."""
    while g.ndim > len(shape):
        g = sum_reduce(g, 0)
    for axis in range(g.ndim):
        if shape[axis] == 1 and g.shape[axis] != 1:
            g = sum_reduce(g, axis).reshape(
                g.shape[:axis] + (1,) + g.shape[axis + 1 :]
            )
    return g


def _broadcast_const(value: float, shape, fmt) -> XArray:
    return XArray.from_exact(np.full(shape, value), fmt)


def backward(tape: Tape, output: Node, seed: Optional[XArray] = None) -> Dict[Node, XArray]:
    """Reverse sweep; returns a gradient per reachable node."""
    if seed is None:
        seed = XArray.from_exact(np.ones(output.shape), output.value.format)
    if seed.shape != output.shape:
        raise ShapeError(f"seed shape {seed.shape} != output shape {output.shape}")
    grads: Dict[Node, XArray] = {output: seed}

    def accumulate(node: Node, g: XArray):
        g = _reduce_to_shape(g, node.shape)
        if node in grads:
            grads[node] = map_binary("add", grads[node], g)
        else:
            grads[node] = g

    for node in reversed(tape.nodes):
        if node not in grads or node.op == "input":
            continue
        g = grads[node]
        if node.op == "add":
            accumulate(node.inputs[0], g)
            accumulate(node.inputs[1], g)
        elif node.op == "sub":
            accumulate(node.inputs[0], g)
            accumulate(node.inputs[1], _neg(g))
        elif node.op == "mul":
            x, y = node.inputs
            accumulate(x, map_binary("mul", g, y.value))
            accumulate(y, map_binary("mul", g, x.value))
        elif node.op == "matmul":
            a, b = node.inputs
            accumulate(a, matmul(g, b.value.T, "v2"))
            accumulate(b, matmul(a.value.T, g, "v2"))
        elif node.op == "mean":
            (x,) = node.inputs
            n = x.value.size
            wide = XArray(
                np.broadcast_to(g.values, x.shape),
                np.broadcast_to(g.bits, x.shape),
                np.broadcast_to(g.exact, x.shape),
                g.format,
            )
            accumulate(x, map_binary("div", wide, _broadcast_const(float(n), x.shape, g.format)))
        elif node.op == "relu":
            (x,) = node.inputs
            gate = XArray.from_exact((x.value.values > 0.0).astype(np.float64), g.format)
            accumulate(x, map_binary("mul", g, gate))
        elif node.op == "sigmoid":
            (x,) = node.inputs
            s = node.value
            one = _broadcast_const(1.0, s.shape, g.format)
            deriv = map_binary("mul", s, map_binary("sub", one, s))
            accumulate(x, map_binary("mul", g, deriv))
        elif node.op == "tanh":
            (x,) = node.inputs
            t = node.value
            one = _broadcast_const(1.0, t.shape, g.format)
            deriv = map_binary("sub", one, map_binary("mul", t, t))
            accumulate(x, map_binary("mul", g, deriv))
        else:
            raise ValueError(f"no backward rule for op {node.op!r}")
    return grads


def sgd_step(params: List[XArray], grads: List[XArray], lr: XScalar) -> List[XArray]:
    """p <- p - lr * g through the tracked sub and mul rules."""
    if len(params) != len(grads):
        raise ShapeError("parameter and gradient counts differ")
    out = []
    for p, g in zip(params, grads):
        if p.shape != g.shape:
            raise ShapeError(f"shape mismatch: {p.shape} vs {g.shape}")
        lr_arr = XArray(
            np.full(p.shape, lr.value),
            np.full(p.shape, lr.exact_bits),
            np.full(p.shape, lr.exact),
            p.format,
        )
        out.append(map_binary("sub", p, map_binary("mul", lr_arr, g)))
    return out
