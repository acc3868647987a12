"""Command-line demos and the JSON op endpoint.

Each subcommand prints an aligned table by default or, with --json, a
machine-readable document carrying exactly the same data.  Exit codes:
0 success, 2 usage error, 1 internal error.
"""

from __future__ import annotations

import base64
import io
import json
import math
import sys
import time
from dataclasses import dataclass, field
from typing import List, Optional

import click
import numpy as np

from . import array as xarray_mod
from . import autodiff as ad
from . import oracle as orc
from .matmul import (
    EXACT_THRESHOLD,
    InaccuracyExponentMatrix,
    estimate_holder,
    estimate_v1,
    estimate_v2,
    matmul,
    mixed_tropical,
)
from . import scalar as sc
from . import unary
from .array import XArray
from .errors import PreciseumError
from .formatting import Fixed, Scientific, exact_decimal_digits, format_scalar
from .scalar import Comparison, XScalar


@dataclass
class DemoReport:
    demo: str
    rows: List[dict] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def add(self, **row):
        self.rows.append(row)

    def to_json(self) -> str:
        return json.dumps({"demo": self.demo, "meta": self.meta, "rows": self.rows}, indent=2)

    def render_table(self) -> str:
        if not self.rows:
            return f"[{self.demo}] (no rows)"
        cols = list(self.rows[0].keys())
        cells = [[str(r.get(c, "")) for c in cols] for r in self.rows]
        widths = [max(len(c), *(len(row[i]) for row in cells)) for i, c in enumerate(cols)]
        lines = [f"[{self.demo}]"]
        for k, v in self.meta.items():
            lines.append(f"  {k}: {v}")
        lines.append("  ".join(c.ljust(w) for c, w in zip(cols, widths)))
        lines.append("  ".join("-" * w for w in widths))
        for row in cells:
            lines.append("  ".join(v.ljust(w) for v, w in zip(row, widths)))
        return "\n".join(lines)


def _emit(report: DemoReport, as_json: bool):
    click.echo(report.to_json() if as_json else report.render_table())


@click.group()
def main():
    """Precision-tracked floating point demos."""


def _handle_internal(fn):
    try:
        fn()
    except click.ClickException:
        raise
    except PreciseumError as err:
        click.echo(f"error: {err}", err=True)
        sys.exit(1)


# -- quadratic --------------------------------------------------------


def solve_quadratic(a: XScalar, b: XScalar, c: XScalar, method: str):
    """Both roots of a x^2 + b x + c with tracked precision."""
    four = sc.from_exact(4.0)
    two = sc.from_exact(2.0)
    disc = sc.sub(sc.mul(b, b), sc.mul(four, sc.mul(a, c)))
    root = sc.apply_unary(unary.SQRT, disc)
    two_a = sc.mul(two, a)
    neg_b = sc.neg(b)
    if method == "naive":
        x1 = sc.div(sc.sub(neg_b, root), two_a)
        x2 = sc.div(sc.add(neg_b, root), two_a)
    else:
        # sign-aware numerator avoids the cancellation; x2 from Vieta
        signed = sc.sub(neg_b, root) if b.value >= 0 else sc.add(neg_b, root)
        x1 = sc.div(signed, two_a)
        x2 = sc.div(c, sc.mul(a, x1))
    return x1, x2


@main.command()
@click.option("--a", "a_text", default="1", show_default=True)
@click.option("--b", "b_text", default="1000", show_default=True)
@click.option("--c", "c_text", default="-2e-11", show_default=True)
@click.option("--method", type=click.Choice(["naive", "stable"]), default="stable", show_default=True)
@click.option("--json", "as_json", is_flag=True)
def quadratic(a_text, b_text, c_text, method, as_json):
    """Solve a x^2 + b x + c = 0 and show digit reliability per root."""

    def run():
        try:
            a = sc.from_decimal(a_text)
            b = sc.from_decimal(b_text)
            c = sc.from_decimal(c_text)
        except ValueError as err:
            raise click.UsageError(str(err))
        if a.value == 0.0:
            raise click.UsageError("leading coefficient must be nonzero")
        x1, x2 = solve_quadratic(a, b, c, method)
        report = DemoReport("quadratic", meta={"method": method, "a": a_text, "b": b_text, "c": c_text})
        for label, x in (("x1", x1), ("x2", x2)):
            report.add(
                root=label,
                value=x.value,
                exact_bits=x.exact_bits,
                fixed15=format_scalar(x, Fixed(15)),
                scientific16=format_scalar(x, Scientific(16)),
            )
        _emit(report, as_json)

    _handle_internal(run)


# -- arcsin -----------------------------------------------------------


def decimal_digits_to_bits(digits: int) -> int:
    return math.ceil(digits / math.log10(2.0))


@main.command()
@click.option("--x", "x_text", default="0.999999", show_default=True)
@click.option("--digits", default=6, show_default=True, type=int)
@click.option("--json", "as_json", is_flag=True)
def arcsin(x_text, digits, as_json):
    """arcsin of a value known to a given number of decimal digits."""

    def run():
        try:
            probe = sc.from_decimal(x_text)
        except ValueError as err:
            raise click.UsageError(str(err))
        if digits < 1:
            raise click.UsageError("digits must be >= 1")
        if abs(probe.value) > 1.0:
            raise click.UsageError("arcsin argument must lie in [-1, 1]")
        x = sc.with_bits(probe.value, min(decimal_digits_to_bits(digits), 53))
        result = sc.apply_unary(unary.ASIN, x)
        shown = exact_decimal_digits(result)
        report = DemoReport("arcsin", meta={"x": x_text, "input_digits": digits})
        report.add(
            input_bits=x.exact_bits,
            value=result.value,
            exact_bits=result.exact_bits,
            rendered=format_scalar(result, Scientific(max(shown + 1, 4))),
            reliable_digits=shown,
        )
        _emit(report, as_json)

    _handle_internal(run)


# -- matmul bounds ----------------------------------------------------


def _random_tracked_matrix(rng, n: int, dist: str) -> XArray:
    if dist == "loguniform":
        mags = 2.0 ** rng.uniform(-8, 8, size=(n, n))
        values = mags * np.where(rng.random((n, n)) < 0.5, -1.0, 1.0)
    else:
        values = rng.normal(size=(n, n))
    bits = rng.integers(8, 41, size=(n, n))
    return XArray.with_bits(values, bits)


@main.command("matmul-bounds")
@click.option("--n", default=8, show_default=True, type=int)
@click.option("--dist", type=click.Choice(["normal", "loguniform"]), default="normal", show_default=True)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--p-list", "p_list", default="1,2,8", show_default=True)
@click.option("--save", "save_path", type=click.Path(), default=None)
@click.option("--load", "load_path", type=click.Path(exists=True), default=None)
@click.option("--json", "as_json", is_flag=True)
def matmul_bounds(n, dist, seed, p_list, save_path, load_path, as_json):
    """Tightness of the inaccuracy estimators against the tropical bound."""

    def run():
        if not 1 <= n <= 512:
            raise click.UsageError("n must be in [1, 512]")
        try:
            ps = [int(p) for p in p_list.split(",") if p.strip()]
        except ValueError:
            raise click.UsageError("--p-list must be comma-separated integers")
        rng = np.random.default_rng(seed)
        if load_path is not None:
            a = xarray_mod.load(load_path)
            if a.ndim != 2 or a.shape[0] != a.shape[1]:
                raise click.UsageError("loaded array must be a square matrix")
        else:
            a = _random_tracked_matrix(rng, n, dist)
        b = _random_tracked_matrix(rng, a.shape[0], dist)
        if save_path is not None:
            xarray_mod.save(a, save_path)
        a_exp = InaccuracyExponentMatrix.from_xarray(a)
        b_exp = InaccuracyExponentMatrix.from_xarray(b)
        ceiling = mixed_tropical(a.values, a_exp, b.values, b_exp)
        report = DemoReport(
            "matmul-bounds", meta={"n": a.shape[0], "dist": dist, "seed": seed}
        )

        def row(name, fn):
            t0 = time.perf_counter()
            est = fn()
            elapsed = time.perf_counter() - t0
            live = np.isfinite(ceiling) & np.isfinite(est) & (ceiling > EXACT_THRESHOLD)
            gap = float(np.mean(ceiling[live] - est[live])) if live.any() else 0.0
            report.add(estimator=name, mean_gap_bits=round(gap, 3), seconds=round(elapsed, 4))

        row("v1", lambda: estimate_v1(a_exp, b_exp))
        row("v2", lambda: estimate_v2(a.values, a_exp, b.values, b_exp))
        for p in ps:
            row(f"holder({p})", lambda p=p: estimate_holder(a.values, a_exp, b.values, b_exp, p))
        row("holder(auto)", lambda: estimate_holder(a.values, a_exp, b.values, b_exp, "auto"))
        _emit(report, as_json)

    _handle_internal(run)


# -- nn training ------------------------------------------------------


def _train_network(epochs: int, width: int, seed: int):
    rng = np.random.default_rng(seed)
    x = XArray.from_exact(rng.normal(size=(8, 2)))
    target = XArray.from_exact(np.tanh(x.values @ rng.normal(size=(2, 1))))
    w1 = XArray.from_exact(rng.normal(size=(2, width)) * 0.5)
    b1 = XArray.from_exact(np.zeros((1, width)))
    w2 = XArray.from_exact(rng.normal(size=(width, 1)) * 0.5)
    b2 = XArray.from_exact(np.zeros((1, 1)))
    lr = sc.from_decimal("0.05")
    log = []
    last = None
    for epoch in range(epochs):
        tape = ad.Tape()
        nx, nt = tape.input(x), tape.input(target)
        nw1, nb1 = tape.input(w1), tape.input(b1)
        nw2, nb2 = tape.input(w2), tape.input(b2)
        h = ad.forward_activation(tape, "relu", ad.forward_linear(tape, nx, nw1, nb1))
        pred = ad.forward_activation(tape, "tanh", ad.forward_linear(tape, h, nw2, nb2))
        loss = ad.mse_loss(tape, pred, nt)
        grads = ad.backward(tape, loss)
        params = [nw1, nb1, nw2, nb2]
        min_grad_bits = min(int(grads[p].bits.min()) for p in params)
        loss_scalar = loss.value.item()
        log.append(
            {
                "epoch": epoch,
                "loss": loss_scalar.value,
                "loss_bits": loss_scalar.exact_bits,
                "min_grad_bits": min_grad_bits,
            }
        )
        last = (tape, pred, [x, target, w1, b1, w2, b2])
        w1, b1, w2, b2 = ad.sgd_step(
            [w1, b1, w2, b2], [grads[p] for p in params], lr
        )
    return log, last


def _forward_replay(width: int):
    def fn(xv, tv, w1, b1, w2, b2):
        h = np.maximum(xv @ w1 + b1, 0.0)
        return np.tanh(h @ w2 + b2)

    return orc.CallableProgram(fn)


@main.command("nn-train")
@click.option("--epochs", default=50, show_default=True, type=int)
@click.option("--width", default=4, show_default=True, type=int)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--json", "as_json", is_flag=True)
def nn_train(epochs, width, seed, as_json):
    """Watch precision decay while a small dense network trains."""

    def run():
        if not 1 <= width <= 16 or not 1 <= epochs <= 10_000:
            raise click.UsageError("width must be in [1, 16], epochs in [1, 10000]")
        log, last = _train_network(epochs, width, seed)
        tape, pred_node, inputs = last
        # the fixed-order array matmul and the plain replay agree to well
        # within the sampled spreads at this scale
        report_check = orc.check_black_bits(
            _forward_replay(width), inputs, [pred_node.value], samples=32, seed=seed
        )
        report = DemoReport(
            "nn-train",
            meta={
                "epochs": epochs,
                "width": width,
                "seed": seed,
                "final_check_passed": report_check.passed,
                "final_check_checked": report_check.checked,
            },
        )
        for entry in log:
            report.add(**entry)
        _emit(report, as_json)

    _handle_internal(run)


# -- JSON op endpoint -------------------------------------------------


def _scalar_from_json(obj) -> XScalar:
    # nonfinite values travel as strings because strict JSON has no
    # literal for them
    v = obj["value"]
    return XScalar(float(v), int(obj["bits"]), bool(obj.get("exact", False)))


def _scalar_to_json(x: XScalar) -> dict:
    v = x.value if math.isfinite(x.value) else repr(x.value)
    return {"value": v, "bits": x.exact_bits, "exact": x.exact}


def _array_from_json(obj) -> XArray:
    return xarray_mod.load(io.BytesIO(base64.b64decode(obj["xarr1"])))


def _array_to_json(a: XArray) -> dict:
    buf = io.BytesIO()
    xarray_mod.save(a, buf)
    return {"xarr1": base64.b64encode(buf.getvalue()).decode("ascii")}


_SCALAR_BINARY = {
    "add": sc.add,
    "sub": sc.sub,
    "mul": sc.mul,
    "div": sc.div,
    "min": sc.min_op,
    "max": sc.max_op,
}

_ARRAY_REDUCE = {
    "sum": xarray_mod.sum_reduce,
    "prod": xarray_mod.prod_reduce,
    "min_reduce": xarray_mod.min_reduce,
    "max_reduce": xarray_mod.max_reduce,
    "mean": xarray_mod.mean,
}


def _dispatch_op(req: dict) -> dict:
    kind = req.get("kind")
    op = req.get("op")
    if kind == "scalar":
        if op in _SCALAR_BINARY:
            x, y = (_scalar_from_json(a) for a in req["args"])
            return _scalar_to_json(_SCALAR_BINARY[op](x, y))
        if op == "from_decimal":
            return _scalar_to_json(sc.from_decimal(req["text"]))
        if op == "from_exact":
            return _scalar_to_json(sc.from_exact(float(req["value"])))
        if op == "unary":
            desc = unary.by_name(req["fn"], req.get("param"))
            return _scalar_to_json(sc.apply_unary(desc, _scalar_from_json(req["arg"])))
        if op == "round":
            return _scalar_to_json(sc.round_op(req["mode"], _scalar_from_json(req["arg"])))
        if op == "neg":
            return _scalar_to_json(sc.neg(_scalar_from_json(req["arg"])))
        if op == "str":
            return {"text": str(_scalar_from_json(req["arg"]))}
        if op == "approx_eq":
            x, y = (_scalar_from_json(a) for a in req["args"])
            return {"comparison": sc.approx_eq(x, y).value}
        raise ValueError(f"unknown scalar op {op!r}")
    if kind == "array":
        if op in ("add", "sub", "mul", "div", "min", "max"):
            a, b = (_array_from_json(x) for x in req["args"])
            return _array_to_json(xarray_mod.map_binary(op, a, b))
        if op == "matmul":
            a, b = (_array_from_json(x) for x in req["args"])
            return _array_to_json(matmul(a, b, req.get("estimator", "v2")))
        if op == "unary":
            desc = unary.by_name(req["fn"], req.get("param"))
            return _array_to_json(xarray_mod.map_unary(desc, _array_from_json(req["arg"])))
        if op in _ARRAY_REDUCE:
            a = _array_from_json(req["arg"])
            axis = req.get("axis")
            return _array_to_json(_ARRAY_REDUCE[op](a, axis))
        if op == "transpose":
            return _array_to_json(_array_from_json(req["arg"]).T)
        if op == "item":
            a = _array_from_json(req["arg"])
            return _scalar_to_json(a.item(*[int(i) for i in req.get("index", [])]))
        if op == "dot":
            a, b = (_array_from_json(x) for x in req["args"])
            return _scalar_to_json(xarray_mod.dot(a, b))
        raise ValueError(f"unknown array op {op!r}")
    raise ValueError(f"unknown request kind {kind!r}")


@main.command("op")
def op_endpoint():
    """Execute JSON operation requests from stdin (one document).

    The input is either a single request object or a list of requests;
    the response mirrors the shape.  Used by language bindings so all
    numeric rules stay in one place.
    """

    def run():
        try:
            payload = json.load(sys.stdin)
        except json.JSONDecodeError as err:
            raise click.UsageError(f"invalid JSON input: {err}")
        try:
            if isinstance(payload, list):
                out = [_dispatch_op(r) for r in payload]
            else:
                out = _dispatch_op(payload)
        except (KeyError, ValueError, TypeError, PreciseumError) as err:
            click.echo(json.dumps({"error": str(err)}))
            sys.exit(1)
        click.echo(json.dumps(out))

    _handle_internal(run)


if __name__ == "__main__":
    main()
