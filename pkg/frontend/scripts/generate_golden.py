"""Regenerate the parity corpus consumed by the TypeScript tests.

Builds 50 deterministic operation requests, runs them through the
installed `preciseum op` endpoint, and stores request/response pairs in
test/golden.json.  Run from the frontend directory:

    python3 scripts/generate_golden.py
"""

import base64
import io
import json
import math
import pathlib
import subprocess
import sys

import numpy as np

from preciseum import XArray, save


def scalar(value, bits, exact=False):
    return {"value": value, "bits": bits, "exact": exact}


def b64(a: XArray) -> dict:
    buf = io.BytesIO()
    save(a, buf)
    return {"xarr1": base64.b64encode(buf.getvalue()).decode("ascii")}


def build_requests():
    reqs = []

    def op(name, **kw):
        reqs.append({"kind": "scalar", "op": name, **kw})

    # binary scalar operations, two flavors each
    op("add", args=[scalar(1.5, 20), scalar(2.25, 30)])
    op("add", args=[scalar(0.1, 53, True), scalar(0.2, 53, True)])
    op("sub", args=[scalar(1.0 + 2.0**-20, 30), scalar(1.0, 30)])
    op("sub", args=[scalar(-7.25, 40), scalar(3.5, 12)])
    op("mul", args=[scalar(6.0, 2), scalar(6.0, 2)])
    op("mul", args=[scalar(7.5, 17), scalar(2.0, 53, True)])
    op("div", args=[scalar(1.0, 53, True), scalar(3.0, 10)])
    op("div", args=[scalar(-22.0, 35), scalar(7.0, 35)])
    op("min", args=[scalar(1.0, 2), scalar(1.5, 1)])
    op("min", args=[scalar(-4.0, 30), scalar(4.0, 30)])
    op("max", args=[scalar(1.0, 40), scalar(100.0, 12)])
    op("max", args=[scalar(2.5, 8), scalar(2.5, 24)])

    for text in ("0.1", "2e-14", "-1000", "3.14159", "1e308"):
        op("from_decimal", text=text)
    op("from_exact", value=0.75)
    op("from_exact", value=-2.5)

    for fn, value, bits in (
        ("sin", 1.0, 30),
        ("cos", 2.5, 40),
        ("exp", 10.0, 30),
        ("ln", 7.0, 25),
        ("sqrt", 2.0, 50),
        ("tanh", 0.5, 30),
        ("atan", 3.0, 20),
        ("sigmoid", -1.0, 35),
    ):
        op("unary", fn=fn, arg=scalar(value, bits))
    op("unary", fn="scale", param=3.0, arg=scalar(0.1, 50))
    op("unary", fn="add_const", param=1.0, arg=scalar(0.5, 30))
    op("unary", fn="pow_int", param=3, arg=scalar(2.0, 25))

    op("round", mode="floor", arg=scalar(2.75, 30))
    op("round", mode="ceil", arg=scalar(-1.5, 40))
    op("round", mode="nearest", arg=scalar(0.5, 20))

    op("neg", arg=scalar(2.5, 19))
    op("neg", arg=scalar(-0.125, 53, True))

    op("str", arg=scalar(2e-14, 52))
    op("str", arg=scalar(math.pi, 20))

    op("approx_eq", args=[scalar(1.25, 53, True), scalar(1.25, 53, True)])
    op("approx_eq", args=[scalar(1.0, 10), scalar(1.0005, 10)])
    op("approx_eq", args=[scalar(1.0, 53, True), scalar(2.0, 53, True)])

    rng = np.random.default_rng(42)
    a = XArray.with_bits(rng.normal(size=(3, 3)) * 4.0, rng.integers(8, 41, size=(3, 3)))
    b = XArray.with_bits(rng.normal(size=(3, 3)) * 4.0, rng.integers(8, 41, size=(3, 3)))
    pos = XArray.with_bits(np.abs(rng.normal(size=(2, 4))) + 0.5, 30)
    v1 = XArray.with_bits(rng.normal(size=4), 25)
    v2 = XArray.with_bits(rng.normal(size=4), 35)

    def arr(name, **kw):
        reqs.append({"kind": "array", "op": name, **kw})

    arr("add", args=[b64(a), b64(b)])
    arr("mul", args=[b64(a), b64(b)])
    arr("matmul", estimator="v2", args=[b64(a), b64(b)])
    arr("matmul", estimator="v1", args=[b64(a), b64(b)])
    arr("unary", fn="sqrt", arg=b64(pos))
    arr("sum", arg=b64(a))
    arr("mean", arg=b64(pos), axis=0)
    arr("min_reduce", arg=b64(a), axis=1)
    arr("item", arg=b64(a), index=[2, 1])
    arr("dot", args=[b64(v1), b64(v2)])

    assert len(reqs) == 50, len(reqs)
    return reqs


def main():
    requests = build_requests()
    proc = subprocess.run(
        ["preciseum", "op"],
        input=json.dumps(requests),
        capture_output=True,
        text=True,
        check=True,
    )
    responses = json.loads(proc.stdout)
    assert len(responses) == len(requests)
    out = pathlib.Path(__file__).resolve().parent.parent / "test" / "golden.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps({"requests": requests, "responses": responses}, indent=2) + "\n")
    print(f"wrote {len(requests)} cases to {out}", file=sys.stderr)


if __name__ == "__main__":
    main()
