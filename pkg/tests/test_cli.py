"""Command-line interface contracts and the JSON op endpoint."""

import base64
import io
import json

import numpy as np
import pytest
from click.testing import CliRunner

from preciseum import XArray, load, save
from preciseum.cli import main


@pytest.fixture()
def runner():
    return CliRunner()


def _b64(a: XArray) -> dict:
    buf = io.BytesIO()
    save(a, buf)
    return {"xarr1": base64.b64encode(buf.getvalue()).decode("ascii")}


def _unb64(obj) -> XArray:
    return load(io.BytesIO(base64.b64decode(obj["xarr1"])))


class TestQuadratic:
    def test_naive_masks_small_root_entirely(self, runner):
        res = runner.invoke(main, ["quadratic", "--method", "naive"])
        assert res.exit_code == 0
        assert "?.???????????????e-14" in res.output

    def test_stable_keeps_small_root(self, runner):
        res = runner.invoke(main, ["quadratic", "--method", "stable"])
        assert res.exit_code == 0
        assert "2.00000000000000?e-14" in res.output

    def test_json_output(self, runner):
        res = runner.invoke(main, ["quadratic", "--json"])
        assert res.exit_code == 0
        doc = json.loads(res.output)
        assert doc["demo"] == "quadratic"
        roots = {row["root"]: row for row in doc["rows"]}
        assert set(roots) == {"x1", "x2"}
        assert roots["x2"]["scientific16"] == "2.00000000000000?e-14"

    def test_zero_leading_coefficient(self, runner):
        res = runner.invoke(main, ["quadratic", "--a", "0"])
        assert res.exit_code == 2

    def test_bad_coefficient_text(self, runner):
        res = runner.invoke(main, ["quadratic", "--b", "zebra"])
        assert res.exit_code == 2


class TestArcsin:
    def test_default_run(self, runner):
        res = runner.invoke(main, ["arcsin", "--json"])
        assert res.exit_code == 0
        row = json.loads(res.output)["rows"][0]
        assert row["input_bits"] == 20
        assert row["reliable_digits"] == 3

    def test_three_digit_input(self, runner):
        res = runner.invoke(main, ["arcsin", "--x", "0.999", "--digits", "3", "--json"])
        row = json.loads(res.output)["rows"][0]
        assert row["reliable_digits"] == 1

    def test_domain_violation(self, runner):
        res = runner.invoke(main, ["arcsin", "--x", "1.5"])
        assert res.exit_code == 2

    def test_digits_validated(self, runner):
        res = runner.invoke(main, ["arcsin", "--digits", "0"])
        assert res.exit_code == 2


class TestMatmulBounds:
    def test_reports_all_estimators(self, runner):
        res = runner.invoke(main, ["matmul-bounds", "--n", "6", "--json"])
        assert res.exit_code == 0
        doc = json.loads(res.output)
        names = [row["estimator"] for row in doc["rows"]]
        assert names[:2] == ["v1", "v2"]
        assert any(n.startswith("holder") for n in names)
        for row in doc["rows"]:
            assert row["mean_gap_bits"] >= -1e-6

    def test_n_validated(self, runner):
        assert runner.invoke(main, ["matmul-bounds", "--n", "0"]).exit_code == 2
        assert runner.invoke(main, ["matmul-bounds", "--n", "513"]).exit_code == 2

    def test_save_then_load(self, runner, tmp_path):
        path = str(tmp_path / "a.xarr")
        res = runner.invoke(main, ["matmul-bounds", "--n", "4", "--save", path])
        assert res.exit_code == 0
        assert load(path).shape == (4, 4)
        res = runner.invoke(main, ["matmul-bounds", "--load", path])
        assert res.exit_code == 0


class TestNnTrain:
    def test_short_run(self, runner):
        res = runner.invoke(main, ["nn-train", "--epochs", "3", "--json"])
        assert res.exit_code == 0
        doc = json.loads(res.output)
        assert doc["meta"]["final_check_passed"] is True
        assert len(doc["rows"]) == 3
        for row in doc["rows"]:
            assert row["loss_bits"] > 0 and row["min_grad_bits"] > 0

    def test_width_validated(self, runner):
        assert runner.invoke(main, ["nn-train", "--width", "0"]).exit_code == 2


class TestOpEndpoint:
    def test_scalar_batch(self, runner):
        req = [
            {"kind": "scalar", "op": "add", "args": [
                {"value": 1.5, "bits": 20}, {"value": 2.25, "bits": 30}]},
            {"kind": "scalar", "op": "from_decimal", "text": "0.1"},
            {"kind": "scalar", "op": "str", "arg": {"value": 2e-14, "bits": 52}},
        ]
        res = runner.invoke(main, ["op"], input=json.dumps(req))
        assert res.exit_code == 0
        out = json.loads(res.output)
        assert out[0]["value"] == 3.75 and out[0]["bits"] == 21
        assert out[1]["bits"] == 52
        assert out[2]["text"] == "2.00000000000000?e-14"

    def test_single_request(self, runner):
        req = {"kind": "scalar", "op": "neg", "arg": {"value": 2.0, "bits": 10}}
        res = runner.invoke(main, ["op"], input=json.dumps(req))
        assert json.loads(res.output)["value"] == -2.0

    def test_array_matmul(self, runner):
        a = XArray.with_bits(np.arange(1.0, 5.0).reshape(2, 2), 30)
        b = XArray.from_exact(np.eye(2))
        req = {"kind": "array", "op": "matmul", "args": [_b64(a), _b64(b)]}
        res = runner.invoke(main, ["op"], input=json.dumps(req))
        assert res.exit_code == 0
        out = _unb64(json.loads(res.output))
        assert np.array_equal(out.values, a.values)

    def test_array_item(self, runner):
        a = XArray.with_bits(np.arange(4.0).reshape(2, 2), 12)
        req = {"kind": "array", "op": "item", "arg": _b64(a), "index": [1, 1]}
        res = runner.invoke(main, ["op"], input=json.dumps(req))
        out = json.loads(res.output)
        assert out["value"] == 3.0 and out["bits"] == 12

    def test_unknown_op_fails_cleanly(self, runner):
        res = runner.invoke(main, ["op"], input=json.dumps({"kind": "scalar", "op": "zzz"}))
        assert res.exit_code == 1
        assert "error" in json.loads(res.output)

    def test_invalid_json_is_usage_error(self, runner):
        res = runner.invoke(main, ["op"], input="{nope")
        assert res.exit_code == 2
