import json
import math

import pytest

from texlab.cli import main


def run(args):
    return main(args)


class TestGateIdCommand:
    def test_help_exits_zero(self, capsys):
        with pytest.raises(SystemExit) as exc:
            run(["gate-id", "--help"])
        assert exc.value.code == 0
        assert "gate-id" in capsys.readouterr().out

    def test_single_layer_consistent(self, tmp_path):
        out = tmp_path / "single.json"
        code = run(
            ["gate-id", "--layer", "single", "--samples", "200000", "--seed", "3",
             "--out", str(out)]
        )
        assert code == 0
        data = json.loads(out.read_text())
        assert data["report"]["verdict"] == "single_qubit_consistent"
        errs = [data["estimates"][f"std_err_{k}"] for k in ("c", "t", "c_h", "t_h")]
        vals = [data["estimates"][f"sigma_{k}"] for k in ("c", "t", "c_h", "t_h")]
        assert all(abs(v - 1.0) <= 3 * e for v, e in zip(vals, errs))

    def test_cnot_with_reference_c_detected(self, tmp_path):
        out = tmp_path / "cnot.json"
        code = run(
            ["gate-id", "--layer", "cnot", "--psi", "c", "--samples", "200000",
             "--seed", "5", "--out", str(out)]
        )
        assert code == 0
        data = json.loads(out.read_text())
        assert data["report"]["verdict"] == "cnot_detected"
        est = data["estimates"]
        assert abs(est["sigma_t"] - 4.0 / 3.0) <= 3 * est["std_err_t"]

    def test_manifest_written(self, tmp_path):
        out = tmp_path / "run.json"
        run(["gate-id", "--layer", "single", "--samples", "2000", "--seed", "1",
             "--out", str(out)])
        manifest = json.loads((tmp_path / "run.json.manifest.json").read_text())
        assert manifest["seed"] == 1
        assert manifest["config"]["samples"] == 2000
        assert "wall_time_s" in manifest

    def test_bad_basis_is_usage_error(self, capsys):
        assert run(["gate-id", "--basis", "not-angles", "--out", "/dev/null"]) == 2
        assert "error" in capsys.readouterr().err


class TestRoofCommand:
    def test_pure_state_closed_form_path(self, tmp_path):
        out = tmp_path / "roof.json"
        code = run(["roof", "--state", "ket4", "--free-set", "orth:1", "--out", str(out)])
        assert code == 0
        data = json.loads(out.read_text())
        assert data["result"]["method"] == "closed_form"
        assert data["result"]["value"] == "inf"

    def test_imaginarity_extreme_state(self, tmp_path):
        out = tmp_path / "imag.json"
        code = run(
            ["roof", "--state", "psi-plus", "--free-set", "real", "--seed", "2",
             "--out", str(out)]
        )
        assert code == 0
        data = json.loads(out.read_text())
        assert abs(data["result"]["value"] - math.log(2.0)) < 2e-3

    def test_trials_report_mode_and_quantiles(self, tmp_path):
        out = tmp_path / "trials.json"
        code = run(
            ["roof", "--state", "psi-plus", "--free-set", "real", "--trials", "30",
             "--seed", "4", "--out", str(out)]
        )
        assert code == 0
        data = json.loads(out.read_text())
        assert len(data["values"]) == 30
        assert "mode" in data and "quantile_low" in data and "quantile_high" in data

    def test_state_file_round_trip(self, tmp_path):
        state = {
            "dim": 2,
            "matrix": [[[0.5, 0.0], [0.0, -0.25]], [[0.0, 0.25], [0.5, 0.0]]],
        }
        path = tmp_path / "state.json"
        path.write_text(json.dumps(state))
        out = tmp_path / "roof.json"
        code = run(
            ["roof", "--state", str(path), "--free-set", "incoherent", "--seed", "1",
             "--maxiter", "200", "--out", str(out)]
        )
        assert code == 0
        data = json.loads(out.read_text())
        assert 0.0 < data["result"]["value"] < math.log(2.0)

    def test_invalid_state_file_is_usage_error(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"dim": 2, "matrix": [[[0.9, 0], [0, 0]], [[0, 0], [0.9, 0]]]}))
        assert run(["roof", "--state", str(path), "--out", "/dev/null"]) == 2


class TestMonotonicityCommand:
    def test_csv_and_determinism(self, tmp_path):
        args = ["monotonicity", "--m", "1", "--rounds", "1", "--trials", "2", "--k", "8",
                "--maxiter", "40", "--popsize", "8", "--seed", "7"]
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        assert run(args + ["--out", str(out1)]) == 0
        assert run(args + ["--out", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()
        lines = out1.read_text().strip().split("\n")
        assert lines[0] == "Iteration,Measure,Measure_Low,Measure_High"
        assert lines[1].split(",")[1] == "inf"

    def test_channel_dump(self, tmp_path):
        out = tmp_path / "walk.csv"
        chan = tmp_path / "channels.json"
        run(["monotonicity", "--m", "2", "--rounds", "1", "--trials", "1", "--k", "4",
             "--maxiter", "20", "--popsize", "8", "--seed", "3",
             "--out", str(out), "--channels-out", str(chan)])
        blobs = json.loads(chan.read_text())
        assert len(blobs) == 1
        assert blobs[0]["D"] == 4 and blobs[0]["m"] == 2


class TestViolationCommand:
    def test_single_point(self, tmp_path):
        out = tmp_path / "v.json"
        assert run(["violation", "--D", "2", "--a", "0.75", "--out", str(out)]) == 0
        data = json.loads(out.read_text())
        assert data["violated"] is True
        assert abs(data["violation_metric"] - 1.0607) < 5e-3

    def test_default_grid(self, tmp_path):
        out = tmp_path / "grid.json"
        assert run(["violation", "--grid", "default", "--out", str(out)]) == 0
        data = json.loads(out.read_text())
        assert [d["D"] for d in data] == [2, 3, 10]
        assert all(d["violated"] for d in data)

    def test_out_of_range_is_numerical_failure(self, capsys):
        assert run(["violation", "--D", "2", "--a", "0.3", "--out", "/dev/null"]) == 3
        assert "numerical failure" in capsys.readouterr().err

    def test_missing_args_usage_error(self):
        assert run(["violation", "--out", "/dev/null"]) == 2


class TestUsageContract:
    def test_unknown_subcommand_exits_two(self):
        with pytest.raises(SystemExit) as exc:
            run(["frobnicate"])
        assert exc.value.code == 2

    def test_negative_threads_rejected(self):
        with pytest.raises(SystemExit) as exc:
            run(["violation", "--grid", "default", "--threads", "0"])
        assert exc.value.code == 2

    def test_gate_id_determinism(self, tmp_path):
        args = ["gate-id", "--layer", "cnot", "--samples", "5000", "--seed", "11"]
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        run(args + ["--out", str(a)])
        run(args + ["--out", str(b)])
        assert a.read_bytes() == b.read_bytes()
