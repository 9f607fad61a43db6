import csv
import json
import math
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from fermicorr.cli import main
from fermicorr.hermitian_linalg import HermitianMatrix

from conftest import TC, random_psd

MODEL = {"shape": "gaussian", "omega0_rad_per_s": 3e15, "coherence_time_s": TC,
         "group_speed_m_per_s": 1e6, "axis": [0, 0, 1], "intensity_per_m2_s": 0.05 / (TC / 8)}


def write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


def read_curve(path):
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# config_hash=")
    rows = list(csv.reader(lines[2:]))
    assert lines[1] == "tau_s,g2_normalized"
    return np.array(rows, dtype=float)


@pytest.fixture
def files(tmp_path):
    return {"model": write(tmp_path / "model.json", MODEL),
            "detector": write(tmp_path / "det.json",
                              {"eta": 1.0, "area_m2": 1.0, "bin_width_s": TC / 8}),
            "dir": tmp_path}


class TestCurve:
    def test_default_grid(self, files, tmp_path):
        out = tmp_path / "c.csv"
        assert main(["curve", "--model", files["model"], "--out", str(out)]) == 0
        rows = read_curve(out)
        assert rows.shape == (601, 2)
        assert rows[300, 0] == 0.0 and rows[300, 1] == 0.0
        assert rows[0, 0] == pytest.approx(-3 * TC) and rows[-1, 1] > 0.999

    def test_rerun_is_byte_identical(self, files, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for out in (a, b):
            main(["curve", "--model", files["model"], "--out", str(out)])
        assert a.read_bytes() == b.read_bytes()

    def test_half_rise_from_bandwidth(self, files, tmp_path):
        model2 = tmp_path / "m2.json"
        assert main(["coherence-time", "0.2eV", "--model", files["model"],
                     "--out", str(model2)]) == 0
        tc = json.loads(model2.read_text())["coherence_time_s"]
        out = tmp_path / "c.csv"
        main(["curve", "--model", str(model2), "--tau-min", "0", "--tau-max", str(3 * tc),
              "--n-points", "3001", "--out", str(out)])
        rows = read_curve(out)
        crossing = rows[np.argmax(rows[:, 1] >= 0.5), 0]
        expected = 2.07e-14 * math.sqrt(math.log(2) / math.pi)
        assert abs(crossing - expected) <= 0.2 * expected

    def test_bad_range(self, files, tmp_path):
        assert main(["curve", "--model", files["model"], "--tau-min", "1", "--tau-max", "0",
                     "--out", str(tmp_path / "x.csv")]) == 2


class TestCoherenceTime:
    def test_stdout(self, capsys):
        assert main(["coherence-time", "0.2eV"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert 2.0e-14 <= payload["coherence_time_s"] <= 2.1e-14
        assert set(payload) >= {"config_hash", "seed", "tool_version"}

    @pytest.mark.parametrize("text", ["0eV", "-1eV", "abc"])
    def test_bad_bandwidth(self, text, capsys):
        assert main(["coherence-time", "--", text]) == 2


class TestCheck:
    def seven_points(self, tmp_path):
        pts = [{"r": [0, 0, 0], "t": float(t)}
               for t in TC * np.array([0.0, 0.3, 2.0, 2.4, 5.0, 5.5, 7.0])]
        return write(tmp_path / "pts.json", pts)

    def test_example_partition(self, files, tmp_path):
        out = tmp_path / "r.json"
        code = main(["check", "--model", files["model"], "--points", self.seven_points(tmp_path),
                     "--partition", "1,2|3,5,7|4|6", "--out", str(out)])
        assert code == 0
        report = json.loads(out.read_text())["reports"][0]
        assert report["partition"] == [[1, 2], [3, 5, 7], [4], [6]]
        assert report["holds"] and report["lhs"] <= report["rhs"] * (1 + 1e-10)
        assert set(report) == {"partition", "lhs", "rhs", "slack", "holds", "is_equality",
                               "equality_diagnosis", "tolerance"}

    def test_default_is_product_of_singles(self, files, tmp_path):
        out = tmp_path / "r.json"
        main(["check", "--model", files["model"], "--points", self.seven_points(tmp_path),
              "--out", str(out)])
        report = json.loads(out.read_text())["reports"][0]
        assert report["rhs"] == pytest.approx(MODEL["intensity_per_m2_s"] ** 7, rel=1e-12)
        assert len(report["partition"]) == 7

    def test_matrix_input(self, tmp_path):
        m = HermitianMatrix(random_psd(np.random.default_rng(1), 4))
        path = write(tmp_path / "m.json", m.to_json())
        assert main(["check", "--matrix", path, "--partition", "1,3|2,4",
                     "--out", str(tmp_path / "r.json")]) == 0

    def test_non_hermitian_is_config_error(self, tmp_path, capsys):
        path = write(tmp_path / "m.json", {"dim": 2, "re": [[1, 0.5], [0.2, 1]],
                                           "im": [[0, 0], [0, 0]]})
        assert main(["check", "--matrix", path, "--out", str(tmp_path / "r.json")]) == 2
        assert "ermitian" in capsys.readouterr().err

    def test_violation_exit_code(self, tmp_path):
        path = write(tmp_path / "m.json", {"dim": 3, "re": [[1, 2, 1], [2, 1, 1], [1, 1, 1]],
                                           "im": [[0] * 3] * 3})
        out = tmp_path / "r.json"
        assert main(["check", "--matrix", path, "--partition", "1,2|3", "--out", str(out)]) == 1
        assert json.loads(out.read_text())["reports"][0]["holds"] is False

    def test_missing_file_is_io_error(self, tmp_path):
        assert main(["check", "--matrix", str(tmp_path / "nope.json"),
                     "--out", str(tmp_path / "r.json")]) == 3

    def test_unwritable_output_is_io_error(self, files, tmp_path):
        assert main(["curve", "--model", files["model"],
                     "--out", str(tmp_path / "no" / "dir" / "c.csv")]) == 3

    def test_bad_partition(self, files, tmp_path):
        assert main(["check", "--model", files["model"], "--points", self.seven_points(tmp_path),
                     "--partition", "1,2|3", "--out", str(tmp_path / "r.json")]) == 2


class TestSweepAndCrosscheck:
    def matrix(self, tmp_path, k=4, seed=2):
        m = HermitianMatrix(random_psd(np.random.default_rng(seed), k))
        return write(tmp_path / "m.json", m.to_json())

    def test_sweep(self, tmp_path):
        out = tmp_path / "s.json"
        assert main(["sweep", "--matrix", self.matrix(tmp_path), "--out", str(out)]) == 0
        assert len(json.loads(out.read_text())["reports"]) == 15

    def test_sweep_limit(self, tmp_path):
        assert main(["sweep", "--matrix", self.matrix(tmp_path, k=5), "--max-k", "4",
                     "--out", str(tmp_path / "s.json")]) == 2

    def test_crosscheck(self, tmp_path):
        out = tmp_path / "x.json"
        assert main(["crosscheck", "--matrix", self.matrix(tmp_path, k=5), "--split", "2",
                     "--out", str(out)]) == 0
        payload = json.loads(out.read_text())
        assert payload["det_D"] == pytest.approx(payload["report"]["lhs"], rel=1e-10)
        assert payload["det_Dprime"] == pytest.approx(payload["report"]["rhs"], rel=1e-10)


class TestSample:
    def args(self, files, out, n="200", seed="7"):
        return ["sample", "--model", files["model"], "--detector", files["detector"],
                "--grid", "n=16", "--n-samples", n, "--seed", seed, "--out", str(out)]

    def test_deterministic(self, files, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        assert main(self.args(files, a)) == 0
        assert main(self.args(files, b)) == 0
        assert a.read_bytes() == b.read_bytes()
        payload = json.loads(a.read_text())
        assert payload["lags"] == list(range(1, 16)) and payload["seed"] == 7
        assert len(payload["g2"]) == len(payload["stderr"]) == 15

    def test_seed_changes_output(self, files, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        main(self.args(files, a))
        main(self.args(files, b, seed="8"))
        ha, hb = json.loads(a.read_text()), json.loads(b.read_text())
        assert ha["config_hash"] != hb["config_hash"]
        assert ha["pair_counts"] != hb["pair_counts"]

    def test_sample_log(self, files, tmp_path):
        log = tmp_path / "log.csv"
        main(self.args(files, tmp_path / "a.json", n="20") + ["--sample-log", str(log)])
        lines = log.read_text().splitlines()
        assert lines[0] == "sample_index,bin_indices" and len(lines) == 21

    def test_zero_samples(self, files, tmp_path):
        assert main(self.args(files, tmp_path / "a.json", n="0")) == 2

    def test_spectrum_out_of_range(self, files, tmp_path):
        hot = dict(MODEL, intensity_per_m2_s=0.9 / (TC / 8))
        files["model"] = write(tmp_path / "hot.json", hot)
        assert main(self.args(files, tmp_path / "a.json")) == 4

    def test_conflicting_bin_width(self, files, tmp_path):
        args = self.args(files, tmp_path / "a.json")
        args[args.index("n=16")] = "n=16,dt=1e-20"
        assert main(args) == 2


def test_console_script(tmp_path):
    out = subprocess.run([sys.executable, "-m", "fermicorr.cli", "coherence-time", "0.2eV"],
                         capture_output=True, text=True, check=True)
    assert json.loads(out.stdout)["tool_version"]
    assert subprocess.run([sys.executable, "-m", "fermicorr.cli", "bogus"],
                          capture_output=True).returncode == 2


def test_golden_64_bin_run(tmp_path):
    data = Path(__file__).parent / "data"
    out = tmp_path / "g2.json"
    code = main(["sample", "--model", str(data / "model_64bin.json"),
                 "--detector", str(data / "detector_64bin.json"), "--grid", "n=64",
                 "--n-samples", "100000", "--seed", "42", "--out", str(out)])
    assert code == 0
    assert out.read_text() == (data / "sample_64bin_seed42.json").read_text()
