import json
import math
import os

import pandas as pd
import pytest

from poolrate import __version__
from poolrate.cli import get_arguments, run_command
from poolrate.converse import CONVERSE_COLUMNS
from poolrate.rd import rate_at_distortion
from poolrate.report import MANIFEST_FILE, RunManifest, emit_report
from poolrate.util import SOLUTION_FILE, file_sha256


@pytest.fixture(scope="module")
def mid_d(t1_asym_curve):
    return round(0.5 * (t1_asym_curve.d_min + t1_asym_curve.d_max), 6)


def read_manifest(out):
    with open(os.path.join(out, MANIFEST_FILE)) as handle:
        return json.load(handle)


class TestArguments:
    def test_defaults(self, t1_path):
        args = get_arguments(["converse", t1_path, "--theorem", "2", "--d", "0.3"])
        assert args["seed"] == 12345
        assert args["k"] == [100]
        assert args["budget"] is None

    def test_lists(self, t1_path):
        args = get_arguments(["oracle", t1_path, "--n", "1,2", "--d", "0.3,0.5"])
        assert args["n"] == [1, 2]
        assert args["d"] == [0.3, 0.5]

    @pytest.mark.parametrize(
        "argv",
        [
            ["converse", "t1.json", "--theorem", "5"],
            ["simulate", "t1.json", "--k", "2", "--strategy", "best", "--d", "0.5"],
            ["rd-solve", "t1.json"],
            ["unknown", "t1.json"],
        ],
    )
    def test_bad_arguments(self, argv):
        assert run_command(argv) == 2


class TestExitCodes:
    def test_valid_instance(self, t1_path, tmp_path):
        out = str(tmp_path)
        assert run_command(["validate", t1_path, "--out", out]) == 0
        assert os.path.exists(os.path.join(out, "validation.csv"))
        assert read_manifest(out)["instance_sha256"] == file_sha256(t1_path)

    def test_invalid_instance(self, t1_path, tmp_path):
        with open(t1_path) as handle:
            data = json.load(handle)
        data["n"] = 3
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(data))
        assert run_command(["validate", str(path), "--out", str(tmp_path / "out")]) == 2

    def test_missing_file(self, tmp_path):
        assert run_command(["validate", str(tmp_path / "none.json"), "--out", str(tmp_path)]) == 2

    def test_distortion_out_of_range(self, t1_asym_path, tmp_path):
        argv = ["dispersion", t1_asym_path, "--d", "5.0", "--out", str(tmp_path)]
        assert run_command(argv) == 2

    def test_simulation_needs_a_solution(self, t1_asym_path, tmp_path):
        argv = ["simulate", t1_asym_path, "--k", "2", "--strategy", "per-letter-S*", "--d", "0.4"]
        assert run_command(argv + ["--out", str(tmp_path)]) == 3

    def test_budget(self, t1_path, tmp_path, monkeypatch):
        monkeypatch.setenv("POOLRATE_BUDGET", "10")
        argv = ["oracle", t1_path, "--n", "1", "--d", "0.5", "--out", str(tmp_path)]
        assert run_command(argv) == 4


class TestPipelines:
    def test_rd_solve_then_simulate(self, t1_asym_path, tmp_path, mid_d):
        out = str(tmp_path)
        assert run_command(["rd-solve", t1_asym_path, "--target-d", str(mid_d), "--out", out]) == 0
        assert os.path.exists(os.path.join(out, SOLUTION_FILE))
        argv = [
            "simulate", t1_asym_path, "--k", "5", "--trials", "200",
            "--strategy", "per-letter-S*", "--d", str(mid_d), "--out", out,
        ]
        assert run_command(argv) == 0
        frame = pd.read_csv(os.path.join(out, "simulation.csv"))
        assert frame["strategy"].tolist() == ["per-letter-S*"]
        assert frame["trials"].tolist() == [200]

    def test_solution_of_another_instance(self, t1_path, t1_asym_path, tmp_path, mid_d):
        out = str(tmp_path)
        assert run_command(["rd-solve", t1_asym_path, "--target-d", str(mid_d), "--out", out]) == 0
        argv = ["simulate", t1_path, "--k", "2", "--strategy", "per-letter-S*", "--d", "0.5"]
        assert run_command(argv + ["--out", out]) == 3

    def test_dispersion(self, t1_asym_path, tmp_path, mid_d):
        out = str(tmp_path)
        assert run_command(["dispersion", t1_asym_path, "--d", str(mid_d), "--out", out]) == 0
        with open(os.path.join(out, "dispersion.json")) as handle:
            report = json.load(handle)
        assert report["V"] > 0
        frame = pd.read_csv(os.path.join(out, "dispersion.csv"), dtype={"run_hash": str})
        assert report["run_hash"] == frame["run_hash"][0]

    def test_rate_bound_files(self, t1_asym_path, tmp_path, mid_d):
        out = str(tmp_path)
        argv = [
            "converse", t1_asym_path, "--theorem", "2", "--d", str(mid_d),
            "--k", "10,100", "--variant", "both", "--out", out,
        ]
        assert run_command(argv) == 0
        frame = pd.read_csv(os.path.join(out, "converse.csv"))
        assert len(frame) == 4
        assert list(frame.columns) == CONVERSE_COLUMNS + ["bound_without_o_term", "run_hash"]
        assert frame["m"].tolist() == [2] * 4
        assert os.path.exists(os.path.join(out, "converse_vs_k.svg"))
        manifest = read_manifest(out)
        assert manifest["tool_version"] == __version__
        assert "converse.csv" in manifest["outputs"]
        assert manifest["finished"] is not None

        with open(os.path.join(out, "converse.csv"), "rb") as handle:
            first = handle.read()
        assert run_command(argv) == 0
        with open(os.path.join(out, "converse.csv"), "rb") as handle:
            assert handle.read() == first

    def test_label_bound_files(self, t1_asym_path, tmp_path, mid_d):
        out = str(tmp_path)
        argv = ["converse", t1_asym_path, "--theorem", "1", "--d", str(mid_d), "--n", "0,1,2", "--out", out]
        assert run_command(argv) == 0
        frame = pd.read_csv(os.path.join(out, "theorem1.csv"))
        assert frame["n"].tolist() == [0, 1, 2]
        assert os.path.exists(os.path.join(out, "theorem1_vs_n.svg"))
        converse = pd.read_csv(os.path.join(out, "converse.csv"))
        assert converse["n"].tolist() == [0, 1, 2]
        assert converse["theorem"].astype(str).tolist() == ["1"] * 3

    def test_distortion_bound(self, t1_asym_path, t1_asym_curve, tmp_path, mid_d):
        rate_bits = rate_at_distortion(t1_asym_curve, mid_d) / math.log(2.0)
        argv = [
            "converse", t1_asym_path, "--theorem", "3", "--rate", f"{rate_bits:.6f}",
            "--k", "10", "--out", str(tmp_path),
        ]
        assert run_command(argv) == 0
        frame = pd.read_csv(tmp_path / "converse.csv")
        assert frame["theorem"].astype(str).tolist() == ["3"]

    def test_theorem_arguments(self, t1_asym_path, tmp_path):
        assert run_command(["converse", t1_asym_path, "--theorem", "3", "--out", str(tmp_path)]) == 2
        assert run_command(["converse", t1_asym_path, "--theorem", "2", "--out", str(tmp_path)]) == 2

    def test_oracle_files(self, t1_path, tmp_path):
        out = str(tmp_path)
        argv = ["oracle", t1_path, "--n", "1,2", "--d", "0.5", "--eps-grid", "0.05", "--out", out]
        assert run_command(argv) == 0
        frame = pd.read_csv(os.path.join(out, "enumeration.csv"))
        assert frame["min_excess_prob"].tolist() == pytest.approx([0.04, 0.2])
        assert pd.read_csv(os.path.join(out, "n_star.csv"))["n_star"].tolist() == [1]

    def test_report_bundle(self, t1_asym_path, tmp_path, mid_d):
        out = str(tmp_path)
        argv = [
            "report", t1_asym_path, "--d", str(mid_d), "--k-grid", "10,50",
            "--trials", "200", "--out", out,
        ]
        assert run_command(argv) == 0
        for name in (
            "rd_curve.csv",
            "rd_diagnostics.csv",
            "dispersion.csv",
            "dispersion.json",
            "converse.csv",
            "enumeration.csv",
            "simulation.csv",
            "rd_curve.svg",
            "converse_vs_k.svg",
            "theorem1_vs_n.svg",
            MANIFEST_FILE,
        ):
            assert os.path.exists(os.path.join(out, name)), name
        header = pd.read_csv(os.path.join(out, "rd_curve.csv")).columns
        assert list(header) == ["lambda", "distortion", "rate_nats", "rate_bits", "run_hash"]


class TestEmitReport:
    def test_manifest_only(self, tmp_path):
        manifest = RunManifest(tool_version=__version__, instance_sha256="", config={}, seed=12345)
        written = emit_report({}, str(tmp_path), manifest)
        assert written == [MANIFEST_FILE]
        assert read_manifest(str(tmp_path))["outputs"] == []

    def test_run_hash_ignores_timestamps(self):
        first = RunManifest(__version__, "abc", {"d": 0.3}, 1, started="2020-01-01T00:00:00+00:00")
        second = RunManifest(__version__, "abc", {"d": 0.3}, 1, started="2021-01-01T00:00:00+00:00")
        assert first.run_hash == second.run_hash
        assert first.run_hash != RunManifest(__version__, "abc", {"d": 0.3}, 2).run_hash

    def test_run_hash_ignores_paths(self):
        config = {"instance": "a/t1.json", "d": 0.3, "out": "first", "verbose": False}
        moved = dict(config, instance="b/t1.json", out="second", verbose=True)
        first = RunManifest(__version__, "abc", config, 1)
        assert first.run_hash == RunManifest(__version__, "abc", moved, 1).run_hash
        assert first.run_hash != RunManifest(__version__, "abc", dict(config, d=0.4), 1).run_hash
