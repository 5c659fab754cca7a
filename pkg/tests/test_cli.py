"""Command-line driver: exit codes, artifacts, determinism."""

import json

import pytest

from g2lab import cli


def run(argv):
    return cli.main(argv)


class TestVerify:
    def test_default_passes(self, tmp_path):
        out = tmp_path / "v"
        assert run(["verify", "--out", str(out)]) == 0
        report = json.loads((out / "verify.json").read_text())
        assert report["failed"] == 0
        for check in report["checks"]:
            assert {"check", "margin", "tolerance", "pass"} <= set(check)
            assert check["pass"]
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["tool"] == "g2lab" and "config_hash" in manifest

    def test_perturbation_fails(self, tmp_path):
        out = tmp_path / "v"
        assert run(["verify", "--out", str(out), "--perturb", "true"]) == 1
        report = json.loads((out / "verify.json").read_text())
        assert report["failed"] > 0


class TestArtifacts:
    def test_flow_csv(self, tmp_path):
        out = tmp_path / "f"
        assert run(["flow", "--metric", "bggg", "--out", str(out)]) == 0
        lines = (out / "flow.csv").read_text().splitlines()
        assert lines[0].startswith("# config_hash=")
        assert lines[1].split(",")[0] == "t[arclength]"
        assert len(lines) > 10

    def test_shoot_and_classification(self, tmp_path):
        out = tmp_path / "s"
        code = run(["shoot", "--metric", "bggg", "--f1p", "1.0", "--g1p", "0.25",
                    "--out", str(out), "--tmax", "200"])
        assert code == 0
        report = json.loads((out / "classification.json").read_text())
        assert report["verdict"] == "GlobalBounded"

    def test_export_profile(self, tmp_path):
        out = tmp_path / "e"
        assert run(["export", "--metric", "bs", "--grid", "20", "--out", str(out)]) == 0
        lines = (out / "profile.csv").read_text().splitlines()
        assert len(lines) == 22

    def test_scan_exit_code_signals_undetermined(self, tmp_path):
        out = tmp_path / "sc"
        # a tiny all-certified grid exits 0
        code = run(["scan", "--metric", "bggg", "--grid", "2", "--grid-min", "0.9",
                    "--grid-max", "1.0", "--out", str(out), "--tmax", "300"])
        assert code in (0, 3)
        data = json.loads((out / "scan.json").read_text())
        assert "summary" in data

    def test_determinism(self, tmp_path):
        outs = []
        for name in ("a", "b"):
            out = tmp_path / name
            assert run(["shoot", "--metric", "bs", "--x1", "1.0",
                        "--out", str(out)]) == 0
            outs.append(out)
        assert (outs[0] / "trajectory.csv").read_bytes() == (outs[1] / "trajectory.csv").read_bytes()
        assert (outs[0] / "classification.json").read_bytes() == (outs[1] / "classification.json").read_bytes()


class TestUsageErrors:
    def test_unknown_metric(self, tmp_path):
        assert run(["shoot", "--metric", "nope", "--out", str(tmp_path / "x")]) == 2

    def test_missing_config_file(self, tmp_path):
        assert run(["verify", "--config", str(tmp_path / "none.cfg")]) == 2

    def test_malformed_config(self, tmp_path):
        bad = tmp_path / "bad.cfg"
        bad.write_text("this is not a key value pair\n")
        assert run(["verify", "--config", str(bad)]) == 2

    def test_unknown_subcommand(self):
        assert run(["frobnicate"]) == 2

    def test_config_file_with_overrides(self, tmp_path):
        cfg = tmp_path / "c.cfg"
        cfg.write_text("metric = bggg\nf1p = 0.3\ng1p = 0.5  # unbounded cell\n")
        out = tmp_path / "o"
        assert run(["shoot", "--config", str(cfg), "--out", str(out)]) == 0
        report = json.loads((out / "classification.json").read_text())
        assert report["verdict"] == "CurvatureUnbounded"
        # override the config's g1p from the command line: bounded cell
        out2 = tmp_path / "o2"
        assert run(["shoot", "--config", str(cfg), "--g1p", "0.0",
                    "--f1p", "1.0", "--out", str(out2)]) == 0
        report2 = json.loads((out2 / "classification.json").read_text())
        assert report2["verdict"] == "Abelian"
