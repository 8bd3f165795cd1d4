"""End-to-end command line coverage: all subcommands, exit codes, JSON."""

import json
import os
import subprocess
import sys

import pytest

from phl.cli import main

DIVERGE_DERIV = {
    "rule": "CONS",
    "conclusion": "{ true } while true do { skip } { P(true) = 0 }",
    "premises": [{
        "rule": "WHILE",
        "conclusion": "{ 0 = 0 } while true do { skip } { P(true) = 0 }",
    }],
}


def run_cli(capsys, *argv):
    rc = main(list(argv))
    captured = capsys.readouterr()
    return rc, captured.out, captured.err


class TestRun:
    def test_point_state(self, capsys):
        rc, out, _ = run_cli(capsys, "run", "--program", "X := X + 1",
                             "--state", "X=1", "--format", "json")
        assert rc == 0
        data = json.loads(out)
        assert data == {"states": [{"prob": "1", "vars": {"X": 2}}],
                        "residual": "0", "iterations": 0, "exact": True}

    def test_geometric_loop_text(self, capsys):
        rc, out, _ = run_cli(
            capsys, "run", "--loop-bound", "4",
            "--program", "while X = 0 do { X :=$ {1/2:0, 1/2:1} }",
            "--state", "X=0")
        assert rc == 0
        assert "residual mass: 1/16" in out

    def test_dists_input(self, capsys, tmp_path):
        p = tmp_path / "mu.json"
        p.write_text(json.dumps([
            {"state": {"X": 0}, "prob": "1/2"},
            {"state": {"X": 3}, "prob": "1/2"},
        ]))
        rc, out, _ = run_cli(capsys, "run", "--program", "X := X * 2",
                             "--dists", str(p), "--format", "json")
        assert rc == 0
        assert json.loads(out)["states"] == [
            {"prob": "1/2", "vars": {"X": 0}}, {"prob": "1/2", "vars": {"X": 6}}]

    def test_state_and_dists_conflict(self, capsys):
        rc, _, err = run_cli(capsys, "run", "--program", "skip",
                             "--state", "X=0", "--dists", "nope.json")
        assert rc == 2 and "error" in err


class TestTransformers:
    def test_wp_text(self, capsys):
        rc, out, _ = run_cli(capsys, "wp",
                             "--program", "while X = 0 do { X := 1 }",
                             "--post", "X = 1")
        assert rc == 0
        assert out.splitlines()[0] == "X = 0 || !(X = 0) && (X = 1)"
        assert "converged at 2" in out

    def test_pt_json(self, capsys):
        rc, out, _ = run_cli(capsys, "pt",
                             "--program", "while true do { skip }",
                             "--term", "P(true)", "--format", "json")
        assert rc == 0
        data = json.loads(out)
        assert data["preterm"] == "0"
        assert data["loops"][0]["exhaustive"] is False

    def test_wpp(self, capsys):
        rc, out, _ = run_cli(capsys, "wpp", "--program", "X := X + 1",
                             "--post", "P(X = 2) <= 1/2")
        assert rc == 0 and out.splitlines()[0] == "P(X + 1 = 2) <= 1/2"


class TestCheck:
    def test_det_triple_holds(self, capsys):
        rc, out, _ = run_cli(capsys, "check",
                             "--triple", "{ X >= 0 } X := X + 1 { X >= 1 }")
        assert rc == 0 and out.startswith("holds")

    def test_prob_triple_fails(self, capsys):
        rc, out, _ = run_cli(
            capsys, "check",
            "--triple", "{ true } X :=$ {1/2:0, 1/2:1} { P(X = 0) = 1 }")
        assert rc == 1 and out.startswith("fails")

    def test_extra_family_member(self, capsys, tmp_path):
        p = tmp_path / "mu.json"
        p.write_text(json.dumps([{"state": {"X": 2}, "prob": "1"}]))
        rc, out, _ = run_cli(
            capsys, "check", "--triple", "{ P(X = 2) = 1 } skip { P(X = 2) = 1 }",
            "--dists", str(p))
        assert rc == 0 and out.startswith("holds")


class TestProve:
    def test_accepts(self, capsys, tmp_path):
        p = tmp_path / "d.json"
        p.write_text(json.dumps(DIVERGE_DERIV))
        rc, out, _ = run_cli(capsys, "prove", "--derivation", str(p))
        assert rc == 0 and out.startswith("accepted")

    def test_rejects(self, capsys, tmp_path):
        bad = {"rule": "AS", "conclusion": "{ X = 2 } X := X + 1 { X = 2 }"}
        p = tmp_path / "d.json"
        p.write_text(json.dumps(bad))
        rc, out, _ = run_cli(capsys, "prove", "--derivation", str(p))
        assert rc == 1 and "AS precondition" in out

    def test_missing_file(self, capsys):
        rc, _, err = run_cli(capsys, "prove", "--derivation", "missing.json")
        assert rc == 2 and "error" in err


class TestErrorsAndConfig:
    def test_parse_error_exits_2(self, capsys):
        rc, _, err = run_cli(capsys, "run", "--program", "X := 0.5",
                             "--state", "X=0")
        assert rc == 2 and "decimal" in err

    def test_bad_flag_exits_2(self, capsys):
        rc, _, _ = run_cli(capsys, "run", "--program", "skip",
                           "--state", "X=0", "--loop-bound", "banana")
        assert rc == 2

    def test_config_file(self, capsys, tmp_path, monkeypatch):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"loop_bound": 4}))
        monkeypatch.setenv("PHL_CONFIG", str(cfg))
        rc, out, _ = run_cli(
            capsys, "run",
            "--program", "while X = 0 do { X :=$ {1/2:0, 1/2:1} }",
            "--state", "X=0")
        assert rc == 0 and "residual mass: 1/16" in out

    def test_flag_overrides_config(self, capsys, tmp_path, monkeypatch):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"loop_bound": 4}))
        monkeypatch.setenv("PHL_CONFIG", str(cfg))
        rc, out, _ = run_cli(
            capsys, "run", "--loop-bound", "2",
            "--program", "while X = 0 do { X :=$ {1/2:0, 1/2:1} }",
            "--state", "X=0")
        assert rc == 0 and "residual mass: 1/4" in out

    def test_json_output_deterministic(self, capsys):
        argv = ("run", "--program", "X :=$ {1/2:0, 1/2:1}; Y := X",
                "--state", "X=9, Y=9", "--format", "json")
        a = run_cli(capsys, *argv)
        b = run_cli(capsys, *argv)
        assert a == b and a[0] == 0


class TestInstalledScript:
    def test_console_entry_point(self):
        proc = subprocess.run(
            [sys.executable, "-m", "phl.cli", "run", "--program", "skip",
             "--state", "X=0", "--format", "json"],
            capture_output=True, text=True,
            env={**os.environ, "PHL_CONFIG": ""})
        assert proc.returncode == 0
        assert json.loads(proc.stdout)["exact"] is True
