"""Command line interface."""

import json
import subprocess
import sys

import pytest

from g2cert.cli import main


def test_validate_builtin(capsys):
    assert main(["validate", "nonsolvable"]) == 0
    out = capsys.readouterr().out
    assert "4 entries validated" in out


def test_lambda_command(capsys):
    assert main(["lambda", "g_{5,23}", "--witness"]) == 0
    out = capsys.readouterr().out
    assert "16*alpha_14^2*alpha_16^2" in out
    assert "witness verifies" in out


def test_lambda_zero_entry(capsys):
    assert main(["lambda", "g_{5,14}"]) == 0
    assert "identically zero" in capsys.readouterr().out


def test_derivations_command(capsys):
    assert main(["derivations", "g_{5,30}"]) == 0
    out = capsys.readouterr().out
    assert "dimension 8" in out


def test_derivations_requires_params_for_families(capsys):
    with pytest.raises(SystemExit):
        main(["derivations", "g_{6,70}"])
    assert main(["derivations", "g_{6,70}", "--params", "p=0"]) == 0
    assert "dimension 9" in capsys.readouterr().out


def test_su3_command(capsys):
    assert main(["su3", "g_{5,30}", "--samples", "0"]) == 0
    out = capsys.readouterr().out
    assert "null_direction" in out


def test_su3_gauge_details(capsys):
    assert main(["su3", "g_{3,4}^{-1}+g_{3,4}^{-1}", "--gauge", "--samples", "0"]) == 0
    out = capsys.readouterr().out
    assert "branch condition" in out


def test_unknown_algebra():
    with pytest.raises(SystemExit):
        main(["lambda", "not-an-algebra"])


def test_run_all_writes_reports(tmp_path, capsys):
    out_json = tmp_path / "report.json"
    out_md = tmp_path / "report.md"
    code = main(
        [
            "run-all",
            "nonsolvable",
            "--out",
            str(out_json),
            "--md",
            str(out_md),
        ]
    )
    assert code == 0
    document = json.loads(out_json.read_text())
    assert document["schema"] == "g2cert-report/1"
    assert document["verified_all"] is True
    assert "lattice-out-of-scope" in out_md.read_text()


def test_console_script_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "g2cert.cli", "validate", "nonsolvable"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert "4 entries validated" in proc.stdout
