"""Command-line behavior: output shapes and exit codes."""

import json
import math

import pytest

from netbell import cli
from netbell.network import parse_network


def run(capsys, *argv):
    code = cli.main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_analyze_json(capsys):
    code, out, _ = run(capsys, "analyze", "gallery:fig-s2", "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert data["certificate"]["k"] == 2
    assert data["certificate"]["parties"] == ["A1", "A2"]
    assert "inequality" in data


def test_analyze_degenerate_network(capsys):
    code, out, _ = run(capsys, "analyze", "gallery:door", "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert data["kmax"] <= 1
    assert "no nonlinear inequality" in data["message"]


def test_evaluate_default_angles(capsys):
    code, out, _ = run(capsys, "evaluate", "gallery:chain(3)", "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert abs(data["F"] - math.sqrt(2.0)) < 1e-9
    assert data["classification"] == "maximal"


def test_evaluate_explicit_angles_full_tensor(capsys):
    code, out, _ = run(
        capsys,
        "evaluate", "gallery:chain(3)",
        "--angles", "0.5,0.5", "--mode", "full-tensor", "--format", "json",
    )
    assert code == 0
    data = json.loads(out)
    assert abs(data["I"] - math.cos(0.5) ** 2) < 1e-9
    assert abs(data["J"] - math.sin(0.5) ** 2) < 1e-9


def test_evaluate_wrong_angle_count(capsys):
    code, _, err = run(capsys, "evaluate", "gallery:chain(3)", "--angles", "0.5")
    assert code == 2
    assert "error" in err


def test_evaluate_csv_sweep(capsys):
    code, out, _ = run(capsys, "evaluate", "gallery:chain(3)", "--format", "csv")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "theta,I,J,F"
    assert len(lines) == 66  # header + 65 sweep points
    best = max(float(line.split(",")[3]) for line in lines[1:])
    assert abs(best - math.sqrt(2.0)) < 1e-3


def test_optimize(capsys):
    code, out, _ = run(capsys, "optimize", "gallery:cycle(4)", "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert abs(data["F"] - math.sqrt(2.0)) < 1e-6
    assert len(data["angles"]) == 2


def test_visibility(capsys):
    code, out, _ = run(capsys, "visibility", "gallery:chain(3)", "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert data["productBound"] == 0.5
    assert data["kUsed"] == 2


def test_lhv(capsys):
    code, out, _ = run(capsys, "lhv", "gallery:chain(3)", "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert data["exhaustive"] is True
    assert abs(data["F"] - 1.0) <= 1e-9


def test_gallery_list_and_entry(capsys):
    code, out, _ = run(capsys, "gallery")
    assert code == 0
    assert "butterfly" in out
    code, out, _ = run(capsys, "gallery", "butterfly")
    assert code == 0
    net = parse_network(out)
    assert net.n == 6 and net.m == 6


def test_check_passes(capsys):
    code, out, _ = run(capsys, "check", "gallery:chain(3)")
    assert code == 0
    assert "PASS factorized-vs-tensor" in out
    assert "PASS closed-form-vs-optimizer" in out
    assert "FAIL" not in out


def test_bad_file_is_validation_error(tmp_path, capsys):
    missing = tmp_path / "nope.json"
    code, _, err = run(capsys, "analyze", str(missing))
    assert code == 2 and "error" in err

    bad = tmp_path / "bad.json"
    bad.write_text('{"parties": ["A"]')
    code, _, err = run(capsys, "analyze", str(bad))
    assert code == 2 and "error" in err


def test_dim_cap_is_resource_error(capsys):
    code, _, err = run(
        capsys,
        "evaluate", "gallery:chain(3)", "--mode", "full-tensor", "--dim-cap", "4",
    )
    assert code == 3
    assert "error" in err


def test_text_format_default(capsys):
    code, out, _ = run(capsys, "evaluate", "gallery:chain(3)")
    assert code == 0
    assert "F: 1.41421" in out
    assert "classification: maximal" in out
