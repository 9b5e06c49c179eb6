"""Command-line contract: exit codes, output files, determinism."""

import csv
import json
import math
import subprocess
import sys

import pytest

from opkernel.cli import main
from opkernel.fixtures import EX1_A, EX1_B, FIXTURES, run_fixture

PI = [[0, math.pi]]


def _spec(tmp_path, data, name="spec.json"):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return p


def _example1(poly):
    return {"checker": "monomial", "polynomial": poly,
            "kernels": {"A": {"type": "general", "expr": EX1_A, "G": PI},
                        "B": {"type": "general", "expr": EX1_B, "G": PI}}}


def test_verify_example1_passes(tmp_path):
    out = tmp_path / "out"
    assert main(["verify", "--spec", str(_spec(tmp_path, _example1([0, 0, 1]))),
                 "--out", str(out)]) == 0
    rep = json.loads((out / "report.json").read_text())
    assert rep["verdict"] == "pass" and rep["overall_pass"] is True
    assert "wall_time_ms" not in rep
    with open(out / "residuals.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["field", "t", "tau", "value"]
    assert len(rows) > 1


def test_verify_delta_two_fails(tmp_path):
    assert main(["verify", "--spec", str(_spec(tmp_path, _example1([0, 0, 2]))),
                 "--out", str(tmp_path)]) == 1


def test_truncated_file_is_input_error(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(_example1([0, 0, 1]))[:80])
    assert main(["verify", "--spec", str(p), "--out", str(tmp_path / "o")]) == 3
    assert "position" in capsys.readouterr().err
    assert not (tmp_path / "o").exists()


def test_expression_error_reports_position(tmp_path, capsys):
    spec = _example1([0, 0, 1])
    spec["kernels"]["A"]["expr"] = "cos(t"
    assert main(["verify", "--spec", str(_spec(tmp_path, spec))]) == 3
    assert "position 5" in capsys.readouterr().err


def test_unknown_checker(tmp_path):
    spec = _example1([0, 0, 1])
    spec["checker"] = "magic"
    assert main(["verify", "--spec", str(_spec(tmp_path, spec))]) == 3


def test_invalid_override_rejected(tmp_path):
    p = str(_spec(tmp_path, _example1([0, 0, 1])))
    assert main(["verify", "--spec", p, "--nodes", "1"]) == 3
    assert main(["verify", "--spec", p, "--tol-eps", "-1"]) == 3


def test_missing_file(tmp_path):
    assert main(["verify", "--spec", str(tmp_path / "nope.json")]) == 3


def test_bad_arguments():
    assert main(["verify"]) == 3


def test_timings_flag(tmp_path):
    out = tmp_path / "o"
    main(["verify", "--spec", str(_spec(tmp_path, _example1([0, 0, 1]))), "--out", str(out),
          "--timings"])
    assert "wall_time_ms" in json.loads((out / "report.json").read_text())


def test_deterministic_reports(tmp_path):
    p = str(_spec(tmp_path, _example1([0, 0, 3])))
    main(["verify", "--spec", p, "--out", str(tmp_path / "a"), "--seed", "4"])
    main(["verify", "--spec", p, "--out", str(tmp_path / "b"), "--seed", "4"])
    for f in ("report.json", "residuals.csv"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


@pytest.mark.parametrize("kind, kernels, poly, code", [
    ("volterra_necessary",
     {"A": {"type": "volterra_separable", "outer": "ind(0,0.25)-ind(0.75,1)", "inner": "1"},
      "B": {"type": "volterra_separable", "outer": "ind(0.25,0.75)", "inner": "1"}},
     [0, 0, 1], 1),
    ("both_zero",
     {"A": {"type": "separable", "a": "ind(0,0.25)*(t^4+1)-ind(0.5,0.75)", "c": "ind(0,0.5)"},
      "B": {"type": "separable", "a": "ind(0.5,1)", "c": "ind(0.25,0.5)*(t^2+1)+ind(0.75,1)"}},
     None, 0),
    ("conv_monomial",
     {"A": {"type": "convolution", "profile": "ind(0,1)"},
      "B": {"type": "convolution", "profile": "ind(2,3)"}},
     [0, 0, 1], 1),
    ("commut_sufficient",
     {"A": {"type": "general", "expr": "sin(t+s)"},
      "B": {"type": "general", "expr": "cos(2*t*s)"}},
     None, 2),
])
def test_checker_kinds(tmp_path, kind, kernels, poly, code):
    spec = {"checker": kind, "kernels": kernels}
    if poly is not None:
        spec["polynomial"] = poly
    assert main(["verify", "--spec", str(_spec(tmp_path, spec)), "--out", str(tmp_path)]) == code


def test_fixture_exit_codes(capsys):
    assert main(["fixture", "example1"]) == 0
    assert "BA^2 nonzero" in capsys.readouterr().out
    assert main(["fixture", "volterra_counterexample"]) == 0
    assert main(["fixture", "unknown"]) == 3


def test_fixture_exit_matches_rows():
    for name in FIXTURES:
        res = run_fixture(name)
        assert res.all_match == all(c == o for _, c, o in res.rows)


def test_compose_ramp(tmp_path):
    spec = {"kernels": {"A": {"type": "volterra", "gamma": 0,
                              "inner": {"type": "general", "expr": "1"}, "G": [[0, 1]]}},
            "m": 1}
    out = tmp_path / "o"
    assert main(["compose", "--spec", str(_spec(tmp_path, spec)), "--out", str(out)]) == 0
    with open(out / "kernel.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["t", "s", "value"]
    err = max(abs(float(v) - (float(t) - float(s)) * (float(s) <= float(t)))
              for t, s, v in rows[1:])
    assert err < 1e-12
    # row-major: t outer, s inner
    assert rows[1][0] == rows[2][0] and rows[1][1] != rows[2][1]
    norms = json.loads((out / "norms.json").read_text())["norm_bounds"]
    assert set(norms) == {"1", "2", "inf"}


def test_compose_zero_kernel(tmp_path):
    spec = {"kernels": {"A": {"type": "general", "expr": "0", "G": [[0, 1]]}}, "m": 3}
    out = tmp_path / "o"
    assert main(["compose", "--spec", str(_spec(tmp_path, spec)), "--out", str(out)]) == 0
    with open(out / "kernel.csv") as fh:
        assert all(float(r[2]) == 0.0 for r in list(csv.reader(fh))[1:])


def test_compose_example1_pair(tmp_path):
    spec = {"kernels": {"A": {"type": "general", "expr": EX1_A, "G": PI},
                        "B": {"type": "general", "expr": EX1_B, "G": PI}}}
    out = tmp_path / "o"
    assert main(["compose", "--spec", str(_spec(tmp_path, spec)), "--out", str(out)]) == 0
    with open(out / "kernel.csv") as fh:
        rows = list(csv.reader(fh))[1:]
    err = 0.0
    for t, s, v in rows[::97]:
        t, s = float(t), float(s)
        want = 2 / math.pi * (math.cos(t) * math.cos(s) + 2 * math.sin(t) * math.sin(s)
                              + 2 * math.cos(t) * math.sin(s))
        err = max(err, abs(float(v) - want))
    assert err < 1e-12


def test_compose_needs_operand(tmp_path):
    spec = {"kernels": {"A": {"type": "general", "expr": "1", "G": [[0, 1]]}}}
    assert main(["compose", "--spec", str(_spec(tmp_path, spec))]) == 3


def test_threads_env(tmp_path, monkeypatch):
    monkeypatch.setenv("OPKERNEL_THREADS", "1")
    assert main(["fixture", "conv_commute"]) == 0
    monkeypatch.setenv("OPKERNEL_THREADS", "many")
    assert main(["fixture", "conv_commute"]) == 3


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "opkernel.cli", "fixture", "nope"],
                       capture_output=True, text=True)
    assert r.returncode == 3
