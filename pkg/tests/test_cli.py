import csv
import io
import json
import re

import numpy as np
import pytest

from cslheat.cli import main


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def _rows(text):
    return list(csv.reader(io.StringIO(text)))


def test_rate_csv(capsys):
    code, out, _ = run(["rate", "--material", "Cu", "--lambda", "1e-8", "--rc", "1e-7"], capsys)
    assert code == 0
    rows = _rows(out)
    assert rows[0] == ["q_dot", "method", "error_estimate"]
    assert float(rows[1][0]) == pytest.approx(2.69218808e-05, rel=1e-8)
    assert re.fullmatch(r"-?\d\.\d{8}e[+-]\d\d", rows[1][0])


def test_rate_step_and_file(capsys, tmp_path):
    code, out, _ = run(["rate", "--material", "Cu", "--lambda", "1e-8", "--rc", "100nm", "--cutoff", "4.76e12"],
                       capsys)
    assert code == 0 and "nonwhite-quadrature" in out
    spec = tmp_path / "s.txt"
    spec.write_text("0 1e-30\n1e12 1e-30\n")
    code, out, _ = run(["rate", "--material", "Cu", "--lambda", "1e-8", "--rc", "1e-7", "--spectrum",
                        f"file:{spec}"], capsys)
    assert code == 0 and float(_rows(out)[1][0]) > 0


def test_rate_json_echoes_defaults(capsys):
    code, out, _ = run(["--format", "json", "rate", "--material", "TeO2", "--lambda", "1e-8", "--rc", "1e-7",
                        "--strict"], capsys)
    doc = json.loads(out)
    assert code == 0
    assert "v_eff" in doc["defaults_applied"]
    assert doc["truncation_gap"] >= 0


def test_rate_overrides(capsys):
    code, out, _ = run(["rate", "--material", "Cu", "--lambda", "1e-8", "--rc", "1e-7", "--density", "1e4"], capsys)
    assert float(_rows(out)[1][0]) == pytest.approx(2.69218808e-05 * 1e4 / 8.9e3, rel=1e-8)


def test_profile(capsys):
    code, out, _ = run(["profile", "--geometry", "sphere:3.1cm", "--ts", "10mK", "--k0", "3", "--qdot", "1e-3",
                        "--samples", "5"], capsys)
    rows = _rows(out)
    assert code == 0 and rows[0] == ["r", "T_exact", "T_linearized"] and len(rows) == 6
    assert float(rows[-1][1]) == pytest.approx(0.01)


def test_profile_from_rate(capsys):
    code, out, _ = run(["profile", "--from-rate", "--material", "Cu", "--lambda", "1e-8", "--rc", "1e-7",
                        "--geometry", "sphere:1", "--ts", "0.03"], capsys)
    rows = _rows(out)
    assert code == 0
    assert float(rows[1][2]) - 0.03 == pytest.approx(1.87e-6, rel=1e-2)


def test_scenario_and_output_dir(capsys, tmp_path):
    code, out, _ = run(["--output", str(tmp_path), "scenario", "cu-cuore"], capsys)
    assert code == 0 and out == ""
    assert (tmp_path / "scenario.csv").exists() and (tmp_path / "scenario_profile.csv").exists()
    report = json.loads((tmp_path / "scenario_report.json").read_text())
    assert 1.7e-6 <= report["core_delta_exact"] <= 2.3e-6


def test_scenario_reproducible(capsys):
    a = run(["--format", "json", "--seed", "4", "scenario", "teo2-cuore"], capsys)[1]
    b = run(["--format", "json", "--seed", "4", "scenario", "teo2-cuore"], capsys)[1]
    assert a == b and json.loads(a)["seed"] == 4


def test_config_flag(capsys, tmp_path):
    cfg = tmp_path / "c.ini"
    cfg.write_text("[scenario]\nbuiltin = cu-cuore\n[material]\nk0 = 170\n")
    code, out, _ = run(["--config", str(cfg), "scenario"], capsys)
    assert code == 0
    assert float(_rows(out)[1][4]) == pytest.approx(8.8e-7, rel=0.01)
    cfg.write_text("[scenario]\nbuiltin = cu-cuore\nlamdba = 1\n")
    code, _, err = run(["--config", str(cfg), "scenario"], capsys)
    assert code == 2 and "lamdba" in err


def test_sweep(capsys):
    code, out, _ = run(["sweep", "cu-cuore", "--param", "lambda", "--values", "1e-10,1e-9,1e-8"], capsys)
    rows = _rows(out)
    assert code == 0 and len(rows) == 4
    assert [float(r[0]) for r in rows[1:]] == [1e-10, 1e-9, 1e-8]
    code, _, err = run(["sweep", "cu-cuore", "--param", "lambda", "--values", ""], capsys)
    assert code == 2


def test_mc(capsys):
    code, out, err = run(["--seed", "1", "mc", "--material", "Cu", "--lambda", "1e-8", "--rc", "1e-7",
                          "--trajectories", "20", "--steps", "5", "--probe-points", "5"], capsys)
    rows = _rows(out)
    assert code == 0 and rows[0] == ["t", "mean_energy", "stderr"] and len(rows) == 6
    assert "slope=" in err


def test_cumulant(capsys, tmp_path):
    system = {"H0": [[0, 0.7], [0.7, 0]], "L": [[1, 0], [0, -1]], "noise": {"kind": "white", "gamma": 0.5},
              "psi0": [0.7071067811865476, 0.7071067811865476], "t": 1.0, "dt": 0.01, "n_traj": 200, "n_out": 4}
    path = tmp_path / "sys.json"
    path.write_text(json.dumps(system))
    code, out, _ = run(["cumulant", str(path)], capsys)
    rows = _rows(out)
    assert code == 0 and rows[0] == ["t", "trace_distance"] and len(rows) == 6
    assert float(rows[1][1]) == 0.0
    system["bogus"] = 1
    path.write_text(json.dumps(system))
    assert run(["cumulant", str(path)], capsys)[0] == 2


def test_convert_sde(capsys, tmp_path):
    src = tmp_path / "in.json"
    src.write_text(json.dumps({"A": [[-1.0]], "a": [0.0], "B": [[[0.5]]], "b": [[0.0]]}))
    dst = tmp_path / "out.json"
    assert run(["convert-sde", str(src), str(dst), "--to", "ito"], capsys)[0] == 0
    assert json.loads(dst.read_text())["A"] == [[-1.0 + 0.125]]
    back = tmp_path / "back.json"
    assert run(["convert-sde", str(dst), str(back), "--to", "strat"], capsys)[0] == 0
    assert json.loads(back.read_text())["A"] == [[-1.0]]


@pytest.mark.parametrize("argv", [
    [],
    ["bogus"],
    ["rate", "--material", "Unobtainium", "--lambda", "1", "--rc", "1"],
    ["rate", "--lambda", "1e-8", "--rc", "1e-7"],
    ["rate", "--material", "Cu", "--lambda", "-1", "--rc", "1e-7"],
    ["rate", "--material", "Cu", "--lambda", "1e-8", "--rc", "1e-7", "--spectrum", "step:1e9", "--tol", "0.5"],
    ["profile", "--geometry", "cube:1", "--ts", "1", "--k0", "1", "--qdot", "1"],
])
def test_usage_errors(capsys, argv):
    assert run(argv, capsys)[0] == 2


def test_numeric_failure_exit_code(capsys, monkeypatch):
    from cslheat import cli
    from cslheat.errors import AccuracyError

    def boom(*a, **k):
        raise AccuracyError("no convergence", best_estimate=1.0, error_estimate=1.0)

    monkeypatch.setattr(cli, "rate_nonwhite", boom)
    code, _, err = run(["rate", "--material", "Cu", "--lambda", "1e-8", "--rc", "1e-7", "--cutoff", "1e9"], capsys)
    assert code == 3 and "numeric" in err
