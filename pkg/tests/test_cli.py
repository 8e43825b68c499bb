import csv
import io
import json
import math
import subprocess
import sys

import jsonschema
import pytest

from reclab.cli import parse_phase, run_cli
from reclab.schemas import BY_COMMAND


@pytest.fixture
def two_level_file(tmp_path):
    path = tmp_path / "two_level.json"
    r = 1 / math.sqrt(2)
    path.write_text(json.dumps({"eigenvalues": [-1, 1], "amplitudes": [[r, 0], [r, 0]]}))
    return str(path)


@pytest.fixture
def stuck_file(tmp_path):
    path = tmp_path / "stuck.csv"
    path.write_text("lambda,re,im\n0,0.894427191,0\n1,0.316227766,0\n1.4142135623730951,0.316227766,0\n")
    return str(path)


def run(*argv):
    buf = io.StringIO()
    code = run_cli(list(argv), stdout=buf)
    return code, buf.getvalue()


def run_json(*argv):
    code, out = run(*argv, "--format", "json")
    return code, json.loads(out)


def test_exit_example(two_level_file):
    code, out = run("exit", "--state", two_level_file, "--epsilon", "0.1")
    assert code == 0
    assert "t_exit" in out and "0.100167421" in out
    cert = json.loads(out[out.index("{"):])
    jsonschema.validate(cert, BY_COMMAND["exit"])
    assert cert["t_exit"] == pytest.approx(math.asin(0.1), abs=1e-9)


def test_bounds_example(two_level_file):
    code, out = run("bounds", "--state", two_level_file, "--epsilon", "0.1", "--k", "1")
    assert code == 0
    rows = dict(line.split(None, 1) for line in out.splitlines())
    assert float(rows["mt_lower"]) == pytest.approx(0.100167421)
    assert float(rows["thm2_upper"]) == pytest.approx(0.111803399)
    assert float(rows["thm1_rec_upper"]) == pytest.approx(14.0496295)
    assert float(rows["concrete_rec_upper"]) == pytest.approx(8.88576588)


def test_diamond_example():
    code, out = run("diamond", "--theta", "0,pi", "--theta-prime", "0,0")
    assert code == 0
    assert "1.41421356" in out
    _, js = run_json("diamond", "--theta", "0,pi", "--theta-prime", "0,0")
    assert js["distance"] == pytest.approx(math.sqrt(2), abs=1e-12)


def test_parse_phase():
    assert parse_phase("pi") == pytest.approx(math.pi)
    assert parse_phase("-pi/2") == pytest.approx(-math.pi / 2)
    assert parse_phase("2pi") == pytest.approx(2 * math.pi)
    assert parse_phase("3*pi/4") == pytest.approx(0.75 * math.pi)
    assert parse_phase("0.3") == 0.3
    for bad in ["", "x", "-", "pi/", "*"]:
        with pytest.raises(ValueError):
            parse_phase(bad)


def test_every_json_output_matches_schema(two_level_file, tmp_path):
    calls = {
        "moments": ["--state", two_level_file],
        "exit": ["--state", two_level_file, "--epsilon", "0.1"],
        "recur": ["--state", two_level_file, "--epsilon", "0.1", "--k", "2"],
        "bounds": ["--state", two_level_file, "--epsilon", "0.1", "--k", "2", "--particles", "3", "--measure"],
        "finite": ["--state", two_level_file, "--epsilon", "0.5"],
        "cover-check": ["--epsilon", "0.5", "--dim", "3", "--samples", "2000"],
        "diamond": ["--theta", "0,pi/2,pi", "--theta-prime", "0,0,0"],
        "ensemble": ["--dim", "3", "--epsilon", "0.2", "--trials", "4", "--rec-horizon", "100"],
        "proximity": ["--dim", "3", "--epsilon", "0.3", "--trials", "1000"],
        "scenario": ["qutrit", "--ratio", "100", "--ratio", "1000"],
    }
    for cmd, argv in calls.items():
        code, js = run_json(cmd, *argv)
        assert code == 0, cmd
        jsonschema.validate(js, BY_COMMAND[cmd])


def test_dim_sweep_schema():
    from reclab.schemas import SWEEP
    code, js = run_json("ensemble", "--dim-sweep", "2..3", "--epsilon", "0.3", "--trials", "5",
                        "--rec-horizon", "100")
    assert code == 0
    jsonschema.validate(js, SWEEP)


def test_precondition_errors(two_level_file, tmp_path):
    assert run("exit", "--state", two_level_file)[0] == 2
    assert run("exit", "--state", str(tmp_path / "missing.json"), "--epsilon", "0.1")[0] == 2
    assert run("exit", "--state", two_level_file, "--epsilon", "1.5")[0] == 2
    assert run("nonsense")[0] == 2
    assert run("diamond", "--theta", "0,1", "--theta-prime", "0")[0] == 2
    assert run("cover-check", "--epsilon", "0.5", "--dim", "3", "--samples", "0")[0] == 2
    assert run("recur", "--state", two_level_file, "--epsilon", "0.1", "--k", "0")[0] == 2
    assert run("ensemble", "--epsilon", "0.1", "--dim", "3", "--family", "weird")[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"eigenvalues": [0, 1], "amplitudes": [[1, 0], [1, 0]]}))
    assert run("moments", "--state", str(bad))[0] == 2


def test_horizon_exit_code(two_level_file):
    code, js = run_json("exit", "--state", two_level_file, "--epsilon", "0.1", "--t-max", "0.05")
    assert code == 3 and js["status"] == "HorizonExhausted"
    code, _ = run("recur", "--state", two_level_file, "--epsilon", "0.1", "--k", "5", "--t-max", "4")
    assert code == 3


def test_never_exits_is_success(stuck_file):
    code, js = run_json("exit", "--state", stuck_file, "--epsilon", "0.9")
    assert code == 0 and js["status"] == "NeverExitsAnalytic" and js["t_exit"] is None
    _, fin = run_json("finite", "--state", stuck_file, "--epsilon", "0.9")
    assert fin["finite"] is False and fin["infimum"] == pytest.approx(0.36)


def test_config_precedence(two_level_file, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(f"# defaults\nstate = {two_level_file}\nepsilon = 0.2\n")
    _, js = run_json("exit", "--config", str(cfg))
    assert js["t_exit"] == pytest.approx(math.asin(0.2), abs=1e-9)
    _, js = run_json("exit", "--config", str(cfg), "--epsilon", "0.1")
    assert js["t_exit"] == pytest.approx(math.asin(0.1), abs=1e-9)
    cfg.write_text("bogus = 1\n")
    assert run("exit", "--config", str(cfg))[0] == 2


def test_output_files(two_level_file, tmp_path):
    out = tmp_path / "b.json"
    code, _ = run("bounds", "--state", two_level_file, "--epsilon", "0.1", "--output", str(out))
    assert code == 0
    jsonschema.validate(json.loads(out.read_text()), BY_COMMAND["bounds"])
    out = tmp_path / "b.csv"
    run("bounds", "--state", two_level_file, "--epsilon", "0.1", "--format", "csv", "--output", str(out))
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["name", "value"]
    assert dict(rows[1:])["thm2_upper"] == "0.111803399"


def test_ensemble_csv(tmp_path):
    path = tmp_path / "trials.csv"
    code, _ = run("ensemble", "--dim", "4", "--epsilon", "0.2", "--trials", "6", "--rec-horizon", "100",
                  "--csv", str(path))
    assert code == 0
    rows = list(csv.DictReader(path.open()))
    assert len(rows) == 6 and [int(r["trial_id"]) for r in rows] == list(range(6))
    assert {"t_exit", "t_rec", "d_eff", "d_supp", "w_exit"} <= set(rows[0])


def test_large_bounds_print_as_powers_of_ten(tmp_path):
    import numpy as np
    path = tmp_path / "big.json"
    d = 300
    path.write_text(json.dumps({"eigenvalues": list(np.linspace(-1, 1, d)),
                                "amplitudes": [[1 / math.sqrt(d), 0]] * d}))
    code, out = run("bounds", "--state", str(path), "--epsilon", "0.01")
    assert code == 0
    assert "10^" in dict(line.split(None, 1) for line in out.splitlines())["thm1_rec_upper"]
    _, js = run_json("bounds", "--state", str(path), "--epsilon", "0.01")
    assert js["thm1_rec_upper"] == "overflow"
    assert js["thm1_rec_upper_log10"] > 307


def test_byte_identical_runs(two_level_file):
    argv = [sys.executable, "-m", "reclab.cli", "ensemble", "--dim", "3", "--epsilon", "0.2",
            "--trials", "5", "--seed", "7", "--rec-horizon", "100", "--format", "json"]
    a = subprocess.run(argv, capture_output=True, check=True).stdout
    b = subprocess.run(argv, capture_output=True, check=True, env={"RECLAB_THREADS": "2", "PATH": ""}).stdout
    assert a == b and a
