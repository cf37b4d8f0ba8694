import csv
import io
import json

import pytest

from edgecache.cli import main

TINY = {"name": "tiny", "rows": 1, "cols": 2, "n0": 4, "capacity": 1, "gamma": 10,
        "arrivals_per_stage": 1, "T": 4}


def test_run_writes_csv_and_json(tmp_path):
    out, js = tmp_path / "r.csv", tmp_path / "r.json"
    code = main(["run", "--scenario", "ins1.1", "--policies", "rh1,lru-m", "--reps", "2",
                 "--seed", "42", "--out", str(out), "--json", str(js)])
    assert code == 0
    rows = list(csv.DictReader(out.open()))
    assert [r["policy"] for r in rows] == ["rh1", "lru-m", "offline", "lb"]
    assert all(r["scenario"] == "ins1.1" for r in rows)
    assert json.loads(js.read_text())["seed"] == 42


def test_run_to_stdout_with_solver(tmp_path, capsys):
    f = tmp_path / "s.json"
    f.write_text(json.dumps(TINY))
    assert main(["run", "--scenario", str(f), "--policies", "myopic", "--reps", "1", "--solver", "flow"]) == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert rows[0]["solver_mode"] == "single_copy_flow"


def test_validation_exit_code(tmp_path, capsys):
    f = tmp_path / "s.json"
    f.write_text(json.dumps({k: v for k, v in TINY.items() if k != "gamma"}))
    assert main(["run", "--scenario", str(f)]) == 2
    assert "gamma" in capsys.readouterr().err
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert main(["run", "--scenario", str(bad)]) == 2
    assert main(["run", "--scenario", "ins1.1", "--policies", "fifo"]) == 2


def test_solver_cap_exit_code(tmp_path):
    f = tmp_path / "s.json"
    f.write_text(json.dumps({"preset": "ins2.1", "max_work": 1000, "T": 2, "mu_profile": "flat"}))
    assert main(["run", "--scenario", str(f), "--policies", "rh1", "--reps", "1"]) == 3


def test_scenarios_listing(capsys):
    assert main(["scenarios"]) == 0
    out = capsys.readouterr().out
    assert "ins7.4" in out and out.count("\n") == 29


def test_argparse_errors():
    with pytest.raises(SystemExit):
        main(["run"])
