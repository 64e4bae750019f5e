import csv
import json

import pytest

from roam.cli import EXIT_INVALID, EXIT_MISSING, main

from helpers import SCENARIOS


def small_scenario(tmp_path) -> str:
    data = {
        "name": "tiny",
        "dimension": 2,
        "obstacles": [{"shape": {"type": "sphere", "center": [1.0, 1.0], "radius": 0.3}}],
        "dynamics": {"type": "straight", "attractor": [0.0, 0.0]},
        "integration": {"start_points": [[2.0, 2.0], [1.0, 1.0], [-1.0, 2.0]]},
        "workspace": {"lower": [-2.0, -2.0], "upper": [3.0, 3.0]},
    }
    path = tmp_path / "tiny.json"
    path.write_text(json.dumps(data))
    return str(path)


def test_validate(capsys):
    assert main(["validate", str(SCENARIOS / "limit_cycle.json")]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["valid"] and doc["free_start_points"] == 95


def test_simulate_then_metrics(tmp_path, capsys):
    scenario = small_scenario(tmp_path)
    out = tmp_path / "run"
    assert main(["simulate", scenario, "--out", str(out)]) == 0
    first = capsys.readouterr().out
    assert "Skipped=1" in first
    for name in ("trajectories.csv", "outcomes.json", "metrics.json", "scenario.json"):
        assert (out / name).is_file()
    assert main(["metrics", str(out)]) == 0
    assert json.loads(capsys.readouterr().out) == json.loads((out / "metrics.json").read_text())


def test_field(tmp_path, capsys):
    target = tmp_path / "field.csv"
    assert main(["field", small_scenario(tmp_path), "--grid", "6,5", "--out", str(target)]) == 0
    with target.open() as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 30
    assert set(rows[0]) == {"x_1", "x_2", "v_1", "v_2", "gamma_min", "speed_factor"}


def test_invalid_scenario_exit_code(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"dimension": 2}))
    assert main(["validate", str(path)]) == EXIT_INVALID
    assert "invalid scenario" in capsys.readouterr().err


def test_missing_file_exit_code(tmp_path, capsys):
    assert main(["validate", str(tmp_path / "nope.json")]) == EXIT_MISSING
    assert main(["metrics", str(tmp_path / "no_run")]) == EXIT_MISSING


def test_bad_grid_is_a_usage_error(tmp_path):
    with pytest.raises(SystemExit) as info:
        main(["field", small_scenario(tmp_path), "--grid", "0,3", "--out", "x.csv"])
    assert info.value.code == 2
