"""Request handlers shared by the command line and the HTTP service.

Each handler takes plain data, does the work in-process and returns a
JSON-ready dictionary.  Failures surface as :class:`ScenarioInvalid` or
:class:`FileNotFoundError`; the front ends decide how to report them.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Optional, Sequence

from .harness import compute_metrics, integrate, load_run, outcomes_document, sample_field, write_run
from .scenario import Scenario, ScenarioSpec, build_scenario, load_scenario, parse_scenario


Source = str | Path | dict | ScenarioSpec


def _scenario(source: Source) -> Scenario:
    if isinstance(source, ScenarioSpec):
        return build_scenario(source)
    if isinstance(source, dict):
        return parse_scenario(source)
    return load_scenario(source)


def validate(source: Source) -> dict:
    """Parse and build a scenario; report its size when it is valid."""
    scenario = _scenario(source)
    env = scenario.environment
    starts = scenario.start_points()
    free = sum(1 for p in starts if env.gamma_min(p) > 1.0)
    return {
        "valid": True,
        "name": scenario.spec.name,
        "dimension": scenario.dim,
        "obstacles": len(scenario.spec.obstacles),
        "trees": len(scenario.spec.trees),
        "boundaries": len(scenario.spec.boundaries),
        "start_points": len(starts),
        "free_start_points": free,
    }


def simulate(source: Source, out_dir: Optional[str | Path] = None, workers: int = 1) -> dict:
    """Integrate all start points.

    With ``out_dir`` the run is written to disk as well; the returned
    document carries the outcomes and metrics either way.
    """
    scenario = _scenario(source)
    trajectories = integrate(scenario, workers=workers)
    if out_dir is not None:
        metrics = write_run(out_dir, scenario, trajectories)
    else:
        metrics = compute_metrics(trajectories, scenario.environment)
    return {"outcomes": outcomes_document(scenario, trajectories), "metrics": metrics}


def metrics(run_dir: str | Path) -> dict:
    """Recompute metrics from a directory written by :func:`simulate`."""
    scenario, trajectories = load_run(run_dir)
    return compute_metrics(trajectories, scenario.environment)


def field(
    source: Source,
    counts: Sequence[int],
    lower: Optional[Sequence[float]] = None,
    upper: Optional[Sequence[float]] = None,
    t: float = 0.0,
) -> dict:
    scenario = _scenario(source)
    nx, ny = (int(c) for c in counts)
    rows = sample_field(scenario, (nx, ny), lower, upper, t)
    return {"dimension": scenario.dim, "rows": [_field_row(r) for r in rows]}


def _field_row(row: dict) -> dict:
    v = row["velocity"]
    return {
        "position": [float(x) for x in row["position"]],
        "velocity": None if v is None else [float(x) for x in v],
        "gamma_min": float(row["gamma_min"]),
        "speed_factor": None if row["speed_factor"] is None else float(row["speed_factor"]),
    }


def write_field_csv(path: str | Path, document: dict) -> int:
    """Write a field document as CSV; empty cells mark nodes outside free space."""
    dim = document["dimension"]
    header = [f"x_{i + 1}" for i in range(dim)] + [f"v_{i + 1}" for i in range(dim)] + ["gamma_min", "speed_factor"]
    out = Path(path)
    if out.parent != Path(""):
        out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in document["rows"]:
            velocity = row["velocity"] or [None] * dim
            cells = row["position"] + velocity + [row["gamma_min"], row["speed_factor"]]
            writer.writerow(["" if c is None else repr(c) for c in cells])
    return len(document["rows"])


def to_json(document: dict) -> str:
    return json.dumps(document, indent=2, sort_keys=True, allow_nan=True)
