"""Trajectory integration, outcome classification, metrics and field sampling."""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .direction_space import norm
from .environment import Environment
from .errors import RoamError
from .scenario import IntegrationSpec, Scenario, grid_points, load_scenario

COLLISION_TOL = 1e-6
METRIC_KEYS = (
    "n_local_minima_ratio",
    "rmse_pos_to_reference",
    "rmse_vel_to_f0",
    "nics_vel_to_f0",
    "rmse_step",
    "nics_step",
)


class Outcome(str, Enum):
    CONVERGED = "Converged"
    LOCAL_MINIMUM = "LocalMinimum"
    COLLISION = "Collision"
    MAX_STEPS = "MaxSteps"
    SKIPPED = "Skipped"


@dataclass
class Trajectory:
    id: int
    start: np.ndarray
    times: np.ndarray = field(default_factory=lambda: np.zeros(0))
    states: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    velocities: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    gamma_min: np.ndarray = field(default_factory=lambda: np.zeros(0))
    outcome: Outcome = Outcome.SKIPPED

    @property
    def skipped(self) -> bool:
        return self.outcome is Outcome.SKIPPED

    @property
    def steps(self) -> int:
        return max(len(self.times) - 1, 0)


# integration


def _stall_run(speed: float, gamma: float, off_target: bool, run: int, cfg: IntegrationSpec) -> int:
    return run + 1 if speed < cfg.stall_speed and gamma < cfg.stall_gamma and off_target else 0


def _off_target(env: Environment, xi: np.ndarray, t: float, cfg: IntegrationSpec) -> bool:
    err = env.reference_error(xi, t)
    if err is None:
        return True
    limit = cfg.cycle_tolerance if env.is_cyclic else cfg.convergence_radius
    return abs(err) > limit


def integrate_one(env: Environment, cfg: IntegrationSpec, index: int, start: np.ndarray) -> Trajectory:
    """Explicit Euler from ``start``; stops early on collision, arrival or a stall."""
    traj = Trajectory(index, np.array(start, dtype=float))
    if env.gamma_min(start, 0.0) <= 1.0:
        return traj
    attractor = None if env.is_cyclic else env.dynamics.attractor
    xi = traj.start.copy()
    times, states, vels, gammas = [], [], [], []
    run = 0
    for step in range(cfg.max_steps + 1):
        t = step * cfg.dt
        try:
            res = env.evaluate(xi, t)
            v, gamma = res.velocity, res.gamma_min
        except RoamError:
            v, gamma = np.zeros_like(xi), env.gamma_min(xi, t)
        times.append(t)
        states.append(xi)
        vels.append(v)
        gammas.append(gamma)
        if gamma < 1.0 - COLLISION_TOL:
            break
        if attractor is not None and norm(xi - attractor) < cfg.convergence_radius:
            break
        run = _stall_run(norm(v), gamma, _off_target(env, xi, t, cfg), run, cfg)
        if run >= cfg.stall_steps or step == cfg.max_steps:
            break
        xi = xi + cfg.dt * v
    traj.times = np.asarray(times)
    traj.states = np.asarray(states)
    traj.velocities = np.asarray(vels)
    traj.gamma_min = np.asarray(gammas)
    traj.outcome = classify(traj, env, cfg)
    return traj


def _integrate_task(args: tuple[Environment, IntegrationSpec, int, np.ndarray]) -> Trajectory:
    return integrate_one(*args)


def integrate(scenario: Scenario, workers: int = 1) -> list[Trajectory]:
    """Integrate every start point; points outside free space come back as skipped.

    Results do not depend on ``workers``: trajectories are independent and
    collected in start-point order.
    """
    env, cfg = scenario.environment, scenario.integration
    tasks = [(env, cfg, i, p) for i, p in enumerate(scenario.start_points())]
    if workers <= 1 or len(tasks) < 2:
        return [_integrate_task(task) for task in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_integrate_task, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


# classification


def classify(traj: Trajectory, env: Environment, cfg: IntegrationSpec) -> Outcome:
    if len(traj.times) == 0:
        return Outcome.SKIPPED
    if np.any(traj.gamma_min < 1.0 - COLLISION_TOL):
        return Outcome.COLLISION
    if env.is_cyclic:
        window = cfg.cycle_window
        if len(traj.times) >= window:
            errors = [env.reference_error(x, t) for x, t in zip(traj.states[-window:], traj.times[-window:])]
            if all(abs(e) <= cfg.cycle_tolerance for e in errors):  # type: ignore[arg-type]
                return Outcome.CONVERGED
    elif env.dynamics.attractor is not None:
        if norm(traj.states[-1] - env.dynamics.attractor) < cfg.convergence_radius:
            return Outcome.CONVERGED
    run = 0
    for x, v, g, t in zip(traj.states, traj.velocities, traj.gamma_min, traj.times):
        run = _stall_run(norm(v), float(g), _off_target(env, x, t, cfg), run, cfg)
        if run >= cfg.stall_steps:
            return Outcome.LOCAL_MINIMUM
    return Outcome.MAX_STEPS


# metrics


def _mean_std(values: Sequence[float]) -> dict[str, Optional[float]]:
    if not values:
        return {"mean": None, "std": None}
    mean = math.fsum(values) / len(values)
    var = math.fsum((v - mean) ** 2 for v in values) / len(values)
    return {"mean": mean, "std": math.sqrt(var)}


def _rms(rows: np.ndarray) -> float:
    return math.sqrt(math.fsum(float(r @ r) for r in rows) / len(rows))


def _nics(a: np.ndarray, b: np.ndarray) -> Optional[float]:
    cosines = []
    for u, v in zip(a, b):
        nu, nv = norm(u), norm(v)
        if nu > 0.0 and nv > 0.0:
            cosines.append(min(1.0, max(-1.0, float(u @ v) / (nu * nv))))
    if not cosines:
        return None
    return 0.5 * (1.0 - math.fsum(cosines) / len(cosines))


def trajectory_metrics(traj: Trajectory, env: Environment) -> dict[str, Optional[float]]:
    f0 = np.array([env.initial(x, t) for x, t in zip(traj.states, traj.times)])
    errors = [env.reference_error(x, t) for x, t in zip(traj.states, traj.times)]
    out: dict[str, Optional[float]] = {
        "rmse_pos_to_reference": None
        if errors[0] is None
        else math.sqrt(math.fsum(e * e for e in errors) / len(errors)),  # type: ignore[operator]
        "rmse_vel_to_f0": _rms(traj.velocities - f0),
        "nics_vel_to_f0": _nics(traj.velocities, f0),
        "rmse_step": None,
        "nics_step": None,
    }
    if len(traj.velocities) > 1:
        out["rmse_step"] = _rms(np.diff(traj.velocities, axis=0))
        out["nics_step"] = _nics(traj.velocities[1:], traj.velocities[:-1])
    return out


def compute_metrics(trajectories: Iterable[Trajectory], env: Environment) -> dict:
    """Per-trajectory metrics aggregated as mean and (population) std across trajectories."""
    used = [t for t in trajectories if not t.skipped and len(t.times) > 0]
    if not used:
        raise ValueError("no integrated trajectories to evaluate")
    per = [trajectory_metrics(t, env) for t in used]
    minima = [1.0 if t.outcome is Outcome.LOCAL_MINIMUM else 0.0 for t in used]
    result: dict = {"n_local_minima_ratio": _mean_std(minima)}
    for key in METRIC_KEYS[1:]:
        result[key] = _mean_std([m[key] for m in per if m[key] is not None])  # type: ignore[misc]
    result["n_trajectories"] = len(used)
    return result


# field sampling


def sample_field(
    scenario: Scenario,
    counts: tuple[int, int],
    lower: Optional[Sequence[float]] = None,
    upper: Optional[Sequence[float]] = None,
    t: float = 0.0,
) -> list[dict]:
    """Avoidance field on a grid over the first two axes.

    Remaining coordinates are fixed at the middle of the workspace.  Nodes
    outside free space carry ``velocity=None``.
    """
    env = scenario.environment
    lo, hi = _bounds(scenario, lower, upper)
    mid = 0.5 * (lo + hi)
    rows = []
    for node in grid_points(lo[:2], hi[:2], counts):
        xi = mid.copy()
        xi[:2] = node
        gamma = env.gamma_min(xi, t)
        velocity: Optional[np.ndarray] = None
        h: Optional[float] = None
        if gamma > 1.0:
            try:
                res = env.evaluate(xi, t)
                velocity, h = res.velocity, res.speed_factor
            except RoamError:
                velocity, h = None, None
        rows.append({"position": xi, "velocity": velocity, "gamma_min": gamma, "speed_factor": h})
    return rows


def _bounds(scenario: Scenario, lower, upper) -> tuple[np.ndarray, np.ndarray]:
    if lower is not None and upper is not None:
        return np.asarray(lower, dtype=float), np.asarray(upper, dtype=float)
    spec = scenario.spec
    if spec.workspace is not None:
        return np.asarray(spec.workspace.lower, dtype=float), np.asarray(spec.workspace.upper, dtype=float)
    starts = scenario.start_points()
    return starts.min(axis=0), starts.max(axis=0)


# files


def _num(x: float) -> str:
    return repr(float(x))


def write_trajectories_csv(path: Path, trajectories: Sequence[Trajectory], dim: int) -> None:
    header = ["trajectory_id", "step", "t"] + [f"x_{i + 1}" for i in range(dim)] + [f"v_{i + 1}" for i in range(dim)]
    header.append("gamma_min")
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for traj in trajectories:
            for k in range(len(traj.times)):
                row = [str(traj.id), str(k), _num(traj.times[k])]
                row += [_num(x) for x in traj.states[k]]
                row += [_num(v) for v in traj.velocities[k]]
                row.append(_num(traj.gamma_min[k]))
                writer.writerow(row)


def read_trajectories_csv(path: Path, outcomes: dict[int, Outcome], starts: dict[int, np.ndarray]) -> list[Trajectory]:
    grouped: dict[int, list[list[float]]] = {}
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        dim = sum(1 for h in header if h.startswith("x_"))
        for row in reader:
            grouped.setdefault(int(row[0]), []).append([float(x) for x in row[2:]])
    out = []
    for tid in sorted(set(grouped) | set(outcomes)):
        traj = Trajectory(tid, starts.get(tid, np.zeros(dim)), outcome=outcomes.get(tid, Outcome.MAX_STEPS))
        if tid in grouped:
            data = np.asarray(grouped[tid])
            traj.times = data[:, 0]
            traj.states = data[:, 1 : 1 + dim]
            traj.velocities = data[:, 1 + dim : 1 + 2 * dim]
            traj.gamma_min = data[:, 1 + 2 * dim]
        out.append(traj)
    return out


def outcomes_document(scenario: Scenario, trajectories: Sequence[Trajectory]) -> dict:
    counts = {o.value: 0 for o in Outcome}
    for traj in trajectories:
        counts[traj.outcome.value] += 1
    return {
        "scenario": scenario.spec.name,
        "counts": counts,
        "trajectories": [
            {"id": t.id, "start": [float(x) for x in t.start], "outcome": t.outcome.value, "steps": t.steps}
            for t in trajectories
        ],
    }


def dump_json(path: Path, data: dict) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def write_run(out_dir: str | Path, scenario: Scenario, trajectories: Sequence[Trajectory]) -> dict:
    """Write trajectories.csv, outcomes.json, metrics.json and a copy of the scenario."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_trajectories_csv(out / "trajectories.csv", trajectories, scenario.dim)
    dump_json(out / "outcomes.json", outcomes_document(scenario, trajectories))
    metrics = compute_metrics(trajectories, scenario.environment)
    dump_json(out / "metrics.json", metrics)
    (out / "scenario.json").write_text(scenario.to_json() + "\n")
    return metrics


def load_run(run_dir: str | Path) -> tuple[Scenario, list[Trajectory]]:
    run = Path(run_dir)
    scenario = load_scenario(run / "scenario.json")
    doc = json.loads((run / "outcomes.json").read_text())
    outcomes = {int(t["id"]): Outcome(t["outcome"]) for t in doc["trajectories"]}
    starts = {int(t["id"]): np.asarray(t["start"], dtype=float) for t in doc["trajectories"]}
    return scenario, read_trajectories_csv(run / "trajectories.csv", outcomes, starts)
