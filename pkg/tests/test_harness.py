import math
import time

import numpy as np
import pytest

from roam import handlers
from roam.environment import Environment
from roam.harness import (
    Outcome,
    Trajectory,
    classify,
    compute_metrics,
    integrate,
    load_run,
    sample_field,
    trajectory_metrics,
)
from roam.scenario import IntegrationSpec, load_scenario, parse_scenario
from roam.dynamics import Straight

from helpers import SCENARIOS


def straight_scenario(starts, obstacles=(), **integration) -> dict:
    return {
        "name": "straight",
        "dimension": 2,
        "obstacles": list(obstacles),
        "dynamics": {"type": "straight", "attractor": [0.0, 0.0]},
        "integration": {"dt": 0.01, "max_steps": 1000, "start_points": starts, **integration},
    }


CIRCLE = {"shape": {"type": "sphere", "center": [3.0, 3.0], "radius": 0.5}}


def test_straight_step_count_has_a_closed_form():
    scenario = parse_scenario(straight_scenario([[1.0, 0.0]]))
    (traj,) = integrate(scenario)
    want = math.ceil(math.log(0.1) / math.log(0.99))
    assert traj.outcome is Outcome.CONVERGED
    assert traj.steps == want == 230
    assert np.allclose(traj.states[-1], [0.99**want, 0.0])


def test_start_inside_an_obstacle_is_skipped():
    scenario = parse_scenario(straight_scenario([[3.0, 3.0], [1.0, 1.0]], [CIRCLE]))
    first, second = integrate(scenario)
    assert first.outcome is Outcome.SKIPPED and first.steps == 0
    assert second.outcome is Outcome.CONVERGED


def test_workers_do_not_change_results():
    scenario = parse_scenario(straight_scenario([[1.0, 2.0], [-2.0, 1.0], [4.0, 4.0]], [CIRCLE]))
    serial, parallel = integrate(scenario), integrate(scenario, workers=2)
    for a, b in zip(serial, parallel):
        assert a.outcome is b.outcome
        assert np.array_equal(a.states, b.states)


def test_limit_cycle_free_starts():
    assert handlers.validate(SCENARIOS / "limit_cycle.json")["free_start_points"] == 95


# classification


def _env() -> Environment:
    return Environment(Straight([0.0, 0.0]))


def _cfg(**kw) -> IntegrationSpec:
    return IntegrationSpec(start_points=[[0.0, 0.0]], **kw)


def _traj(states, velocities=None, gammas=None) -> Trajectory:
    states = np.asarray(states, dtype=float)
    n = len(states)
    vel = np.zeros_like(states) if velocities is None else np.asarray(velocities, dtype=float)
    gam = np.full(n, 5.0) if gammas is None else np.asarray(gammas, dtype=float)
    return Trajectory(0, states[0], np.arange(n) * 0.01, states, vel, gam)


def test_collision_takes_precedence():
    traj = _traj([[1.0, 0.0], [0.0, 0.0]], gammas=[2.0, 0.5])
    assert classify(traj, _env(), _cfg()) is Outcome.COLLISION


def test_converged_near_the_attractor():
    assert classify(_traj([[1.0, 0.0], [0.05, 0.0]]), _env(), _cfg()) is Outcome.CONVERGED


def test_stall_near_an_obstacle_is_a_local_minimum():
    cfg = _cfg(stall_steps=5)
    states = [[2.0, 0.0]] * 6
    assert classify(_traj(states, gammas=[1.2] * 6), _env(), cfg) is Outcome.LOCAL_MINIMUM
    # The same stall far from every obstacle is not a minimum.
    assert classify(_traj(states, gammas=[3.0] * 6), _env(), cfg) is Outcome.MAX_STEPS


def test_empty_trajectory_is_skipped():
    assert classify(Trajectory(0, np.zeros(2)), _env(), _cfg()) is Outcome.SKIPPED


# metrics


def _with_f0_velocities(env, states) -> Trajectory:
    states = np.asarray(states, dtype=float)
    vel = np.array([env.initial(x) for x in states])
    traj = _traj(states, vel)
    traj.outcome = Outcome.MAX_STEPS
    return traj


def test_metrics_vanish_when_following_the_field():
    env = _env()
    traj = _with_f0_velocities(env, [[1.0, 0.0], [0.99, 0.0], [0.98, 0.0]])
    m = trajectory_metrics(traj, env)
    assert m["rmse_vel_to_f0"] == 0.0
    assert m["nics_vel_to_f0"] == pytest.approx(0.0, abs=1e-15)


def test_reversed_velocities_have_nics_one():
    env = _env()
    traj = _with_f0_velocities(env, [[1.0, 0.0], [0.5, 0.5]])
    traj.velocities = -traj.velocities
    m = trajectory_metrics(traj, env)
    assert m["nics_vel_to_f0"] == pytest.approx(1.0)
    f0 = np.array([env.initial(x) for x in traj.states])
    assert m["rmse_vel_to_f0"] == pytest.approx(math.sqrt(np.mean(np.sum((2 * f0) ** 2, axis=1))))


def test_two_step_metrics():
    env = _env()
    traj = _traj([[1.0, 0.0], [0.0, 2.0]], [[1.0, 0.0], [0.0, 1.0]])
    m = trajectory_metrics(traj, env)
    assert m["rmse_step"] == pytest.approx(math.sqrt(2.0))
    assert m["nics_step"] == pytest.approx(0.5)
    assert m["rmse_pos_to_reference"] == pytest.approx(math.sqrt((1.0 + 4.0) / 2))


def test_aggregate_is_order_independent():
    env = _env()
    rng = np.random.default_rng(3)
    trajs = []
    for i in range(6):
        t = _traj(rng.normal(size=(5, 2)), rng.normal(size=(5, 2)))
        t.id, t.outcome = i, Outcome.MAX_STEPS
        trajs.append(t)
    a = compute_metrics(trajs, env)
    b = compute_metrics(trajs[::-1], env)
    for key in a:
        if isinstance(a[key], dict):
            assert a[key]["mean"] == pytest.approx(b[key]["mean"], rel=1e-14)
            assert a[key]["std"] == pytest.approx(b[key]["std"], rel=1e-14)
    assert a["n_trajectories"] == 6


def test_skipped_trajectories_are_ignored():
    env = _env()
    skipped = Trajectory(9, np.zeros(2))
    traj = _with_f0_velocities(env, [[1.0, 0.0], [0.99, 0.0]])
    assert compute_metrics([traj, skipped], env)["n_trajectories"] == 1
    with pytest.raises(ValueError):
        compute_metrics([skipped], env)


def test_run_directory_roundtrip(tmp_path):
    doc = handlers.simulate(straight_scenario([[1.0, 2.0], [3.0, 3.0], [-1.0, 0.5]], [CIRCLE]), tmp_path / "run")
    scenario, trajs = load_run(tmp_path / "run")
    assert [t.outcome.value for t in trajs] == [t["outcome"] for t in doc["outcomes"]["trajectories"]]
    assert handlers.metrics(tmp_path / "run") == doc["metrics"]
    assert scenario.spec.name == "straight"


# fields


def test_empty_scenario_field_is_the_initial_field():
    scenario = parse_scenario(straight_scenario([[1.0, 0.0]]))
    rows = sample_field(scenario, (5, 4), [-2.0, -2.0], [2.0, 2.0])
    assert len(rows) == 20
    for row in rows:
        assert np.array_equal(row["velocity"], -row["position"])
        assert math.isinf(row["gamma_min"])


def test_field_marks_occupied_nodes():
    scenario = parse_scenario(straight_scenario([[1.0, 0.0]], [CIRCLE]))
    rows = sample_field(scenario, (3, 3), [2.5, 2.5], [3.5, 3.5])
    centre = rows[4]
    assert np.allclose(centre["position"], [3.0, 3.0])
    assert centre["velocity"] is None


def test_dense_field_is_fast():
    scenario = load_scenario(SCENARIOS / "star_hull_wavy.json")
    start = time.perf_counter()
    rows = sample_field(scenario, (200, 200))
    assert len(rows) == 40000
    assert time.perf_counter() - start < 30.0


def test_start_on_the_saddle_line_does_not_arrive():
    # Directly behind the obstacle as seen from the attractor the flow stops at the saddle.
    small = {"shape": {"type": "sphere", "center": [1.0, 1.0], "radius": 0.3}}
    scenario = parse_scenario(straight_scenario([[2.0, 2.0], [2.0, 1.5]], [small], max_steps=500))
    behind, beside = integrate(scenario)
    assert behind.outcome is not Outcome.CONVERGED and behind.outcome is not Outcome.COLLISION
    assert beside.outcome is Outcome.CONVERGED


def test_room_scenario_converges_everywhere():
    scenario = load_scenario(SCENARIOS / "room_two_obstacles.json")
    outcomes = [t.outcome for t in integrate(scenario)]
    assert outcomes.count(Outcome.CONVERGED) == len(outcomes) == 50
