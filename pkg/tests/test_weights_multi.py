import math

import numpy as np
import pytest

from roam.avoidance import avoid_single
from roam.convergence import convergence_direction
from roam.dynamics import LimitCycle2D, Straight
from roam.errors import AllBoundariesViolated
from roam.multi import avoid_multi, avoid_multi_detailed, avoid_multihull, as_unit, local_attractor
from roam.obstacles import Ellipse, Obstacle, Sphere
from roam.weights import (
    boundary_weights,
    compose_moving_frame,
    distance_weights,
    normalized_mapping_weights,
    obstacle_weights,
)


def test_single_far_obstacle_weight():
    assert obstacle_weights([11.0]) == pytest.approx([0.1])


def test_surface_obstacle_takes_all_weight():
    assert np.array_equal(obstacle_weights([1.0, 2.0, 5.0]), [1.0, 0.0, 0.0])


def test_normalised_when_the_sum_exceeds_one():
    assert obstacle_weights([2.0, 3.0]) == pytest.approx([2 / 3, 1 / 3])


def test_relative_weights_always_sum_to_one():
    w = distance_weights([5.0, 9.0], relative=True)
    assert w.sum() == pytest.approx(1.0)
    assert w == pytest.approx([2 / 3, 1 / 3])


def test_literal_mode():
    assert distance_weights([2.0, 4.0], mode="literal") == pytest.approx([2 / 3, 1 / 3])
    with pytest.raises(ValueError):
        distance_weights([2.0], mode="other")


def test_mapping_weight_normalisation():
    assert normalized_mapping_weights([0.5, 0.5]) == pytest.approx([0.5, 0.5])
    assert normalized_mapping_weights([0.2]) == pytest.approx([0.25])
    assert np.array_equal(normalized_mapping_weights([1.0, 0.3]), [1.0, 0.0])


def test_boundary_weights():
    assert np.array_equal(boundary_weights([3.0, 0.5]), [1.0, 0.0])
    assert np.array_equal(boundary_weights([1.0, 2.0]), [0.0, 1.0])
    assert boundary_weights([2.5, 2.5]) == pytest.approx([0.5, 0.5])
    with pytest.raises(AllBoundariesViolated):
        boundary_weights([0.5, 1.0])


def test_moving_frame_composition():
    static = np.array([1.0, -1.0])
    zero = [np.zeros(2), np.zeros(2)]
    assert np.array_equal(compose_moving_frame(static, zero, [0.5, 0.25]), static)
    u1, u2 = np.array([1.0, 2.0]), np.array([-4.0, 0.0])
    assert np.allclose(compose_moving_frame(static, [u1, u2], [0.5, 0.25]) - static, 0.5 * u1 + 0.25 * u2)


def test_no_obstacles_returns_the_field():
    dyn = LimitCycle2D(2.0)
    xi = np.array([0.5, 1.5])
    assert np.array_equal(avoid_multi([], dyn, xi), dyn.evaluate(xi))


def test_one_obstacle_is_bitwise_single():
    obs = Obstacle(Ellipse([1.0, 0.0], [0.6, 0.3], 0.3))
    dyn = Straight([4.0, 1.0])
    rng = np.random.default_rng(4)
    for xi in rng.uniform(-3.0, 3.0, size=(200, 2)):
        if obs.gamma(xi) <= 1.0:
            continue
        f = dyn.evaluate(xi)
        single = avoid_single(obs, f, convergence_direction(dyn, obs, xi), xi)
        assert np.array_equal(avoid_multi([obs], dyn, xi), single)


def test_moving_obstacle_on_surface_adds_its_velocity():
    u = np.array([0.3, -0.2])
    moving = Obstacle(Sphere([0.0, 0.0], 1.0), velocity=u)
    still = Obstacle(Sphere([0.0, 0.0], 1.0))
    dyn = Straight([3.0, 2.0])
    xi = np.array([0.0, 1.0])
    f = dyn.evaluate(xi)
    relative = avoid_single(still, f - u, convergence_direction(dyn, still, xi, initial=f), xi)
    assert np.allclose(avoid_multi([moving], dyn, xi) - relative, u)


def test_overlapping_obstacles_keep_the_field_continuous():
    obstacles = [Obstacle(Sphere([0.0, 0.0], 1.0)), Obstacle(Sphere([1.5, 0.2], 0.8))]
    dyn = Straight([5.0, 0.0])
    probe = [np.array([-3.0, 2.0]) + s * np.array([6.0, 0.0]) for s in np.linspace(0.0, 1.0, 600)]
    values = np.array([avoid_multi(obstacles, dyn, p) for p in probe])
    jumps = np.linalg.norm(np.diff(values, axis=0), axis=1)
    assert jumps.max() < 0.1


def test_surface_of_each_obstacle_is_respected_among_others():
    obstacles = [Obstacle(Sphere([0.0, 0.0], 1.0)), Obstacle(Ellipse([2.6, 0.5], [0.6, 0.9], 0.4))]
    dyn = Straight([5.0, 0.0])
    units = [as_unit(o) for o in obstacles]
    for k, obs in enumerate(obstacles):
        for xi in obs.sample_boundary(300):
            res = avoid_multi_detailed(units, dyn, xi)
            if res.speed_factor < 1e-2:
                continue
            assert float(obs.normal(xi) @ res.velocity) >= -1e-6


def test_multihull_weights_and_local_attractor():
    left = Obstacle(Ellipse([0.0, 0.0], [2.0, 1.0]), inverted=True)
    right = Obstacle(Ellipse([3.0, 0.0], [2.0, 1.0]), inverted=True)
    dyn = Straight([4.0, 0.0])
    outside_left = local_attractor(left, np.array([4.0, 0.0]))
    assert outside_left[0] > 2.0
    assert np.array_equal(local_attractor(right, np.array([4.0, 0.0])), [4.0, 0.0])
    # Only inside the left hull: it alone steers.
    xi = np.array([-1.0, 0.2])
    solo = avoid_multihull([left], dyn, xi, local_attractors=[outside_left])
    both = avoid_multihull([left, right], dyn, xi)
    assert np.allclose(solo, both)


def test_multihull_outside_everything_fails():
    hull = Obstacle(Sphere([0.0, 0.0], 1.0), inverted=True)
    with pytest.raises(AllBoundariesViolated):
        avoid_multihull([hull], Straight([0.0, 0.5]), [3.0, 0.0])


def test_weights_sum_below_one_far_away():
    w = obstacle_weights([40.0, 60.0])
    assert w.sum() < 1.0
    assert math.isclose(w[0], 1 / 39)
