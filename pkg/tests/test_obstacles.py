import math

import numpy as np
import pytest

from roam.errors import AtReferencePoint
from roam.obstacle_tree import (
    ObstacleTree,
    hiding_weight,
    propagate_surface_point,
    propagate_surface_points,
    propagate_velocity,
    validate_tree,
)
from roam.obstacles import Ellipse, Obstacle, Sphere, StarPolygon2D, union_gamma

from fixtures import star_vertices
from helpers import SCENARIOS


def unit_circle() -> Obstacle:
    return Obstacle(Sphere([0.0, 0.0], 1.0))


def test_gamma_outside_circle():
    assert unit_circle().gamma([2.0, 0.0]) == pytest.approx(2.0)


def test_gamma_inside_and_at_reference():
    obs = unit_circle()
    assert obs.gamma([0.5, 0.0]) == pytest.approx(0.5)
    assert obs.gamma([0.0, 0.0]) == 0.0


@pytest.mark.parametrize(
    "obstacle",
    [
        unit_circle(),
        Obstacle(Ellipse([0.3, -0.2], [1.5, 0.4], 0.8)),
        Obstacle(StarPolygon2D(star_vertices())),
        Obstacle(Ellipse([0.0, 0.0], [3.0, 2.0]), inverted=True),
    ],
)
def test_gamma_is_one_on_the_boundary(obstacle):
    for point in obstacle.sample_boundary(64):
        assert obstacle.gamma(point) == pytest.approx(1.0, abs=1e-12)


def test_inverted_circle():
    hull = Obstacle(Sphere([0.0, 0.0], 2.0), inverted=True)
    assert hull.gamma([1.0, 0.0]) == pytest.approx(4.0)
    _, reference_out, _ = hull.directions([1.0, 0.0])
    assert np.allclose(reference_out, [-1.0, 0.0])
    with pytest.raises(AtReferencePoint):
        hull.gamma([0.0, 0.0])


def test_circle_directions():
    normal, reference_out, reference_in = unit_circle().directions([2.0, 0.0])
    assert np.allclose(normal, [1.0, 0.0])
    assert np.allclose(reference_out, [1.0, 0.0])
    assert np.allclose(reference_in, [-1.0, 0.0])


def test_ellipse_normal_on_axis():
    assert np.allclose(Obstacle(Ellipse([0.0, 0.0], [2.0, 1.0])).normal([2.0, 0.0]), [1.0, 0.0])


def test_normal_is_distance_gradient():
    obs = Obstacle(Ellipse([0.2, 0.1], [1.5, 0.6], 0.4), reference_point=[0.5, 0.2], d0=0.7)
    rng = np.random.default_rng(8)
    for _ in range(50):
        xi = rng.uniform(-3.0, 3.0, size=2)
        if obs.gamma(xi) <= 1.05:
            continue
        eps = 1e-6
        grad = np.array([(obs.gamma(xi + eps * e) - obs.gamma(xi - eps * e)) / (2 * eps) for e in np.eye(2)])
        assert np.allclose(obs.normal(xi), grad / np.linalg.norm(grad), atol=1e-6)


def test_boundary_points():
    assert np.allclose(unit_circle().boundary_point([2.0, 0.0]), [1.0, 0.0])
    assert np.allclose(Obstacle(Ellipse([0.0, 0.0], [2.0, 1.0])).boundary_point([0.0, 3.0]), [0.0, 1.0])


def test_star_polygon_boundary_points_lie_on_edges():
    poly = StarPolygon2D(star_vertices())
    obs = Obstacle(poly)
    verts = poly.vertices
    rng = np.random.default_rng(12)
    for u in rng.normal(size=(100, 2)):
        point = obs.boundary_point(obs.reference_point + u)
        assert obs.gamma(point) == pytest.approx(1.0, abs=1e-6)
        gaps = []
        for a, b in zip(verts, np.roll(verts, -1, axis=0)):
            edge = b - a
            s = np.clip((point - a) @ edge / (edge @ edge), 0.0, 1.0)
            gaps.append(np.linalg.norm(point - (a + s * edge)))
        assert min(gaps) < 1e-9


def test_reference_outside_kernel_is_rejected():
    with pytest.raises(ValueError):
        Obstacle(StarPolygon2D(star_vertices()), reference_point=[1.4, 0.0])
    with pytest.raises(ValueError):
        Obstacle(Ellipse([0.0, 0.0], [1.0, 1.0]), reference_point=[2.0, 0.0])


def test_margin_grows_obstacles_and_shrinks_hulls():
    assert Obstacle(Sphere([0.0, 0.0], 1.0), margin=0.5).gamma([1.5, 0.0]) == pytest.approx(1.0)
    hull = Obstacle(Sphere([0.0, 0.0], 2.0), margin=0.5, inverted=True)
    assert hull.gamma([1.5, 0.0]) == pytest.approx(1.0)


def test_finite_influence_radius():
    obs = unit_circle().with_influence(1.0)
    assert obs.gamma([1.5, 0.0]) == pytest.approx(2.0)
    assert math.isinf(obs.gamma([2.5, 0.0]))


def test_union_gamma_is_minimum():
    obstacles = [unit_circle(), Obstacle(Sphere([4.0, 0.0], 1.0))]
    assert union_gamma(obstacles, [2.5, 0.0]) == pytest.approx(1.5)
    assert math.isinf(union_gamma([], [0.0, 0.0]))


# trees


def test_single_component_tree_is_valid():
    assert validate_tree(ObstacleTree((unit_circle(),), (None,))) == []


def test_child_reference_outside_parent():
    child = Obstacle(Ellipse([1.2, 0.0], [0.5, 0.3]))
    problems = validate_tree(ObstacleTree((unit_circle(), child), (None, 0)))
    assert len(problems) == 1
    assert "not inside parent" in problems[0]


def test_opposing_chain():
    grand = unit_circle()
    parent = Obstacle(Ellipse([1.5, 0.0], [1.0, 0.3]), reference_point=[0.8, 0.0])
    child = Obstacle(Ellipse([0.6, 0.5], [0.15, 0.6]), reference_point=[0.6, 0.0])
    problems = validate_tree(ObstacleTree((grand, parent, child), (None, 0, 1)))
    assert len(problems) == 1
    assert "opposes" in problems[0]


def test_tree_structure_is_checked():
    with pytest.raises(ValueError):
        ObstacleTree((unit_circle(), unit_circle()), (None, None))
    with pytest.raises(ValueError):
        ObstacleTree((unit_circle(), unit_circle()), (1, 0))


def test_surface_point_propagation():
    parent = Obstacle(Sphere([0.0, 0.0], 2.0))
    child = Obstacle(Ellipse([0.2, 0.0], [0.3, 0.2]), reference_point=[0.0, 0.0])
    point, b = propagate_surface_point(parent, child, [0.5, 0.0])
    assert np.allclose(point, [-2.0, 0.0])
    assert b == pytest.approx(5.0)
    on_surface, b0 = propagate_surface_point(parent, child, [2.0, 0.0])
    assert b0 == pytest.approx(0.0, abs=1e-12)
    assert np.allclose(on_surface, [2.0, 0.0])


def test_three_ellipse_chains_stay_on_surfaces():
    from roam.scenario import load_scenario

    tree = load_scenario(SCENARIOS / "three_ellipses.json").environment.trees[0]
    rng = np.random.default_rng(2)
    for _ in range(100):
        xi = rng.uniform(-4.0, 4.0, size=2)
        if tree.gamma(xi) <= 1.0:
            continue
        for index in range(len(tree)):
            chain = propagate_surface_points(tree, xi, index)
            for comp_idx, point in zip(chain.indices, chain.points):
                base = tree.components[comp_idx].with_influence(None)
                assert base.gamma(point) == pytest.approx(1.0, abs=1e-6)


def _two_circles() -> ObstacleTree:
    root = Obstacle(Sphere([0.0, 0.0], 1.0))
    child = Obstacle(Sphere([1.2, 0.0], 0.5), reference_point=[0.9, 0.0])
    return ObstacleTree((root, child), (None, 0))


def test_hiding_weight_cases():
    tree = _two_circles()
    assert hiding_weight(tree, 0, [3.0, 0.0]) == 1.0
    # Seen from the far side the child surface point is outside the parent.
    assert hiding_weight(tree, 1, [3.0, 0.0]) == 1.0
    # Looking straight through the parent's reference the child is hidden.
    assert hiding_weight(tree, 1, [0.3, 0.0], surface_point=np.array([0.4, 0.0])) == 0.0


def test_hiding_weight_middle_case():
    tree = _two_circles()
    child = tree.components[1]
    parent = tree.components[0]
    # Direction with cosine 0.5 to the parent reference, surface point at parent distance 0.5.
    to_parent = parent.reference_point - child.reference_point
    angle = math.acos(0.5)
    u = np.array([math.cos(angle), math.sin(angle)]) * np.sign(to_parent[0])
    xi = child.reference_point + 0.3 * u
    surface = np.array([0.5, 0.0])
    assert parent.gamma(surface) == pytest.approx(0.5)
    assert hiding_weight(tree, 1, xi, surface_point=surface) == pytest.approx(0.25)


def test_velocity_propagation():
    tree = _two_circles()
    f_root = np.array([0.3, 1.0])
    chain = propagate_surface_points(tree, [2.0, 0.0], 1)
    # Both surface directions point along +x: no rotation.
    assert np.allclose(propagate_velocity(tree, chain, f_root), f_root)
    chain = propagate_surface_points(tree, [0.9, 1.5], 1)
    parent_dir = chain.points[1] - tree.components[0].reference_point
    child_dir = chain.points[0] - tree.components[1].reference_point
    turn = math.atan2(child_dir[1], child_dir[0]) - math.atan2(parent_dir[1], parent_dir[0])
    c, s = math.cos(turn), math.sin(turn)
    assert np.allclose(propagate_velocity(tree, chain, f_root), [c * 0.3 - s * 1.0, s * 0.3 + c * 1.0])
