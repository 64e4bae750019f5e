import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from roam.direction_space import (
    DirectionFrame,
    apply_rotation,
    complete_basis,
    from_direction_space,
    is_bijective,
    rotation_from_pair,
    to_direction_space,
)
from roam.errors import AntiCollinear


def unit_vectors(dim: int):
    return (
        st.lists(st.floats(-1.0, 1.0, allow_nan=False), min_size=dim, max_size=dim)
        .map(np.array)
        .filter(lambda v: np.linalg.norm(v) > 1e-3)
        .map(lambda v: v / np.linalg.norm(v))
    )


@pytest.mark.parametrize("dim", [2, 3, 5])
def test_basis_of_first_axis_is_identity(dim):
    assert np.array_equal(complete_basis(np.eye(dim)[0]), np.eye(dim))


def test_planar_basis_turns_counter_clockwise():
    basis = complete_basis([0.0, 1.0])
    assert np.allclose(basis[:, 0], [0.0, 1.0])
    assert np.allclose(basis[:, 1], [-1.0, 0.0])
    assert np.linalg.det(basis) == pytest.approx(1.0)


def test_random_basis_in_eight_dimensions_is_orthonormal():
    rng = np.random.default_rng(1)
    basis = complete_basis(rng.normal(size=8))
    assert np.max(np.abs(basis.T @ basis - np.eye(8))) < 1e-9
    assert np.linalg.det(basis) == pytest.approx(1.0)


def test_zero_vector_is_rejected():
    with pytest.raises(ValueError):
        complete_basis([0.0, 0.0, 0.0])


def test_kappa_of_anchor_is_zero():
    assert np.array_equal(to_direction_space([1.0, 0.0, 0.0], [1.0, 0.0, 0.0]), np.zeros(2))


def test_right_angle_in_the_plane():
    kappa = to_direction_space([1.0, 0.0], [0.0, 1.0])
    assert kappa.shape == (1,)
    assert kappa[0] == pytest.approx(math.pi / 2)


def test_third_axis_in_three_dimensions():
    kappa = to_direction_space([1.0, 0.0, 0.0], [0.0, 0.0, 1.0])
    assert np.allclose(kappa, [0.0, math.pi / 2])
    assert np.allclose(from_direction_space([1.0, 0.0, 0.0], kappa), [0.0, 0.0, 1.0])


def test_zero_kappa_maps_to_anchor():
    assert np.array_equal(from_direction_space([0.0, 1.0, 0.0], np.zeros(2)), [0.0, 1.0, 0.0])


def test_antipodal_direction_is_rejected():
    with pytest.raises(AntiCollinear):
        to_direction_space([1.0, 0.0, 0.0], [-1.0, 0.0, 0.0])
    with pytest.raises(AntiCollinear):
        DirectionFrame([0.0, 1.0]).kappa([0.0, -1.0])


def test_bijective_ball():
    assert is_bijective([3.0])
    assert not is_bijective([0.0, math.pi])


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 6).flatmap(lambda d: st.tuples(unit_vectors(d), unit_vectors(d))))
def test_roundtrip_and_angle(pair):
    b, v = pair
    if float(b @ v) <= -1.0 + 1e-6:
        return
    kappa = to_direction_space(b, v)
    assert np.allclose(from_direction_space(b, kappa), v, atol=1e-9)
    assert math.cos(np.linalg.norm(kappa)) == pytest.approx(float(b @ v), abs=1e-9)


def test_planar_frame_matches_generic_embedding():
    # A planar problem embedded in 3D yields the same angle.
    rng = np.random.default_rng(3)
    for _ in range(200):
        b, v = rng.normal(size=2), rng.normal(size=2)
        planar = DirectionFrame(b).kappa(v)
        embedded = DirectionFrame(np.append(b, 0.0)).kappa(np.append(v, 0.0))
        assert abs(abs(planar[0]) - np.linalg.norm(embedded)) < 1e-12


def test_rotation_of_orthogonal_pair():
    rot = rotation_from_pair([1.0, 0.0, 0.0], [0.0, 1.0, 0.0])
    assert np.allclose(rot.b_i, [1.0, 0.0, 0.0])
    assert np.allclose(rot.b_o, [0.0, 1.0, 0.0])
    assert rot.beta == pytest.approx(math.pi / 2)


def test_rotation_of_equal_pair_is_identity():
    rot = rotation_from_pair([0.3, 0.4], [0.3, 0.4])
    assert rot.beta == 0.0


def test_rotation_by_forty_five_degrees():
    rot = rotation_from_pair([1.0, 0.0], [1.0, 1.0])
    assert np.allclose(rot.b_o, [0.0, 1.0])
    assert rot.beta == pytest.approx(math.pi / 4)


def test_apply_rotation_examples():
    rot = rotation_from_pair([1.0, 0.0, 0.0], [0.0, 1.0, 0.0])
    assert np.allclose(apply_rotation(rot, [1.0, 0.0, 0.0], math.pi / 2), [0.0, 1.0, 0.0])
    assert np.allclose(apply_rotation(rot, [0.0, 0.0, 1.0], 1.234), [0.0, 0.0, 1.0])
    half = math.sqrt(0.5)
    assert np.allclose(apply_rotation(rot, [1.0, 0.0, 0.0], math.pi / 4), [half, half, 0.0])


def test_endpoint_is_target_direction():
    rng = np.random.default_rng(4)
    for dim in (2, 3, 7):
        a, b = rng.normal(size=dim), rng.normal(size=dim)
        rot = rotation_from_pair(a, b)
        assert np.allclose(rot.endpoint, b / np.linalg.norm(b))
