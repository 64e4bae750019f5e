"""Direction space of unit vectors and plane rotations.

A unit vector ``v`` is encoded relative to an anchor direction ``b`` as a
point ``kappa`` in R^(N-1) whose norm equals the angle between ``b`` and ``v``
and whose direction is the tangential component of ``v`` expressed in a fixed
orthonormal basis completing ``b``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import AntiCollinear

ArrayLike = Union[Sequence[float], np.ndarray]

TOL_ANTICOLLINEAR = 1e-6
_DEGENERATE_RESIDUAL = 1e-12


def norm(v: ArrayLike) -> float:
    """Euclidean length of a 1-D vector (cheaper than the general numpy routine)."""
    return math.hypot(*(v.tolist() if isinstance(v, np.ndarray) else v))


def unit(v: ArrayLike) -> np.ndarray:
    """Return ``v`` scaled to unit length; zero vectors are rejected."""
    arr = np.asarray(v, dtype=float)
    length = norm(arr)
    if length == 0.0 or not math.isfinite(length):
        raise ValueError("cannot normalize a zero or non-finite vector")
    return arr / length


def complete_basis(anchor: ArrayLike) -> np.ndarray:
    """Orthonormal matrix whose first column is ``anchor``.

    The second column comes from the standard axis least aligned with ``anchor``;
    the remaining columns are filled greedily from the other axes (largest
    residual first, lowest index on ties).  The last column is flipped if
    needed so that the determinant is +1.
    """
    anchor = unit(anchor)
    dim = anchor.size
    if dim == 2:
        return np.array([[anchor[0], -anchor[1]], [anchor[1], anchor[0]]])

    basis = np.zeros((dim, dim))
    basis[:, 0] = anchor
    remaining = list(range(dim))
    first = int(np.argmin(np.abs(anchor)))
    remaining.remove(first)
    pending = [first]
    for col in range(1, dim):
        if pending:
            axis = pending.pop()
        else:
            rows = basis[remaining, :col]
            residuals = 1.0 - np.einsum("ij,ij->i", rows, rows)
            axis = remaining[int(np.argmax(residuals))]
            remaining.remove(axis)
        vec = np.zeros(dim)
        vec[axis] = 1.0
        span = basis[:, :col]
        for _ in range(2):
            vec = vec - span @ (span.T @ vec)
        basis[:, col] = vec / norm(vec)

    if np.linalg.det(basis) < 0:
        basis[:, -1] = -basis[:, -1]
    return basis


class DirectionFrame:
    """Cached basis for repeated direction-space queries around one anchor.

    Planar frames take a scalar shortcut; the result is the same map.
    """

    __slots__ = ("anchor", "basis", "dim", "_xy")

    def __init__(self, anchor: ArrayLike):
        self.basis = complete_basis(anchor)
        self.anchor = self.basis[:, 0].copy()
        self.dim = self.anchor.size
        self._xy = self.anchor.tolist() if self.dim == 2 else None

    def kappa(self, v: ArrayLike) -> np.ndarray:
        """Direction-space image of ``v``."""
        if self._xy is not None:
            return np.array((self._planar_angle(v),))
        v = unit(v)
        dot = float(self.anchor @ v)
        if dot <= -1.0 + TOL_ANTICOLLINEAR:
            raise AntiCollinear(f"direction is anti-collinear to the anchor (dot={dot:.3g})")
        tangential = self.basis[:, 1:].T @ v
        length = norm(tangential)
        if length == 0.0:
            return np.zeros(self.dim - 1)
        angle = math.atan2(length, dot)
        return tangential * (angle / length)

    def _planar_angle(self, v: ArrayLike) -> float:
        ax, ay = self._xy  # type: ignore[misc]
        vx, vy = np.asarray(v, dtype=float).tolist()
        length = math.hypot(vx, vy)
        if length == 0.0 or not math.isfinite(length):
            raise ValueError("cannot normalize a zero or non-finite vector")
        vx, vy = vx / length, vy / length
        dot = ax * vx + ay * vy
        if dot <= -1.0 + TOL_ANTICOLLINEAR:
            raise AntiCollinear(f"direction is anti-collinear to the anchor (dot={dot:.3g})")
        cross = ax * vy - ay * vx
        if cross == 0.0:
            return 0.0
        return math.copysign(math.atan2(abs(cross), dot), cross)

    def vector(self, kappa: ArrayLike) -> np.ndarray:
        """Unit vector whose direction-space image is ``kappa``."""
        if self._xy is not None:
            ax, ay = self._xy
            (k,) = np.asarray(kappa, dtype=float).tolist()
            if k == 0.0:
                return self.anchor.copy()
            c, s = math.cos(k), math.sin(k)
            return np.array((c * ax - s * ay, c * ay + s * ax))
        kappa = np.asarray(kappa, dtype=float)
        angle = norm(kappa)
        if angle == 0.0:
            return self.anchor.copy()
        coords = np.empty(self.dim)
        coords[0] = math.cos(angle)
        coords[1:] = kappa * (math.sin(angle) / angle)
        return self.basis @ coords


def to_direction_space(anchor: ArrayLike, v: ArrayLike) -> np.ndarray:
    """Map ``v`` into the direction space anchored at ``anchor``."""
    return DirectionFrame(anchor).kappa(v)


def from_direction_space(anchor: ArrayLike, kappa: ArrayLike) -> np.ndarray:
    """Inverse of :func:`to_direction_space` for ``|kappa| < pi``."""
    return DirectionFrame(anchor).vector(kappa)


def is_bijective(kappa: ArrayLike) -> bool:
    """Whether ``kappa`` lies inside the open ball where the inverse is unique."""
    return norm(kappa) < math.pi


@dataclass(frozen=True)
class VectorRotation:
    """Rotation by ``beta`` in the plane spanned by orthonormal ``b_i``, ``b_o``."""

    b_i: np.ndarray
    b_o: np.ndarray
    beta: float

    @property
    def endpoint(self) -> np.ndarray:
        """Image of ``b_i`` under the full rotation."""
        return combine(math.cos(self.beta), self.b_i, math.sin(self.beta), self.b_o)


def combine(a: float, u: np.ndarray, b: float, v: np.ndarray) -> np.ndarray:
    """``a * u + b * v`` (with a float fast path for planar vectors)."""
    if u.size == 2:
        ux, uy = u.tolist()
        vx, vy = v.tolist()
        return np.array((a * ux + b * vx, a * uy + b * vy))
    return a * u + b * v


def _planar_rotation(v_i: ArrayLike, v_o: ArrayLike) -> VectorRotation:
    ix, iy = np.asarray(v_i, dtype=float).tolist()
    tx, ty = np.asarray(v_o, dtype=float).tolist()
    li, lt = math.hypot(ix, iy), math.hypot(tx, ty)
    if li == 0.0 or lt == 0.0 or not (math.isfinite(li) and math.isfinite(lt)):
        raise ValueError("cannot normalize a zero or non-finite vector")
    ix, iy, tx, ty = ix / li, iy / li, tx / lt, ty / lt
    dot = ix * tx + iy * ty
    if dot <= -1.0 + TOL_ANTICOLLINEAR:
        raise AntiCollinear(f"rotation pair is anti-collinear (dot={dot:.3g})")
    cross = ix * ty - iy * tx
    beta = math.atan2(abs(cross), dot)
    side = -1.0 if cross < 0.0 and abs(cross) > _DEGENERATE_RESIDUAL else 1.0
    return VectorRotation(np.array((ix, iy)), np.array((-side * iy, side * ix)), beta)


def rotation_from_pair(v_i: ArrayLike, v_o: ArrayLike) -> VectorRotation:
    """Plane rotation taking the direction of ``v_i`` onto that of ``v_o``."""
    if len(v_i) == 2:
        return _planar_rotation(v_i, v_o)
    b_i = unit(v_i)
    target = unit(v_o)
    dot = float(b_i @ target)
    if dot <= -1.0 + TOL_ANTICOLLINEAR:
        raise AntiCollinear(f"rotation pair is anti-collinear (dot={dot:.3g})")
    residual = target - dot * b_i
    residual = residual - float(b_i @ residual) * b_i
    length = norm(residual)
    beta = math.atan2(length, dot)
    if length <= _DEGENERATE_RESIDUAL:
        return VectorRotation(b_i, complete_basis(b_i)[:, 1].copy(), beta)
    return VectorRotation(b_i, residual / length, beta)


def apply_rotation(rot: VectorRotation, v: ArrayLike, angle: float) -> np.ndarray:
    """Rotate ``v`` by ``angle`` within the plane of ``rot``.

    The component of ``v`` orthogonal to the plane is left untouched, so
    the norm of ``v`` is preserved for any ``v``.
    """
    v = np.asarray(v, dtype=float)
    cos_a = math.cos(angle)
    sin_a = math.sin(angle)
    if v.size == 2:
        ix, iy = rot.b_i.tolist()
        ox, oy = rot.b_o.tolist()
        vx, vy = v.tolist()
        p_i = ix * vx + iy * vy
        p_o = ox * vx + oy * vy
        a = p_i * cos_a - p_o * sin_a
        b = p_i * sin_a + p_o * cos_a
        return np.array((a * ix + b * ox, a * iy + b * oy))
    p_i = float(rot.b_i @ v)
    p_o = float(rot.b_o @ v)
    rest = v - p_i * rot.b_i - p_o * rot.b_o
    return (
        rest
        + (p_i * cos_a - p_o * sin_a) * rot.b_i
        + (p_i * sin_a + p_o * cos_a) * rot.b_o
    )
