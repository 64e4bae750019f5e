"""Rotational avoidance of a single star-shaped obstacle.

The initial velocity is rotated, in the direction space anchored at the
convergence direction, toward a pseudo-tangent that lies on the
obstacle-tangent sphere.  How far it is rotated depends on the distance to
the obstacle; the speed is reduced only when heading into the surface.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .direction_space import TOL_ANTICOLLINEAR, ArrayLike, DirectionFrame, norm
from .errors import AntiCollinear, AtReferencePoint, DegenerateSaddle
from .obstacles import LocalGeometry, Obstacle

SADDLE_TOL = 1e-9


@dataclass(frozen=True)
class AvoidanceParams:
    """``tangent_radius`` in [pi/2, pi]; larger values push away from the surface."""

    tangent_radius: float = math.pi / 2
    smoothness: float = 0.3

    def __post_init__(self) -> None:
        if not math.pi / 2 - 1e-12 <= self.tangent_radius <= math.pi + 1e-12:
            raise ValueError("tangent_radius must lie in [pi/2, pi]")
        if self.smoothness <= 0:
            raise ValueError("smoothness must be positive")


@dataclass(frozen=True)
class AvoidanceIntermediates:
    """Per-obstacle quantities of one avoidance evaluation."""

    gamma: float
    rotation_weight: float
    exponent: float
    reference_radius: float
    delta_k: float
    speed_factor: float
    tangent: np.ndarray


def _intersect_radius(start: np.ndarray, toward: np.ndarray, radius: float) -> np.ndarray:
    """Point ``start + b (toward - start)`` with norm ``radius`` and ``b > 0``."""
    d = toward - start
    a = float(d @ d)
    bq = 2.0 * float(start @ d)
    cq = float(start @ start) - radius * radius
    b = (-bq + math.sqrt(max(bq * bq - 4.0 * a * cq, 0.0))) / (2.0 * a)
    return start + b * d


def pseudo_tangent(normal: ArrayLike, r_in: ArrayLike, convergence: ArrayLike, tangent_radius: float = math.pi / 2) -> np.ndarray:
    """Push ``convergence`` away from the inward reference direction onto the tangent sphere.

    Returns ``convergence`` unchanged when it already points far enough away from the
    obstacle.
    """
    frame = DirectionFrame(-np.asarray(normal, dtype=float))
    convergence = np.asarray(convergence, dtype=float)
    if float(frame.anchor @ convergence) / norm(convergence) <= -1.0 + TOL_ANTICOLLINEAR:
        return convergence / norm(convergence)
    kappa_c = frame.kappa(convergence)
    if norm(kappa_c) >= tangent_radius:
        return frame.vector(kappa_c)
    kappa_r = frame.kappa(r_in)
    if norm(kappa_c - kappa_r) < SADDLE_TOL:
        raise DegenerateSaddle("convergence direction coincides with the reference direction")
    return frame.vector(_intersect_radius(kappa_r, kappa_c, tangent_radius))


def rotation_weight(gamma: float, delta_k: float, reference_radius: float, smoothness: float = 0.3) -> tuple[float, float]:
    """Rotation weight and its exponent ``(lambda, q)``."""
    if delta_k <= 0.0:
        return 0.0, math.inf
    q = max(1.0, reference_radius / delta_k) ** smoothness
    if math.isinf(gamma):
        return 0.0, q
    if gamma <= 1.0:
        return 1.0, q
    return gamma ** (-q), q


def speed_scaling(delta_k: float, reference_radius: float, gamma: float) -> float:
    """Speed factor in [0, 1]; zero only at the saddle point on the surface."""
    inv = 0.0 if math.isinf(gamma) else 1.0 / max(gamma, 1.0)
    return min(1.0, (delta_k / reference_radius) ** 2 + (1.0 - inv) ** 2)


def obstacle_terms(geo: LocalGeometry, convergence: np.ndarray, params: AvoidanceParams) -> AvoidanceIntermediates:
    """Pseudo-tangent, rotation weight and speed factor for one obstacle."""
    frame = DirectionFrame(-geo.normal)
    kappa_r = frame.kappa(geo.reference_in)
    reference_radius = min(params.tangent_radius - norm(kappa_r), math.pi / 2)
    if float(frame.anchor @ convergence) <= -1.0 + TOL_ANTICOLLINEAR:
        delta_k = math.pi - norm(kappa_r)
        tangent = convergence
    else:
        kappa_c = frame.kappa(convergence)
        delta_k = norm(kappa_c - kappa_r)
        if norm(kappa_c) >= params.tangent_radius:
            tangent = frame.vector(kappa_c)
        elif delta_k < SADDLE_TOL:
            delta_k = 0.0
            tangent = convergence
        else:
            tangent = frame.vector(_intersect_radius(kappa_r, kappa_c, params.tangent_radius))
    lam, q = rotation_weight(geo.gamma, delta_k, reference_radius, params.smoothness)
    h = speed_scaling(delta_k, reference_radius, geo.gamma)
    return AvoidanceIntermediates(geo.gamma, lam, q, reference_radius, delta_k, h, tangent)


def rotate_toward(initial: np.ndarray, convergence: np.ndarray, tangent: np.ndarray, lam: float) -> np.ndarray:
    """Unit direction between ``initial`` and ``tangent`` interpolated in the ``convergence`` frame."""
    f_dir = initial / math.sqrt(float(initial @ initial))
    if lam == 0.0:
        return f_dir
    try:
        frame = DirectionFrame(convergence)
        kappa = (1.0 - lam) * frame.kappa(f_dir) + lam * frame.kappa(tangent)
        return frame.vector(kappa)
    except AntiCollinear:
        frame = DirectionFrame(f_dir)
        return frame.vector(lam * frame.kappa(tangent))


def avoid_single_detailed(
    obstacle: Obstacle,
    initial: ArrayLike,
    convergence: ArrayLike,
    xi: ArrayLike,
    params: AvoidanceParams = AvoidanceParams(),
) -> tuple[np.ndarray, AvoidanceIntermediates | None]:
    initial = np.asarray(initial, dtype=float)
    speed = math.sqrt(float(initial @ initial))
    if speed == 0.0:
        return np.zeros_like(initial), None
    try:
        geo = obstacle.local(xi)
    except AtReferencePoint:
        if obstacle.inverted:
            return initial.copy(), None
        raise
    convergence = np.asarray(convergence, dtype=float)
    convergence = convergence / math.sqrt(float(convergence @ convergence))
    terms = obstacle_terms(geo, convergence, params)
    direction = rotate_toward(initial, convergence, terms.tangent, terms.rotation_weight)
    return (terms.speed_factor * speed) * direction, terms


def avoid_single(
    obstacle: Obstacle,
    initial: ArrayLike,
    convergence: ArrayLike,
    xi: ArrayLike,
    params: AvoidanceParams = AvoidanceParams(),
) -> np.ndarray:
    """Avoidance velocity for one obstacle given the initial and convergence directions."""
    return avoid_single_detailed(obstacle, initial, convergence, xi, params)[0]
