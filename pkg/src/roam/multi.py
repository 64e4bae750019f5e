"""Avoidance among several obstacles, trees and enclosing hulls.

Every obstacle-like element is wrapped in a unit that reports its distance
value, convergence direction and single-element avoidance direction.  The
units are blended by distance weights; an element touching the query point
takes over completely, so the single-element guarantees carry over.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Protocol, Sequence

import numpy as np

from .avoidance import AvoidanceParams, obstacle_terms, rotate_toward
from .convergence import convergence_direction
from .direction_space import ArrayLike, DirectionFrame, norm, unit
from .dynamics import Dynamics
from .errors import AntiCollinear, AtReferencePoint
from .obstacle_tree import ObstacleTree
from .obstacles import Obstacle
from .rotation_algebra import rotational_sum
from .tree_avoidance import avoid_tree_detailed, tree_convergence
from .weights import boundary_weights, compose_moving_frame, distance_weights, obstacle_weights

LOCAL_ATTRACTOR_FACTOR = 1.2


class AvoidanceUnit(Protocol):
    """Anything that can be avoided on its own and blended with others."""

    def gamma(self, xi: np.ndarray) -> float: ...

    def velocity(self) -> np.ndarray: ...

    def convergence(self, dynamics: Dynamics, xi: np.ndarray, t: float, initial: Optional[np.ndarray] = None) -> np.ndarray: ...

    def avoid(self, initial: np.ndarray, convergence: np.ndarray, xi: np.ndarray, params: AvoidanceParams) -> tuple[np.ndarray, float]: ...


@dataclass(frozen=True, eq=False)
class ObstacleUnit:
    obstacle: Obstacle

    def gamma(self, xi: np.ndarray) -> float:
        return self.obstacle.gamma(xi)

    def velocity(self) -> np.ndarray:
        if self.obstacle.velocity is None:
            return np.zeros(self.obstacle.dim)
        return np.asarray(self.obstacle.velocity, dtype=float)

    def convergence(self, dynamics: Dynamics, xi: np.ndarray, t: float, initial: Optional[np.ndarray] = None) -> np.ndarray:
        return convergence_direction(dynamics, self.obstacle, xi, t, initial=initial)

    def avoid(self, initial: np.ndarray, convergence: np.ndarray, xi: np.ndarray, params: AvoidanceParams) -> tuple[np.ndarray, float]:
        try:
            geo = self.obstacle.local(xi)
        except AtReferencePoint:
            if self.obstacle.inverted:
                return initial / math.sqrt(float(initial @ initial)), 1.0
            raise
        convergence = convergence / math.sqrt(float(convergence @ convergence))
        terms = obstacle_terms(geo, convergence, params)
        return rotate_toward(initial, convergence, terms.tangent, terms.rotation_weight), terms.speed_factor


@dataclass(frozen=True, eq=False)
class TreeUnit:
    tree: ObstacleTree
    weight_mode: str = "absolute"

    def gamma(self, xi: np.ndarray) -> float:
        return self.tree.gamma(xi)

    def velocity(self) -> np.ndarray:
        return np.zeros(self.tree.dim)

    def convergence(self, dynamics: Dynamics, xi: np.ndarray, t: float, initial: Optional[np.ndarray] = None) -> np.ndarray:
        return tree_convergence(self.tree, dynamics, xi, t, weight_mode=self.weight_mode)

    def avoid(self, initial: np.ndarray, convergence: np.ndarray, xi: np.ndarray, params: AvoidanceParams) -> tuple[np.ndarray, float]:
        return avoid_tree_detailed(self.tree, initial, convergence, xi, params, self.weight_mode)


def as_unit(element: Obstacle | ObstacleTree, weight_mode: str = "absolute") -> AvoidanceUnit:
    if isinstance(element, ObstacleTree):
        return TreeUnit(element, weight_mode)
    return ObstacleUnit(element)


def _blend_directions(convergence: np.ndarray, f_dir: np.ndarray, weighted: list[tuple[float, np.ndarray]]) -> np.ndarray:
    """Weighted mean of unit directions in the direction space anchored at ``convergence``."""
    try:
        frame = DirectionFrame(convergence)
        kappa = sum(w * frame.kappa(d) for w, d in weighted)
        return frame.vector(kappa)
    except AntiCollinear:
        pass
    try:
        return rotational_sum(f_dir, weighted)
    except AntiCollinear:
        return max(weighted, key=lambda item: item[0])[1]


@dataclass(frozen=True)
class MultiResult:
    velocity: np.ndarray
    speed_factor: float
    gamma_min: float


def avoid_multi_detailed(
    units: Sequence[AvoidanceUnit],
    dynamics: Dynamics,
    xi: ArrayLike,
    t: float = 0.0,
    params: AvoidanceParams = AvoidanceParams(),
    weight_mode: str = "absolute",
) -> MultiResult:
    xi = np.asarray(xi, dtype=float)
    f = dynamics.evaluate(xi, t)
    if not units:
        return MultiResult(f.copy(), 1.0, math.inf)
    gammas = [u.gamma(xi) for u in units]
    gamma_min = min(gammas)

    frame_weights = obstacle_weights(gammas, mode=weight_mode)
    velocities = [u.velocity() for u in units]
    moving = any(w > 0.0 and np.any(v != 0.0) for w, v in zip(frame_weights, velocities))
    frame_velocity = compose_moving_frame(np.zeros_like(f), velocities, frame_weights) if moving else None
    f_rel = f - frame_velocity if moving else f

    speed = math.sqrt(float(f_rel @ f_rel))
    if speed == 0.0:
        out = np.zeros_like(f) if frame_velocity is None else frame_velocity
        return MultiResult(out, 1.0, gamma_min)

    weights = distance_weights(gammas, mode=weight_mode, relative=True)
    active = [i for i in range(len(units)) if weights[i] > 0.0]
    if not active:
        direction, h = f_rel / speed, 1.0
    elif len(active) == 1:
        unit_ = units[active[0]]
        direction, h = unit_.avoid(f_rel, unit_.convergence(dynamics, xi, t, f), xi, params)
    else:
        f_dir = f_rel / speed
        conv = [(float(weights[i]), units[i].convergence(dynamics, xi, t, f)) for i in active]
        try:
            c = rotational_sum(f_dir, conv)
        except AntiCollinear:
            c = max(conv, key=lambda item: item[0])[1]
        rotated: list[tuple[float, np.ndarray]] = []
        h = 1.0
        for i in active:
            d_i, h_i = units[i].avoid(f_rel, c, xi, params)
            rotated.append((float(weights[i]), d_i))
            h *= h_i ** float(weights[i])
        direction = _blend_directions(unit(c), f_dir, rotated)

    velocity = (h * speed) * direction
    if frame_velocity is not None:
        velocity = velocity + frame_velocity
    return MultiResult(velocity, h, gamma_min)


def avoid_multi(
    elements: Sequence[Obstacle | ObstacleTree],
    dynamics: Dynamics,
    xi: ArrayLike,
    t: float = 0.0,
    params: AvoidanceParams = AvoidanceParams(),
    weight_mode: str = "absolute",
) -> np.ndarray:
    """Avoidance velocity among obstacles, trees and at most one enclosing hull.

    Obstacles carrying a velocity are avoided in their moving frame.
    """
    units = [as_unit(e, weight_mode) for e in elements]
    return avoid_multi_detailed(units, dynamics, xi, t, params, weight_mode).velocity


def local_attractor(hull: Obstacle, attractor: np.ndarray) -> np.ndarray:
    """Attractor used inside ``hull``: the global one if enclosed, else a point just past the hull surface."""
    if hull.gamma(attractor) > 1.0:
        return attractor
    toward = attractor - hull.reference_point
    length = norm(toward)
    if length == 0.0:
        return attractor
    u = toward / length
    return hull.reference_point + LOCAL_ATTRACTOR_FACTOR * hull.surface_radius(u) * u


def avoid_multihull_detailed(
    hulls: Sequence[Obstacle],
    dynamics: Dynamics,
    xi: ArrayLike,
    t: float = 0.0,
    params: AvoidanceParams = AvoidanceParams(),
    local_attractors: Optional[Sequence[ArrayLike]] = None,
) -> MultiResult:
    """Avoidance inside a union of overlapping enclosing hulls."""
    xi = np.asarray(xi, dtype=float)
    if not hulls:
        raise ValueError("at least one hull is required")
    if not all(h.inverted for h in hulls):
        raise ValueError("multihull environments take enclosing (inverted) hulls only")
    f = dynamics.evaluate(xi, t)
    gammas = [h.gamma(xi) for h in hulls]
    weights = boundary_weights(gammas)
    gamma_min = max(gammas)
    speed = math.sqrt(float(f @ f))
    if speed == 0.0:
        return MultiResult(np.zeros_like(f), 1.0, gamma_min)
    f_dir = f / speed

    sing = dynamics.singularity(t)
    if local_attractors is not None:
        targets = [np.asarray(a, dtype=float) for a in local_attractors]
        if len(targets) != len(hulls):
            raise ValueError("one local attractor is required per hull")
    elif sing is not None:
        targets = [local_attractor(h, np.asarray(sing[0], dtype=float)) for h in hulls]
    else:
        targets = []

    active = [i for i in range(len(hulls)) if weights[i] > 0.0]
    pulls: list[tuple[float, np.ndarray]] = []
    for i in active:
        pull = targets[i] - xi if targets else f_dir
        length = norm(pull)
        pulls.append((float(weights[i]), pull / length if length > 0.0 else f_dir))
    try:
        c = rotational_sum(f_dir, pulls)
    except AntiCollinear:
        c = max(pulls, key=lambda item: item[0])[1]

    rotated: list[tuple[float, np.ndarray]] = []
    h = 1.0
    for i in active:
        d_i, h_i = ObstacleUnit(hulls[i]).avoid(f, c, xi, params)
        rotated.append((float(weights[i]), d_i))
        h *= h_i ** float(weights[i])
    direction = rotated[0][1] if len(rotated) == 1 else _blend_directions(c, f_dir, rotated)
    return MultiResult((h * speed) * direction, h, gamma_min)


def avoid_multihull(
    hulls: Sequence[Obstacle],
    dynamics: Dynamics,
    xi: ArrayLike,
    t: float = 0.0,
    params: AvoidanceParams = AvoidanceParams(),
    local_attractors: Optional[Sequence[ArrayLike]] = None,
) -> np.ndarray:
    return avoid_multihull_detailed(hulls, dynamics, xi, t, params, local_attractors).velocity
