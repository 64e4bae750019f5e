"""A complete avoidance setup: dynamics plus everything to steer around."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .avoidance import AvoidanceParams
from .direction_space import ArrayLike, norm
from .dynamics import Dynamics, LimitCycle2D, Spiral3D
from .multi import (
    AvoidanceUnit,
    MultiResult,
    ObstacleUnit,
    TreeUnit,
    avoid_multi_detailed,
    avoid_multihull_detailed,
)
from .obstacle_tree import ObstacleTree
from .obstacles import Obstacle


@dataclass(frozen=True, eq=False)
class Environment:
    """Obstacles, trees and hulls with the field they modulate.

    Obstacles with a velocity move rigidly: at time ``t`` they are shifted by
    ``t * velocity``.  Several ``hulls`` form a union of enclosures and
    cannot be mixed with obstacles or trees.
    """

    dynamics: Dynamics
    obstacles: tuple[Obstacle, ...] = ()
    trees: tuple[ObstacleTree, ...] = ()
    hulls: tuple[Obstacle, ...] = ()
    params: AvoidanceParams = field(default_factory=AvoidanceParams)
    weight_mode: str = "absolute"

    def __post_init__(self) -> None:
        object.__setattr__(self, "obstacles", tuple(self.obstacles))
        object.__setattr__(self, "trees", tuple(self.trees))
        object.__setattr__(self, "hulls", tuple(self.hulls))
        if len(self.hulls) > 1 and (self.obstacles or self.trees):
            raise ValueError("a union of several hulls cannot be combined with other obstacles")

    @property
    def dim(self) -> int:
        return self.dynamics.dim

    @property
    def multihull(self) -> bool:
        return len(self.hulls) > 1

    @property
    def is_static(self) -> bool:
        return all(o.velocity is None or not np.any(np.asarray(o.velocity) != 0) for o in self.obstacles)

    def obstacles_at(self, t: float) -> tuple[Obstacle, ...]:
        moved = []
        for obs in self.obstacles:
            if obs.velocity is not None and t != 0.0 and np.any(np.asarray(obs.velocity) != 0):
                obs = obs.translated(t * np.asarray(obs.velocity, dtype=float))
            moved.append(obs)
        return tuple(moved) + tuple(self.hulls if not self.multihull else ())

    def units_at(self, t: float) -> list[AvoidanceUnit]:
        units: list[AvoidanceUnit] = [ObstacleUnit(o) for o in self.obstacles_at(t)]
        units.extend(TreeUnit(tree, self.weight_mode) for tree in self.trees)
        return units

    def gamma_min(self, xi: ArrayLike, t: float = 0.0) -> float:
        """Distance value of the free space: below one means in collision."""
        if self.multihull:
            return max(h.gamma(xi) for h in self.hulls)
        values = [u.gamma(np.asarray(xi, dtype=float)) for u in self.units_at(t)]
        return min(values) if values else math.inf

    def evaluate(self, xi: ArrayLike, t: float = 0.0) -> MultiResult:
        if self.multihull:
            return avoid_multihull_detailed(self.hulls, self.dynamics, xi, t, self.params)
        return avoid_multi_detailed(self.units_at(t), self.dynamics, xi, t, self.params, self.weight_mode)

    def velocity(self, xi: ArrayLike, t: float = 0.0) -> np.ndarray:
        return self.evaluate(xi, t).velocity

    def initial(self, xi: ArrayLike, t: float = 0.0) -> np.ndarray:
        return self.dynamics.evaluate(xi, t)

    @property
    def has_reference_set(self) -> bool:
        return isinstance(self.dynamics, (LimitCycle2D, Spiral3D)) or self.dynamics.attractor is not None

    @property
    def is_cyclic(self) -> bool:
        return isinstance(self.dynamics, (LimitCycle2D, Spiral3D))

    def reference_error(self, xi: ArrayLike, t: float = 0.0) -> Optional[float]:
        """Signed distance to the set trajectories should settle on (limit cycle or attractor)."""
        xi = np.asarray(xi, dtype=float)
        dyn = self.dynamics
        if isinstance(dyn, LimitCycle2D):
            return norm(xi - dyn.center) - dyn.radius
        if isinstance(dyn, Spiral3D):
            rel = xi - dyn.center_at(t)
            return math.hypot(float(rel[0]), float(rel[2])) - dyn.radius
        if dyn.attractor is not None:
            return norm(xi - dyn.attractor)
        return None
