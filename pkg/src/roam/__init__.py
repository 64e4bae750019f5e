"""Reactive obstacle avoidance by rotating a nominal velocity field.

The core entry points are re-exported here; the harness, scenario and
service layers live in their own modules.
"""

from .avoidance import AvoidanceParams, avoid_single, avoid_single_detailed
from .convergence import convergence_direction, inflate, shrink
from .direction_space import (
    DirectionFrame,
    apply_rotation,
    from_direction_space,
    rotation_from_pair,
    to_direction_space,
)
from .dynamics import GlobalPF, LimitCycle2D, LinearMatrix, LineFollowing, LocalPF, Spiral3D, Straight, Wavy
from .environment import Environment
from .errors import (
    AllBoundariesViolated,
    AntiCollinear,
    AtAttractor,
    AtReferencePoint,
    RoamError,
    ScenarioInvalid,
)
from .multi import avoid_multi, avoid_multihull
from .obstacle_tree import ObstacleTree, tree_from_components, validate_tree
from .obstacles import Ellipse, Obstacle, Sphere, StarPolygon2D
from .rotation_algebra import RotationTree, reduce_tree, rotational_sum, weighted_sequence
from .tree_avoidance import avoid_tree

__version__ = "0.1.0"

__all__ = [
    "AllBoundariesViolated",
    "AntiCollinear",
    "AtAttractor",
    "AtReferencePoint",
    "AvoidanceParams",
    "DirectionFrame",
    "Ellipse",
    "Environment",
    "GlobalPF",
    "LimitCycle2D",
    "LineFollowing",
    "LinearMatrix",
    "LocalPF",
    "Obstacle",
    "ObstacleTree",
    "RoamError",
    "RotationTree",
    "ScenarioInvalid",
    "Sphere",
    "Spiral3D",
    "StarPolygon2D",
    "Straight",
    "Wavy",
    "apply_rotation",
    "avoid_multi",
    "avoid_multihull",
    "avoid_single",
    "avoid_single_detailed",
    "avoid_tree",
    "convergence_direction",
    "from_direction_space",
    "inflate",
    "reduce_tree",
    "rotation_from_pair",
    "rotational_sum",
    "shrink",
    "to_direction_space",
    "tree_from_components",
    "validate_tree",
    "weighted_sequence",
]
