"""Geometry and dynamics used across several test modules."""

from __future__ import annotations

import math

import numpy as np

from roam.dynamics import Dynamics, LimitCycle2D, LinearMatrix, Straight
from roam.obstacles import Ellipse, Obstacle, Sphere, StarPolygon2D

ROTATING = np.array([[-1.0, 2.0], [-2.0, -1.0]])


def star_vertices(points: int = 5, outer: float = 1.5, inner: float = 0.7, center=(0.0, 0.0)) -> np.ndarray:
    angles = np.arange(2 * points) * math.pi / points
    radii = np.where(np.arange(2 * points) % 2 == 0, outer, inner)
    return np.column_stack([radii * np.cos(angles), radii * np.sin(angles)]) + np.asarray(center)


def shapes() -> dict[str, Obstacle]:
    return {
        "circle": Obstacle(Sphere([0.2, -0.1], 1.0)),
        "ellipse": Obstacle(Ellipse([0.0, 0.3], [1.4, 0.6], 0.5)),
        "star": Obstacle(StarPolygon2D(star_vertices())),
        "inverted_ellipse": Obstacle(Ellipse([0.0, 0.0], [4.0, 3.0], 0.2), inverted=True),
    }


def dynamics_for(obstacle: Obstacle) -> dict[str, Dynamics]:
    """Straight, limit-cycle and linear fields placed so they interact with ``obstacle``."""
    if obstacle.inverted:
        target = np.array([1.0, 0.5])
        center = np.array([0.3, -0.2])
    else:
        target = np.array([3.0, 1.0])
        center = np.array([-2.2, 0.4])
    return {
        "straight": Straight(target),
        "limit_cycle": LimitCycle2D(2.0, center),
        "linear": LinearMatrix(ROTATING, target),
    }
