"""Shared sweeps and fixtures for the test suite."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from roam.avoidance import avoid_single_detailed
from roam.convergence import convergence_direction
from roam.dynamics import Dynamics
from roam.environment import Environment
from roam.obstacle_tree import ObstacleTree
from roam.obstacles import Obstacle

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"
NORMAL_TOL = 1e-6
SADDLE_CAP = 1e-3
SADDLE_SPEED = 1e-2


def random_units(rng: np.random.Generator, count: int, dim: int) -> np.ndarray:
    raw = rng.normal(size=(count, dim))
    return raw / np.linalg.norm(raw, axis=1)[:, None]


@dataclass
class SweepResult:
    samples: int = 0
    capped: int = 0
    worst_normal: float = math.inf
    worst_cap_speed: float = 0.0
    skipped: int = 0

    @property
    def ok(self) -> bool:
        return self.worst_normal >= -NORMAL_TOL and self.worst_cap_speed < SADDLE_SPEED


def boundary_sweep(obstacle: Obstacle, dynamics: Dynamics, count: int = 1000) -> SweepResult:
    """Check that the avoided field never enters ``obstacle`` along its surface.

    Inside the saddle cap (direction-space distance below ``SADDLE_CAP``)
    the speed factor must vanish instead.
    """
    out = SweepResult()
    for xi in obstacle.sample_boundary(count, seed=7):
        f = dynamics.evaluate(xi)
        if float(f @ f) == 0.0:
            out.skipped += 1
            continue
        c = convergence_direction(dynamics, obstacle, xi)
        velocity, terms = avoid_single_detailed(obstacle, f, c, xi)
        assert terms is not None
        out.samples += 1
        if terms.delta_k < SADDLE_CAP:
            out.capped += 1
            out.worst_cap_speed = max(out.worst_cap_speed, terms.speed_factor)
            continue
        projection = float(obstacle.normal(xi) @ velocity)
        out.worst_normal = min(out.worst_normal, projection)
    return out


def union_boundary(tree: ObstacleTree, per_component: int) -> list[tuple[int, np.ndarray | None]]:
    """Boundary samples of every component, ``None`` where another component covers them."""
    points: list[tuple[int, np.ndarray | None]] = []
    for k, comp in enumerate(tree.components):
        for s in comp.sample_boundary(per_component):
            points.append((k, s if tree.gamma(s) >= 1.0 - 1e-9 else None))
    return points


def tree_sweep(env: Environment, tree: ObstacleTree, per_component: int = 1000) -> tuple[float, int]:
    """Worst normal projection on the union surface and the number of low-speed regions.

    Low-speed samples (speed factor below ``SADDLE_SPEED``) are grouped into
    runs along each component's boundary, wrapping around; covered samples
    break a run.  The normal test skips low-speed samples.
    """
    worst = math.inf
    regions = 0
    for k, comp in enumerate(tree.components):
        low = []
        for s in comp.sample_boundary(per_component):
            if tree.gamma(s) < 1.0 - 1e-9:
                low.append(False)
                continue
            res = env.evaluate(s)
            slow = res.speed_factor < SADDLE_SPEED
            low.append(slow)
            if not slow:
                worst = min(worst, float(comp.normal(s) @ res.velocity))
        regions += count_cyclic_runs(low)
    return worst, regions


def count_cyclic_runs(flags: list[bool]) -> int:
    if all(flags):
        return 1 if flags else 0
    starts = sum(1 for i, flag in enumerate(flags) if flag and not flags[i - 1])
    return starts
