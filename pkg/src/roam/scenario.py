"""Scenario documents: a JSON description of an environment and an integration run."""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Annotated, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .avoidance import AvoidanceParams
from .dynamics import (
    Dynamics,
    GlobalPF,
    LimitCycle2D,
    LinearMatrix,
    LineFollowing,
    LocalPF,
    Spiral3D,
    Straight,
    Wavy,
)
from .environment import Environment
from .errors import ScenarioInvalid
from .obstacle_tree import ObstacleTree, default_leaf_influence, validate_tree
from .obstacles import Ellipse, Obstacle, Shape, Sphere, StarPolygon2D

Vector = list[float]


class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


# shapes


class EllipseSpec(_Model):
    type: Literal["ellipse"]
    center: Vector
    semi_axes: Vector
    orientation: Union[float, list[Vector], None] = None


class SphereSpec(_Model):
    type: Literal["sphere"]
    center: Vector
    radius: float = Field(gt=0)


class PolygonSpec(_Model):
    type: Literal["polygon"]
    vertices: list[Vector] = Field(min_length=3)


ShapeSpec = Annotated[Union[EllipseSpec, SphereSpec, PolygonSpec], Field(discriminator="type")]


class ObstacleSpec(_Model):
    id: Optional[str] = None
    shape: ShapeSpec
    reference_point: Optional[Vector] = None
    d0: float = Field(default=1.0, gt=0)
    margin: float = Field(default=0.0, ge=0)
    inverted: bool = False
    influence_radius: Optional[float] = Field(default=None, gt=0)
    velocity: Optional[Vector] = None


class ComponentSpec(_Model):
    id: str
    parent: Optional[str] = None
    shape: ShapeSpec
    reference_point: Optional[Vector] = None
    d0: float = Field(default=1.0, gt=0)
    margin: float = Field(default=0.0, ge=0)
    influence_radius: Optional[float] = Field(default=None, gt=0)


class TreeSpec(_Model):
    id: Optional[str] = None
    components: list[ComponentSpec] = Field(min_length=1)
    leaf_influence_factor: Optional[float] = Field(default=4.0, gt=0)


# dynamics


class _DynamicsBase(_Model):
    v_max: float = Field(default=10.0, gt=0)


class StraightSpec(_DynamicsBase):
    type: Literal["straight"]
    attractor: Vector
    gain: float = Field(default=1.0, gt=0)


class LinearSpec(_DynamicsBase):
    type: Literal["linear"]
    matrix: list[Vector]
    attractor: Vector


class LimitCycleSpec(_DynamicsBase):
    type: Literal["limit_cycle"]
    radius: float = Field(default=2.0, gt=0)
    center: Vector = [0.0, 0.0]


class SpiralSpec(_DynamicsBase):
    type: Literal["spiral"]
    radius: float = Field(default=0.1, gt=0)
    center: Vector = [0.0, 0.0, 0.0]
    amplitude: Vector = [0.0, 0.0, 0.0]
    frequency: float = 0.0
    phase: float = 0.0
    drift: Vector = [0.0, 1.0, 0.0]


class WavySpec(_DynamicsBase):
    type: Literal["wavy"]
    attractor: Vector


class LineFollowingSpec(_DynamicsBase):
    type: Literal["line_following"]


class LocalPFSpec(_DynamicsBase):
    type: Literal["local_pf"]
    segments: list[tuple[Vector, Vector]] = Field(min_length=1)


class GlobalPFSpec(_DynamicsBase):
    type: Literal["global_pf"]
    segments: list[tuple[Vector, Vector]] = Field(min_length=1)
    attractor: Vector
    slowdown_radius: float = Field(default=1.0, gt=0)


DynamicsSpec = Annotated[
    Union[
        StraightSpec,
        LinearSpec,
        LimitCycleSpec,
        SpiralSpec,
        WavySpec,
        LineFollowingSpec,
        LocalPFSpec,
        GlobalPFSpec,
    ],
    Field(discriminator="type"),
]


# run configuration


class AvoidanceSpec(_Model):
    tangent_radius: float = math.pi / 2
    smoothness: float = Field(default=0.3, gt=0)
    weight_mode: Literal["absolute", "literal"] = "absolute"


class GridSpec(_Model):
    lower: Vector
    upper: Vector
    counts: list[int]


class IntegrationSpec(_Model):
    dt: float = Field(default=0.01, gt=0)
    max_steps: int = Field(default=500, ge=1)
    start_points: Optional[list[Vector]] = None
    grid: Optional[GridSpec] = None
    convergence_radius: float = Field(default=0.1, gt=0)
    stall_speed: float = Field(default=1e-4, gt=0)
    stall_steps: int = Field(default=50, ge=1)
    stall_gamma: float = Field(default=1.5, gt=1)
    cycle_window: int = Field(default=100, ge=1)
    cycle_tolerance: float = Field(default=0.2, gt=0)

    @model_validator(mode="after")
    def _one_start_source(self) -> "IntegrationSpec":
        if (self.start_points is None) == (self.grid is None):
            raise ValueError("give exactly one of start_points or grid")
        return self


class WorkspaceSpec(_Model):
    lower: Vector
    upper: Vector


class ScenarioSpec(_Model):
    name: str = "scenario"
    description: str = ""
    dimension: int = Field(ge=2)
    obstacles: list[ObstacleSpec] = []
    trees: list[TreeSpec] = []
    boundaries: list[ObstacleSpec] = []
    dynamics: DynamicsSpec
    avoidance: AvoidanceSpec = AvoidanceSpec()
    integration: IntegrationSpec
    workspace: Optional[WorkspaceSpec] = None


# construction


def _shape(spec: EllipseSpec | SphereSpec | PolygonSpec) -> Shape:
    if isinstance(spec, SphereSpec):
        return Sphere(spec.center, spec.radius)
    if isinstance(spec, PolygonSpec):
        return StarPolygon2D(np.asarray(spec.vertices, dtype=float))
    if spec.orientation is None:
        return Ellipse(np.asarray(spec.center), np.asarray(spec.semi_axes))
    orientation = spec.orientation if isinstance(spec.orientation, float) else np.asarray(spec.orientation)
    return Ellipse(np.asarray(spec.center), np.asarray(spec.semi_axes), orientation)


def _obstacle(spec: ObstacleSpec, inverted: Optional[bool] = None) -> Obstacle:
    return Obstacle(
        _shape(spec.shape),
        reference_point=None if spec.reference_point is None else np.asarray(spec.reference_point),
        d0=spec.d0,
        margin=spec.margin,
        inverted=spec.inverted if inverted is None else inverted,
        influence_radius=spec.influence_radius,
        velocity=None if spec.velocity is None else np.asarray(spec.velocity),
    )


def _tree(spec: TreeSpec) -> ObstacleTree:
    ids = [c.id for c in spec.components]
    if len(set(ids)) != len(ids):
        raise ValueError("component ids must be unique")
    index = {name: i for i, name in enumerate(ids)}
    parents = []
    for comp in spec.components:
        if comp.parent is not None and comp.parent not in index:
            raise ValueError(f"{comp.id}: unknown parent {comp.parent!r}")
        parents.append(None if comp.parent is None else index[comp.parent])
    comps = tuple(
        Obstacle(
            _shape(c.shape),
            reference_point=None if c.reference_point is None else np.asarray(c.reference_point),
            d0=c.d0,
            margin=c.margin,
            influence_radius=c.influence_radius,
        )
        for c in spec.components
    )
    return ObstacleTree(comps, tuple(parents), tuple(ids))


def _dynamics(spec) -> Dynamics:
    vmax = {"v_max": spec.v_max}
    if isinstance(spec, StraightSpec):
        return Straight(np.asarray(spec.attractor), spec.gain, **vmax)
    if isinstance(spec, LinearSpec):
        return LinearMatrix(np.asarray(spec.matrix), np.asarray(spec.attractor), **vmax)
    if isinstance(spec, LimitCycleSpec):
        return LimitCycle2D(spec.radius, np.asarray(spec.center), **vmax)
    if isinstance(spec, SpiralSpec):
        return Spiral3D(
            spec.radius,
            np.asarray(spec.center),
            np.asarray(spec.amplitude),
            spec.frequency,
            spec.phase,
            np.asarray(spec.drift),
            **vmax,
        )
    if isinstance(spec, WavySpec):
        return Wavy(np.asarray(spec.attractor), **vmax)
    if isinstance(spec, LineFollowingSpec):
        return LineFollowing(**vmax)
    if isinstance(spec, LocalPFSpec):
        return LocalPF(tuple(spec.segments), **vmax)  # type: ignore[arg-type]
    return GlobalPF(tuple(spec.segments), np.asarray(spec.attractor), spec.slowdown_radius, **vmax)  # type: ignore[arg-type]


def _dims_of(spec: ScenarioSpec) -> list[tuple[str, int]]:
    found: list[tuple[str, int]] = []

    def shape_dims(label: str, shape) -> None:
        if isinstance(shape, PolygonSpec):
            found.append((label, 2))
            for k, v in enumerate(shape.vertices):
                found.append((f"{label}.vertices[{k}]", len(v)))
        else:
            found.append((f"{label}.center", len(shape.center)))
            if isinstance(shape, EllipseSpec):
                found.append((f"{label}.semi_axes", len(shape.semi_axes)))

    for k, o in enumerate(spec.obstacles):
        shape_dims(f"obstacles[{k}]", o.shape)
        if o.reference_point is not None:
            found.append((f"obstacles[{k}].reference_point", len(o.reference_point)))
        if o.velocity is not None:
            found.append((f"obstacles[{k}].velocity", len(o.velocity)))
    for k, b in enumerate(spec.boundaries):
        shape_dims(f"boundaries[{k}]", b.shape)
    for k, t in enumerate(spec.trees):
        for c in t.components:
            shape_dims(f"trees[{k}].{c.id}", c.shape)
    if spec.integration.start_points is not None:
        for k, p in enumerate(spec.integration.start_points):
            found.append((f"integration.start_points[{k}]", len(p)))
    if spec.integration.grid is not None:
        g = spec.integration.grid
        found += [("integration.grid.lower", len(g.lower)), ("integration.grid.upper", len(g.upper)),
                  ("integration.grid.counts", len(g.counts))]
    return found


class Scenario:
    """A validated scenario: the parsed document plus the environment built from it."""

    def __init__(self, spec: ScenarioSpec, environment: Environment):
        self.spec = spec
        self.environment = environment

    @property
    def dim(self) -> int:
        return self.spec.dimension

    @property
    def integration(self) -> IntegrationSpec:
        return self.spec.integration

    def start_points(self) -> np.ndarray:
        cfg = self.spec.integration
        if cfg.start_points is not None:
            return np.asarray(cfg.start_points, dtype=float)
        return grid_points(cfg.grid.lower, cfg.grid.upper, cfg.grid.counts)  # type: ignore[union-attr]

    def to_json(self) -> str:
        return self.spec.model_dump_json(indent=2)


def grid_points(lower, upper, counts) -> np.ndarray:
    """Evenly spaced grid nodes including the bounds, first axis varying slowest."""
    axes = [np.linspace(lo, hi, int(n)) for lo, hi, n in zip(lower, upper, counts)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def build_scenario(spec: ScenarioSpec) -> Scenario:
    """Check ``spec`` and build its environment; all problems are reported together."""
    problems: list[str] = []
    n = spec.dimension
    for label, d in _dims_of(spec):
        if d != n:
            problems.append(f"{label}: dimension {d} does not match scenario dimension {n}")
    grid = spec.integration.grid
    if grid is not None:
        if any(c < 1 for c in grid.counts):
            problems.append("integration.grid.counts: counts must be positive")
        if any(hi < lo for lo, hi in zip(grid.lower, grid.upper)):
            problems.append("integration.grid: upper bound below lower bound")
    if spec.workspace is not None and any(hi <= lo for lo, hi in zip(spec.workspace.lower, spec.workspace.upper)):
        problems.append("workspace: upper bound must exceed lower bound")
    if len(spec.boundaries) > 1 and (spec.obstacles or spec.trees):
        problems.append("boundaries: several hulls cannot be combined with obstacles or trees")
    hull_obstacles = [o for o in spec.obstacles if o.inverted]
    if len(hull_obstacles) + (len(spec.boundaries) if len(spec.boundaries) == 1 else 0) > 1:
        problems.append("obstacles: at most one enclosing hull outside a boundaries union")
    try:
        AvoidanceParams(spec.avoidance.tangent_radius, spec.avoidance.smoothness)
    except ValueError as exc:
        problems.append(f"avoidance: {exc}")
    if problems:
        raise ScenarioInvalid(problems)

    obstacles: list[Obstacle] = []
    for k, o in enumerate(spec.obstacles):
        try:
            obstacles.append(_obstacle(o))
        except ValueError as exc:
            problems.append(f"obstacles[{k}]: {exc}")
    hulls: list[Obstacle] = []
    for k, b in enumerate(spec.boundaries):
        try:
            hulls.append(_obstacle(b, inverted=True))
        except ValueError as exc:
            problems.append(f"boundaries[{k}]: {exc}")
    trees: list[ObstacleTree] = []
    for k, t in enumerate(spec.trees):
        label = t.id or f"trees[{k}]"
        try:
            tree = _tree(t)
        except ValueError as exc:
            problems.append(f"{label}: {exc}")
            continue
        problems.extend(f"{label}.{msg}" for msg in validate_tree(tree))
        if t.leaf_influence_factor is not None:
            tree = default_leaf_influence(tree, t.leaf_influence_factor)
        trees.append(tree)
    try:
        dynamics = _dynamics(spec.dynamics)
        if dynamics.dim != n:
            problems.append(f"dynamics: dimension {dynamics.dim} does not match scenario dimension {n}")
    except ValueError as exc:
        problems.append(f"dynamics: {exc}")
    if problems:
        raise ScenarioInvalid(problems)

    params = AvoidanceParams(spec.avoidance.tangent_radius, spec.avoidance.smoothness)
    if len(hulls) == 1:
        obstacles.append(hulls.pop())
    env = Environment(dynamics, tuple(obstacles), tuple(trees), tuple(hulls), params, spec.avoidance.weight_mode)
    return Scenario(spec, env)


def parse_scenario(data: dict) -> Scenario:
    try:
        spec = ScenarioSpec.model_validate(data)
    except ValidationError as exc:
        raise ScenarioInvalid(
            [f"{'.'.join(str(p) for p in err['loc']) or '<root>'}: {err['msg']}" for err in exc.errors()]
        ) from None
    return build_scenario(spec)


def load_scenario(path: str | Path) -> Scenario:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioInvalid([f"{path}: not valid JSON ({exc.msg} at line {exc.lineno})"]) from None
    return parse_scenario(data)

