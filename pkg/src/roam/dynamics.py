"""Initial vector fields to be steered around obstacles.

Each field exposes ``evaluate(xi, t)``, saturated at ``v_max``, and
``singularity(t)`` describing its single directional singularity (if any) as
``(point, sign)``: sign -1 when the flow points into the point (an
attractor), +1 when it points away from it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import ClassVar, Optional, Sequence

import numpy as np

from .direction_space import ArrayLike, norm, unit
from .rotation_algebra import RotationTree, reduce_tree

DEFAULT_V_MAX = 10.0
_J = np.array([[0.0, 1.0], [-1.0, 0.0]])

Singularity = Optional[tuple[np.ndarray, float]]


def _vec(x: ArrayLike) -> np.ndarray:
    return np.asarray(x, dtype=float)


@dataclass(frozen=True, eq=False)
class Dynamics:
    """Base class: subclasses implement :meth:`raw` and :meth:`singularity`."""

    kind: ClassVar[str] = "abstract"
    time_varying: ClassVar[bool] = False
    v_max: float = field(default=DEFAULT_V_MAX, kw_only=True)

    @property
    def dim(self) -> int:
        raise NotImplementedError

    def raw(self, xi: np.ndarray, t: float) -> np.ndarray:
        raise NotImplementedError

    def singularity(self, t: float = 0.0) -> Singularity:
        return None

    @property
    def attractor(self) -> Optional[np.ndarray]:
        """Point attractor the flow converges to, if the field has one."""
        return None

    def evaluate(self, xi: ArrayLike, t: float = 0.0) -> np.ndarray:
        v = self.raw(_vec(xi), t)
        speed = math.sqrt(float(v @ v))
        if speed > self.v_max:
            v = v * (self.v_max / speed)
        return v

    __call__ = evaluate


@dataclass(frozen=True, eq=False)
class Straight(Dynamics):
    """Globally straight field ``gain * (attractor - xi)``."""

    kind: ClassVar[str] = "straight"
    target: np.ndarray
    gain: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "target", _vec(self.target))

    @property
    def dim(self) -> int:
        return self.target.size

    @property
    def attractor(self) -> np.ndarray:
        return self.target

    def raw(self, xi: np.ndarray, t: float) -> np.ndarray:
        return self.gain * (self.target - xi)

    def singularity(self, t: float = 0.0) -> Singularity:
        return self.target, -1.0


@dataclass(frozen=True, eq=False)
class LinearMatrix(Dynamics):
    """Linear system ``A (xi - attractor)``."""

    kind: ClassVar[str] = "linear"
    matrix: np.ndarray
    target: np.ndarray

    def __post_init__(self) -> None:
        a = _vec(self.matrix)
        x = _vec(self.target)
        if a.shape != (x.size, x.size):
            raise ValueError("matrix shape does not match the attractor dimension")
        object.__setattr__(self, "matrix", a)
        object.__setattr__(self, "target", x)

    @property
    def dim(self) -> int:
        return self.target.size

    @property
    def attractor(self) -> Optional[np.ndarray]:
        stable = bool(np.all(np.linalg.eigvals(self.matrix).real < 0))
        return self.target if stable else None

    def raw(self, xi: np.ndarray, t: float) -> np.ndarray:
        return self.matrix @ (xi - self.target)

    def singularity(self, t: float = 0.0) -> Singularity:
        return self.target, 1.0 if np.trace(self.matrix) > 0 else -1.0


@dataclass(frozen=True, eq=False)
class LimitCycle2D(Dynamics):
    """Planar field converging onto the circle of radius ``radius`` around ``center``."""

    kind: ClassVar[str] = "limit_cycle"
    radius: float = 2.0
    center: np.ndarray = field(default_factory=lambda: np.zeros(2))

    def __post_init__(self) -> None:
        object.__setattr__(self, "center", _vec(self.center))
        if self.center.shape != (2,):
            raise ValueError("limit cycle center must be 2D")

    @property
    def dim(self) -> int:
        return 2

    def raw(self, xi: np.ndarray, t: float) -> np.ndarray:
        rel = xi - self.center
        radial = 2.0 * (self.radius - math.sqrt(float(rel @ rel)))
        return _J @ rel + radial * rel

    def singularity(self, t: float = 0.0) -> Singularity:
        return self.center, 1.0


@dataclass(frozen=True, eq=False)
class Spiral3D(Dynamics):
    """Spiral around a moving axis point with a constant drift along the second axis.

    The centre follows ``center + amplitude * sin(frequency * t + phase)``.
    """

    kind: ClassVar[str] = "spiral"
    time_varying: ClassVar[bool] = True
    radius: float = 0.1
    center: np.ndarray = field(default_factory=lambda: np.zeros(3))
    amplitude: np.ndarray = field(default_factory=lambda: np.zeros(3))
    frequency: float = 0.0
    phase: float = 0.0
    drift: np.ndarray = field(default_factory=lambda: np.array([0.0, 1.0, 0.0]))

    _projection: ClassVar[np.ndarray] = np.array([[1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])

    def __post_init__(self) -> None:
        for name in ("center", "amplitude", "drift"):
            value = _vec(getattr(self, name))
            if value.shape != (3,):
                raise ValueError(f"spiral {name} must be 3D")
            object.__setattr__(self, name, value)

    @property
    def dim(self) -> int:
        return 3

    def center_at(self, t: float) -> np.ndarray:
        return self.center + self.amplitude * math.sin(self.frequency * t + self.phase)

    def raw(self, xi: np.ndarray, t: float) -> np.ndarray:
        planar = self._projection @ (xi - self.center_at(t))
        radial = 2.0 * (self.radius - math.sqrt(float(planar @ planar)))
        return self._projection.T @ (_J @ planar + radial * planar) + self.drift


@dataclass(frozen=True, eq=False)
class Wavy(Dynamics):
    """Attractor field turned by the angle ``sin(|attractor - xi|)`` (2D)."""

    kind: ClassVar[str] = "wavy"
    target: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "target", _vec(self.target))
        if self.target.shape != (2,):
            raise ValueError("wavy dynamics are planar")

    @property
    def dim(self) -> int:
        return 2

    @property
    def attractor(self) -> np.ndarray:
        return self.target

    def raw(self, xi: np.ndarray, t: float) -> np.ndarray:
        rel = self.target - xi
        angle = math.sin(math.sqrt(float(rel @ rel)))
        c, s = math.cos(angle), math.sin(angle)
        return np.array([c * rel[0] - s * rel[1], s * rel[0] + c * rel[1]])

    def singularity(self, t: float = 0.0) -> Singularity:
        return self.target, -1.0


@dataclass(frozen=True, eq=False)
class LineFollowing(Dynamics):
    """Field ``(1, -y)`` converging onto the horizontal axis."""

    kind: ClassVar[str] = "line_following"

    @property
    def dim(self) -> int:
        return 2

    def raw(self, xi: np.ndarray, t: float) -> np.ndarray:
        return np.array([1.0, -xi[1]])


@dataclass(frozen=True)
class Segment:
    start: np.ndarray
    end: np.ndarray

    @property
    def direction(self) -> np.ndarray:
        return unit(self.end - self.start)

    def distance(self, xi: np.ndarray) -> float:
        span = self.end - self.start
        s = float(np.clip((xi - self.start) @ span / (span @ span), 0.0, 1.0))
        return norm(xi - (self.start + s * span))

    def local_field(self, xi: np.ndarray) -> np.ndarray:
        """Path-following field pulling onto the segment's line toward its end."""
        u = self.direction
        delta = xi - self.end
        return u + float(delta @ u) * u - delta


def _segments(raw: Sequence[tuple[ArrayLike, ArrayLike]]) -> tuple[Segment, ...]:
    out = tuple(Segment(_vec(a), _vec(b)) for a, b in raw)
    if not out:
        raise ValueError("at least one segment is required")
    for seg in out:
        if norm(seg.end - seg.start) == 0.0:
            raise ValueError("segments must have positive length")
    return out


@dataclass(frozen=True, eq=False)
class LocalPF(Dynamics):
    """Path following on the segment nearest to the current position."""

    kind: ClassVar[str] = "local_pf"
    segments: tuple[Segment, ...]

    def __post_init__(self) -> None:
        if self.segments and not isinstance(self.segments[0], Segment):
            object.__setattr__(self, "segments", _segments(self.segments))  # type: ignore[arg-type]

    @property
    def dim(self) -> int:
        return self.segments[0].start.size

    def raw(self, xi: np.ndarray, t: float) -> np.ndarray:
        nearest = min(self.segments, key=lambda s: s.distance(xi))
        return nearest.local_field(xi)


@dataclass(frozen=True, eq=False)
class GlobalPF(Dynamics):
    """Segment fields blended through a direction tree rooted at the attractor direction.

    Speed is one, tapering linearly to zero within ``slowdown_radius`` of the
    attractor.
    """

    kind: ClassVar[str] = "global_pf"
    segments: tuple[Segment, ...]
    target: np.ndarray
    slowdown_radius: float = 1.0

    def __post_init__(self) -> None:
        if self.segments and not isinstance(self.segments[0], Segment):
            object.__setattr__(self, "segments", _segments(self.segments))  # type: ignore[arg-type]
        object.__setattr__(self, "target", _vec(self.target))

    @property
    def dim(self) -> int:
        return self.target.size

    @property
    def attractor(self) -> np.ndarray:
        return self.target

    def segment_weights(self, xi: np.ndarray) -> np.ndarray:
        raw = np.zeros(len(self.segments))
        for i, seg in enumerate(self.segments):
            ahead = float(seg.direction @ (seg.end - xi))
            closeness = max(0.0, 1.0 + min(ahead, 0.0))
            dist = seg.distance(xi)
            if closeness == 0.0:
                continue
            raw[i] = math.inf if dist == 0.0 else closeness / dist
        if np.isinf(raw).any():
            hits = np.isinf(raw)
            return hits / hits.sum()
        total = raw.sum()
        return raw / total if total > 1.0 else raw

    def direction(self, xi: ArrayLike) -> np.ndarray:
        xi = _vec(xi)
        weights = self.segment_weights(xi)
        tree = RotationTree()
        tree.add("root", self.target - xi)
        parent = "root"
        node_weights: dict[object, float] = {}
        for i, seg in enumerate(self.segments):
            tree.add(("u", i), seg.direction, parent)
            tree.add(("f", i), seg.local_field(xi), ("u", i))
            node_weights[("u", i)] = 0.0
            node_weights[("f", i)] = float(weights[i])
            parent = ("u", i)
        node_weights["root"] = max(0.0, 1.0 - float(weights.sum()))
        return reduce_tree(tree, node_weights)

    def raw(self, xi: np.ndarray, t: float) -> np.ndarray:
        dist = norm(self.target - xi)
        if dist == 0.0:
            return np.zeros_like(xi)
        speed = min(1.0, dist / self.slowdown_radius)
        return speed * self.direction(xi)

    def singularity(self, t: float = 0.0) -> Singularity:
        return self.target, -1.0
