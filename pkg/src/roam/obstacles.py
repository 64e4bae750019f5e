"""Star-shaped obstacles described in polar form around a reference point.

Every shape is reduced to a radial function ``R(u)``: the distance from the
reference point to the (margin-adjusted) boundary along the unit direction
``u``, together with its gradient on the unit sphere.  The distance field,
normals and boundary points of :class:`Obstacle` all derive from it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Protocol, Sequence, Union

import numpy as np

from .direction_space import ArrayLike, norm
from .errors import AtReferencePoint

VERTEX_BLEND = 1e-3


class RadialProfile(Protocol):
    def radius(self, u: np.ndarray) -> float: ...

    def radius_gradient(self, u: np.ndarray) -> tuple[float, np.ndarray]: ...


def rotation_2d(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


# ----------------------------------------------------------------- ellipsoids


class _QuadricProfile:
    __slots__ = ("_m", "_e", "_ee", "_planar")

    def __init__(self, center: np.ndarray, axes: np.ndarray, orientation: np.ndarray, ref: np.ndarray):
        self._m = (orientation / axes).T
        self._e = self._m @ (ref - center)
        self._ee = float(self._e @ self._e)
        self._planar = (*self._m.ravel().tolist(), *self._e.tolist()) if axes.size == 2 else None

    def radius(self, u: np.ndarray) -> float:
        if self._planar is not None:
            m00, m01, m10, m11, e0, e1 = self._planar
            ux, uy = u.tolist()
            d0, d1 = m00 * ux + m01 * uy, m10 * ux + m11 * uy
            ed = e0 * d0 + e1 * d1
            dd = d0 * d0 + d1 * d1
            disc = ed * ed - dd * (self._ee - 1.0)
            return (-ed + math.sqrt(max(disc, 0.0))) / dd
        d = self._m @ u
        ed = float(self._e @ d)
        dd = float(d @ d)
        disc = ed * ed - dd * (self._ee - 1.0)
        return (-ed + math.sqrt(max(disc, 0.0))) / dd

    def radius_gradient(self, u: np.ndarray) -> tuple[float, np.ndarray]:
        if self._planar is not None:
            m00, m01, m10, m11, e0, e1 = self._planar
            ux, uy = u.tolist()
            d0, d1 = m00 * ux + m01 * uy, m10 * ux + m11 * uy
            ed = e0 * d0 + e1 * d1
            dd = d0 * d0 + d1 * d1
            r = (-ed + math.sqrt(max(ed * ed - dd * (self._ee - 1.0), 0.0))) / dd
            q0, q1 = e0 + r * d0, e1 + r * d1
            g0, g1 = m00 * q0 + m10 * q1, m01 * q0 + m11 * q1
            along = g0 * ux + g1 * uy
            scale = -r / along
            return r, np.array((scale * (g0 - along * ux), scale * (g1 - along * uy)))
        d = self._m @ u
        ed = float(self._e @ d)
        dd = float(d @ d)
        disc = ed * ed - dd * (self._ee - 1.0)
        r = (-ed + math.sqrt(max(disc, 0.0))) / dd
        grad_f = self._m.T @ (self._e + r * d)
        along = float(grad_f @ u)
        tangential = grad_f - along * u
        return r, (-r / along) * tangential


@dataclass(frozen=True, eq=False)
class Ellipse:
    """Axis-aligned ellipsoid rotated by ``orientation`` (columns are the axes)."""

    center: np.ndarray
    semi_axes: np.ndarray
    orientation: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        center = np.asarray(self.center, dtype=float)
        axes = np.asarray(self.semi_axes, dtype=float)
        if center.shape != axes.shape or center.ndim != 1:
            raise ValueError("center and semi_axes must be vectors of equal length")
        if np.any(axes <= 0):
            raise ValueError("semi axes must be positive")
        if self.orientation is None:
            orient = np.eye(center.size)
        else:
            orient = np.asarray(self.orientation, dtype=float)
            if orient.ndim == 0:
                if center.size != 2:
                    raise ValueError("a scalar orientation angle is only valid in 2D")
                orient = rotation_2d(float(orient))
            if orient.shape != (center.size, center.size):
                raise ValueError("orientation must be a square matrix matching the dimension")
            if not np.allclose(orient.T @ orient, np.eye(center.size), atol=1e-9):
                raise ValueError("orientation must be orthonormal")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "semi_axes", axes)
        object.__setattr__(self, "orientation", orient)

    @property
    def dim(self) -> int:
        return self.center.size

    @property
    def diameter(self) -> float:
        return 2.0 * float(self.semi_axes.max())

    def default_reference(self) -> np.ndarray:
        return self.center.copy()

    def grown(self, margin: float) -> "Ellipse":
        if margin == 0.0:
            return self
        return replace(self, semi_axes=self.semi_axes + margin)

    def translated(self, offset: np.ndarray) -> "Ellipse":
        return replace(self, center=self.center + offset)

    def kernel_violation(self, ref: np.ndarray) -> Optional[str]:
        local = (self.orientation.T @ (ref - self.center)) / self.semi_axes
        if float(local @ local) >= 1.0:
            return "reference point is not inside the ellipse"
        return None

    def profile(self, ref: np.ndarray) -> RadialProfile:
        return _QuadricProfile(self.center, self.semi_axes, self.orientation, ref)


class Sphere(Ellipse):
    """Ball given by center and radius."""

    def __init__(self, center: ArrayLike, radius: float):
        center = np.asarray(center, dtype=float)
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "semi_axes", np.full(center.size, float(radius)))
        object.__setattr__(self, "orientation", None)
        self.__post_init__()

    @property
    def radius(self) -> float:
        return float(self.semi_axes[0])

    def grown(self, margin: float) -> "Sphere":
        return self if margin == 0.0 else Sphere(self.center, self.radius + margin)

    def translated(self, offset: np.ndarray) -> "Sphere":
        return Sphere(self.center + offset, self.radius)


# ------------------------------------------------------------------- polygons


class _PolygonProfile:
    """Radial function of a polygon seen from a kernel point."""

    __slots__ = ("_angles", "_normals", "_heights", "_offset")

    def __init__(self, vertices: np.ndarray, ref: np.ndarray, offset: float):
        rel = vertices - ref
        raw = np.arctan2(rel[:, 1], rel[:, 0])
        start = int(np.argmin(raw))
        order = np.roll(np.arange(len(vertices)), -start)
        rel = rel[order]
        angles = np.unwrap(raw[order])
        nxt = np.roll(rel, -1, axis=0)
        edges = nxt - rel
        normals = np.column_stack([edges[:, 1], -edges[:, 0]])
        normals /= np.linalg.norm(normals, axis=1)[:, None]
        self._angles = np.append(angles, angles[0] + 2.0 * math.pi)
        self._normals = normals
        self._heights = np.einsum("ij,ij->i", rel, normals)
        self._offset = offset

    def _edge(self, theta: float) -> int:
        a0 = self._angles[0]
        theta = a0 + (theta - a0) % (2.0 * math.pi)
        idx = int(np.searchsorted(self._angles, theta, side="right")) - 1
        return min(max(idx, 0), len(self._normals) - 1)

    def _edge_terms(self, i: int, u: np.ndarray, t: np.ndarray) -> tuple[float, float]:
        nu = self._normals[i]
        un = u[0] * nu[0] + u[1] * nu[1]
        tn = t[0] * nu[0] + t[1] * nu[1]
        h = self._heights[i]
        return h / un, -h * tn / (un * un)

    def radius(self, u: np.ndarray) -> float:
        theta = math.atan2(u[1], u[0])
        i = self._edge(theta)
        nu = self._normals[i]
        return self._heights[i] / (u[0] * nu[0] + u[1] * nu[1]) + self._offset

    def radius_gradient(self, u: np.ndarray) -> tuple[float, np.ndarray]:
        theta = math.atan2(u[1], u[0])
        i = self._edge(theta)
        t = np.array([-u[1], u[0]])
        r, dr = self._edge_terms(i, u, t)

        # Blend the slope across vertices so the normal varies continuously.
        n_edges = len(self._normals)
        a0 = self._angles[0]
        wrapped = a0 + (theta - a0) % (2.0 * math.pi)
        lo, hi = self._angles[i], self._angles[i + 1]
        if wrapped - lo < VERTEX_BLEND:
            other = (i - 1) % n_edges
            _, dr_other = self._edge_terms(other, u, t)
            alpha = (wrapped - lo + VERTEX_BLEND) / (2.0 * VERTEX_BLEND)
            dr = (1.0 - alpha) * dr_other + alpha * dr
        elif hi - wrapped < VERTEX_BLEND:
            other = (i + 1) % n_edges
            _, dr_other = self._edge_terms(other, u, t)
            alpha = (hi - wrapped + VERTEX_BLEND) / (2.0 * VERTEX_BLEND)
            dr = alpha * dr + (1.0 - alpha) * dr_other
        return r + self._offset, dr * t


@dataclass(frozen=True, eq=False)
class StarPolygon2D:
    """Planar polygon given by counter-clockwise vertices.

    ``offset`` shifts the boundary radially (used for margins), keeping the
    polygon's own vertices untouched.
    """

    vertices: np.ndarray
    reference: Optional[np.ndarray] = None
    offset: float = 0.0

    def __post_init__(self) -> None:
        verts = np.asarray(self.vertices, dtype=float)
        if verts.ndim != 2 or verts.shape[1] != 2 or len(verts) < 3:
            raise ValueError("a polygon needs at least three 2D vertices")
        x, y = verts[:, 0], verts[:, 1]
        signed_area = 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))
        if signed_area < 0:
            verts = verts[::-1].copy()
        object.__setattr__(self, "vertices", verts)
        if self.reference is not None:
            object.__setattr__(self, "reference", np.asarray(self.reference, dtype=float))

    @property
    def dim(self) -> int:
        return 2

    @property
    def diameter(self) -> float:
        diff = self.vertices[:, None, :] - self.vertices[None, :, :]
        return float(np.sqrt((diff**2).sum(axis=2)).max()) + 2.0 * max(self.offset, 0.0)

    def centroid(self) -> np.ndarray:
        x, y = self.vertices[:, 0], self.vertices[:, 1]
        cross = x * np.roll(y, -1) - np.roll(x, -1) * y
        area = 0.5 * cross.sum()
        cx = ((x + np.roll(x, -1)) * cross).sum() / (6.0 * area)
        cy = ((y + np.roll(y, -1)) * cross).sum() / (6.0 * area)
        return np.array([cx, cy])

    def default_reference(self) -> np.ndarray:
        return self.reference.copy() if self.reference is not None else self.centroid()

    def grown(self, margin: float) -> "StarPolygon2D":
        return self if margin == 0.0 else replace(self, offset=self.offset + margin)

    def translated(self, offset: np.ndarray) -> "StarPolygon2D":
        ref = None if self.reference is None else self.reference + offset
        return replace(self, vertices=self.vertices + offset, reference=ref)

    def kernel_violation(self, ref: np.ndarray) -> Optional[str]:
        rel = self.vertices - ref
        nxt = np.roll(rel, -1, axis=0)
        cross = rel[:, 0] * nxt[:, 1] - rel[:, 1] * nxt[:, 0]
        if np.any(cross <= 1e-12):
            return "reference point does not see every polygon edge (not in the kernel)"
        if self.offset < 0:
            heights = cross / np.linalg.norm(nxt - rel, axis=1)
            if np.any(heights + self.offset <= 0):
                return "margin shrinks the polygon past its reference point"
        return None

    def profile(self, ref: np.ndarray) -> RadialProfile:
        return _PolygonProfile(self.vertices, ref, self.offset)


Shape = Union[Ellipse, StarPolygon2D]


# ------------------------------------------------------------------ obstacle


@dataclass(frozen=True)
class LocalGeometry:
    """Everything the avoidance layer needs about one obstacle at one point."""

    gamma: float
    normal: np.ndarray
    reference_in: np.ndarray
    reference_out: np.ndarray
    distance: float
    radius: float


@dataclass(frozen=True, eq=False)
class Obstacle:
    """A star-shaped obstacle or, with ``inverted``, an enclosing hull.

    ``reference_in`` is the reference direction consumed by the avoidance
    formulas: pointing toward the reference point for regular obstacles and
    away from it for hulls, so that it always opposes the normal.
    """

    shape: Shape
    reference_point: Optional[np.ndarray] = None
    d0: float = 1.0
    margin: float = 0.0
    inverted: bool = False
    influence_radius: Optional[float] = None
    velocity: Optional[np.ndarray] = None
    _profile: RadialProfile = field(init=False, repr=False)

    def __post_init__(self) -> None:
        ref = self.shape.default_reference() if self.reference_point is None else self.reference_point
        ref = np.asarray(ref, dtype=float)
        if ref.shape != (self.shape.dim,):
            raise ValueError("reference point dimension does not match the shape")
        if self.d0 <= 0:
            raise ValueError("d0 must be positive")
        if self.margin < 0:
            raise ValueError("margin must be non-negative")
        if self.influence_radius is not None and self.influence_radius <= 0:
            raise ValueError("influence radius must be positive")
        vel = np.zeros(self.shape.dim) if self.velocity is None else np.asarray(self.velocity, dtype=float)
        object.__setattr__(self, "reference_point", ref)
        object.__setattr__(self, "velocity", vel)
        effective = self.effective_shape
        problem = effective.kernel_violation(ref)
        if problem:
            raise ValueError(problem)
        object.__setattr__(self, "_profile", effective.profile(ref))

    @property
    def dim(self) -> int:
        return self.shape.dim

    @property
    def effective_shape(self) -> Shape:
        """Shape after applying the margin (hulls shrink, obstacles grow)."""
        return self.shape.grown(-self.margin if self.inverted else self.margin)

    @property
    def diameter(self) -> float:
        return self.effective_shape.diameter

    def translated(self, offset: ArrayLike) -> "Obstacle":
        offset = np.asarray(offset, dtype=float)
        return replace(
            self,
            shape=self.shape.translated(offset),
            reference_point=self.reference_point + offset,
        )

    def with_influence(self, influence_radius: Optional[float]) -> "Obstacle":
        return replace(self, influence_radius=influence_radius)

    # -- polar primitives

    def _polar(self, xi: ArrayLike) -> tuple[float, np.ndarray]:
        delta = np.asarray(xi, dtype=float) - self.reference_point
        dist = math.sqrt(float(delta @ delta))
        if dist == 0.0:
            return 0.0, delta
        return dist, delta / dist

    def surface_radius(self, direction: ArrayLike) -> float:
        """Distance from the reference point to the boundary along ``direction``."""
        u = np.asarray(direction, dtype=float)
        return self._profile.radius(u / norm(u))

    def _gamma_from(self, dist: float, radius: float) -> float:
        if self.inverted:
            return (radius / dist) ** 2
        if dist <= radius:
            return dist / radius
        gap = dist - radius
        if self.influence_radius is not None:
            if gap >= self.influence_radius:
                return math.inf
            return self.influence_radius / (self.influence_radius - gap)
        return gap / self.d0 + 1.0

    # -- public queries

    def gamma(self, xi: ArrayLike) -> float:
        dist, u = self._polar(xi)
        if dist == 0.0:
            if self.inverted:
                raise AtReferencePoint("distance of a hull is undefined at its reference point")
            return 0.0
        return self._gamma_from(dist, self._profile.radius(u))

    def boundary_point(self, xi: ArrayLike) -> np.ndarray:
        dist, u = self._polar(xi)
        if dist == 0.0:
            raise AtReferencePoint("boundary direction is undefined at the reference point")
        return self.reference_point + self._profile.radius(u) * u

    def local(self, xi: ArrayLike) -> LocalGeometry:
        dist, u = self._polar(xi)
        if dist == 0.0:
            raise AtReferencePoint("directions are undefined at the reference point")
        radius, slope = self._profile.radius_gradient(u)
        gamma = self._gamma_from(dist, radius)
        if self.inverted:
            grad = slope / radius - u
            ref_in = u
        else:
            grad = u - slope / (dist if dist > radius else radius)
            ref_in = -u
        normal = grad / math.sqrt(float(grad @ grad))
        return LocalGeometry(gamma, normal, ref_in, -ref_in, dist, radius)

    def directions(self, xi: ArrayLike) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Normal and the outward/inward reference directions at ``xi``."""
        geo = self.local(xi)
        return geo.normal, geo.reference_out, geo.reference_in

    def normal(self, xi: ArrayLike) -> np.ndarray:
        return self.local(xi).normal

    def sample_boundary(self, count: int, seed: int = 0) -> np.ndarray:
        """Deterministic boundary samples (evenly spaced in 2D, seeded otherwise)."""
        return np.array([self.reference_point + self.surface_radius(u) * u for u in unit_directions(self.dim, count, seed)])


def unit_directions(dim: int, count: int, seed: int = 0) -> np.ndarray:
    """Evenly spaced directions in 2D, seeded Gaussian directions otherwise."""
    if dim == 2:
        theta = np.linspace(0.0, 2.0 * math.pi, count, endpoint=False)
        return np.column_stack([np.cos(theta), np.sin(theta)])
    rng = np.random.default_rng(seed)
    raw = rng.normal(size=(count, dim))
    return raw / np.linalg.norm(raw, axis=1)[:, None]


def union_gamma(obstacles: Sequence[Obstacle], xi: ArrayLike) -> float:
    """Smallest distance value over a set of obstacles."""
    return min((o.gamma(xi) for o in obstacles), default=math.inf)
