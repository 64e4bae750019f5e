"""Convergence directions: locally straight fields anchoring the avoidance rotation.

Without a directional singularity the convergence direction blends the
initial field at the reference point with the field at the query point.
With a singularity (an attractor or the centre of a limit cycle) the blend
weight is computed in a space where the obstacle is shrunk to its reference
point and the singularity is folded away to infinity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from .direction_space import ArrayLike, complete_basis, norm
from .dynamics import Dynamics, Singularity
from .errors import AntiCollinear, AtAttractor, AtReferencePoint, FoldSingularity
from .obstacles import Obstacle
from .rotation_algebra import reduce_chain, rotational_sum

FOLD_TOL = 1e-6
FOLD_FADE = 1e-3
SURFACE_TOL = 1e-9


def shrink(obstacle: Obstacle, xi: ArrayLike) -> np.ndarray:
    """Pull a free-space point toward the reference so the surface maps onto it."""
    xi = np.asarray(xi, dtype=float)
    delta = xi - obstacle.reference_point
    dist = norm(delta)
    if dist == 0.0:
        raise AtReferencePoint("cannot shrink the reference point")
    u = delta / dist
    return obstacle.reference_point + (dist - obstacle.surface_radius(u)) * u


def inflate(obstacle: Obstacle, xi: ArrayLike) -> np.ndarray:
    """Inverse of :func:`shrink`."""
    xi = np.asarray(xi, dtype=float)
    delta = xi - obstacle.reference_point
    dist = norm(delta)
    if dist == 0.0:
        raise AtReferencePoint("cannot inflate the reference point")
    u = delta / dist
    return obstacle.reference_point + (dist + obstacle.surface_radius(u)) * u


@dataclass(frozen=True, eq=False)
class FoldingFrame:
    """Coordinates centred at the singularity with the first axis toward the reference.

    A point is represented by a logarithmic radial coordinate along the
    first axis and a perpendicular coordinate that diverges on the ray
    pointing away from the reference.
    """

    attractor: np.ndarray
    reference: np.ndarray
    power: float = 2.0

    def __post_init__(self) -> None:
        a = np.asarray(self.attractor, dtype=float)
        r = np.asarray(self.reference, dtype=float)
        axis = r - a
        scale = float(np.linalg.norm(axis))
        if scale == 0.0:
            raise ValueError("reference and attractor must differ")
        object.__setattr__(self, "attractor", a)
        object.__setattr__(self, "reference", r)
        object.__setattr__(self, "_scale", scale)
        basis = complete_basis(axis / scale)
        object.__setattr__(self, "_basis", basis)
        planar = (*a.tolist(), *basis.T.ravel().tolist()) if a.size == 2 else None
        object.__setattr__(self, "_planar", planar)

    @property
    def basis(self) -> np.ndarray:
        return self._basis  # type: ignore[attr-defined]

    @property
    def scale(self) -> float:
        return self._scale  # type: ignore[attr-defined]

    def alignment(self, xi: ArrayLike) -> float:
        """Cosine between ``xi - attractor`` and ``reference - attractor``."""
        rel = np.asarray(xi, dtype=float) - self.attractor
        dist = norm(rel)
        if dist == 0.0:
            raise AtAttractor("alignment undefined at the attractor")
        return float(self.basis[:, 0] @ rel) / dist

    def _fold_planar(self, xi: ArrayLike) -> np.ndarray:
        a0, a1, e0, e1, b0, b1 = self._planar  # type: ignore[attr-defined]
        x, y = np.asarray(xi, dtype=float).tolist()
        rx, ry = x - a0, y - a1
        dist = math.hypot(rx, ry)
        if dist == 0.0:
            raise AtAttractor("fold undefined at the attractor")
        p = min(max((e0 * rx + e1 * ry) / dist, -1.0), 1.0)
        if p <= -1.0 + FOLD_TOL:
            raise FoldSingularity("point lies opposite to the reference")
        along = self.scale * (1.0 + math.log(dist / self.scale))
        side = b0 * rx + b1 * ry
        across = 0.0 if side == 0.0 else math.copysign(((1.0 - p) / (1.0 + p)) ** self.power, side)
        return np.array((a0 + along * e0 + across * b0, a1 + along * e1 + across * b1))

    def fold(self, xi: ArrayLike) -> np.ndarray:
        if self._planar is not None:  # type: ignore[attr-defined]
            return self._fold_planar(xi)
        rel = np.asarray(xi, dtype=float) - self.attractor
        dist = norm(rel)
        if dist == 0.0:
            raise AtAttractor("fold undefined at the attractor")
        local = self.basis.T @ rel / dist
        p = min(max(float(local[0]), -1.0), 1.0)
        if p <= -1.0 + FOLD_TOL:
            raise FoldSingularity("point lies opposite to the reference")
        coords = np.zeros_like(local)
        coords[0] = self.scale * (1.0 + math.log(dist / self.scale))
        perp = local[1:]
        perp_norm = norm(perp)
        if perp_norm > 0.0:
            stretch = ((1.0 - p) / (1.0 + p)) ** self.power
            coords[1:] = stretch * perp / perp_norm
        return self.attractor + self.basis @ coords

    def unfold(self, point: ArrayLike) -> np.ndarray:
        """Inverse of :meth:`fold`."""
        coords = self.basis.T @ (np.asarray(point, dtype=float) - self.attractor)
        dist = self.scale * math.exp(coords[0] / self.scale - 1.0)
        perp = coords[1:]
        stretch = norm(perp)
        root = stretch ** (1.0 / self.power)
        p = (1.0 - root) / (1.0 + root)
        local = np.zeros_like(coords)
        local[0] = p
        if stretch > 0.0:
            local[1:] = math.sqrt(max(1.0 - p * p, 0.0)) * perp / stretch
        return self.attractor + dist * (self.basis @ local)


def fold(frame: FoldingFrame, xi: ArrayLike) -> np.ndarray:
    return frame.fold(xi)


def folding_frame(obstacle: Obstacle, attractor: ArrayLike, power: float = 2.0) -> FoldingFrame:
    """Folding frame in the shrunk space of ``obstacle``."""
    return FoldingFrame(shrink(obstacle, attractor), obstacle.reference_point, power)


@lru_cache(maxsize=512)
def _cached_frame(obstacle: Obstacle, attractor: tuple[float, ...]) -> tuple[float, FoldingFrame | None]:
    # Obstacles are immutable and hash by identity, so the pair is a safe key.
    point = np.array(attractor)
    gamma = obstacle.gamma(point)
    return gamma, (folding_frame(obstacle, point) if gamma > 1.0 else None)


def _fade(p: float) -> float:
    if p <= -1.0 + FOLD_TOL:
        return 0.0
    if p >= -1.0 + FOLD_FADE:
        return 1.0
    return (p + 1.0 - FOLD_TOL) / (FOLD_FADE - FOLD_TOL)


def total_map(obstacle: Obstacle, frame: FoldingFrame, xi: ArrayLike) -> tuple[np.ndarray, float]:
    """Mapped point and mapping weight for a free-space position.

    Points at or inside the surface map to themselves with full weight;
    points on the fold's singular ray get zero weight.
    """
    xi = np.asarray(xi, dtype=float)
    gamma = obstacle.gamma(xi)
    if gamma <= 1.0 + SURFACE_TOL:
        return xi.copy(), 1.0
    shrunk = shrink(obstacle, xi)
    try:
        p = frame.alignment(shrunk)
        folded = frame.fold(shrunk)
    except (FoldSingularity, AtAttractor):
        return xi.copy(), 0.0
    if norm(folded - obstacle.reference_point) == 0.0:
        return xi.copy(), 1.0
    mapped = inflate(obstacle, folded)
    mapped_gamma = obstacle.gamma(mapped)
    if math.isinf(gamma) or math.isinf(mapped_gamma):
        return mapped, 0.0
    weight = 1.0 / math.sqrt((gamma - 1.0) * max(mapped_gamma - 1.0, 0.0) + 1.0)
    return mapped, weight * _fade(p)


def convergence_weight(gamma: float) -> float:
    if gamma < 1.0:
        return 1.0
    return 0.0 if math.isinf(gamma) else 1.0 / gamma


def _unit_or_none(v: np.ndarray) -> Optional[np.ndarray]:
    norm = math.sqrt(float(v @ v))
    return None if norm == 0.0 else v / norm


def chain_direction(
    f_here: np.ndarray,
    f_reference: np.ndarray,
    xi: np.ndarray,
    reference: np.ndarray,
    singular_point: np.ndarray,
    sign: float,
    weight: float,
) -> np.ndarray:
    """Blend ``f_here`` toward ``f_reference`` through the singularity directions.

    The blend passes along the chain: field here, direction of ``xi`` from
    the singular point, direction of ``reference`` from the singular point,
    field at the reference.  Full weight gives ``f_reference``; zero weight
    gives ``f_here``.
    """
    if weight <= 0.0:
        return f_here
    weight = min(weight, 1.0)
    chain = (f_here, sign * (xi - singular_point), sign * (reference - singular_point), f_reference)
    return reduce_chain(chain, (1.0 - weight, 0.0, 0.0, weight))


@lru_cache(maxsize=1024)
def _reference_velocity(dynamics: Dynamics, point: tuple[float, ...], t: float) -> Optional[np.ndarray]:
    return _unit_or_none(dynamics.evaluate(np.array(point), t))


def convergence_direction(
    dynamics: Dynamics,
    obstacle: Obstacle,
    xi: ArrayLike,
    t: float = 0.0,
    singularity: Singularity | str = "auto",
    initial: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Unit convergence direction of ``dynamics`` around ``obstacle`` at ``xi``.

    ``initial`` may carry ``dynamics`` already evaluated at ``xi``.
    """
    xi = np.asarray(xi, dtype=float)
    sing = dynamics.singularity(t) if isinstance(singularity, str) else singularity
    f_here = _unit_or_none(dynamics.evaluate(xi, t) if initial is None else np.asarray(initial, dtype=float))
    ref = obstacle.reference_point
    f_ref = _reference_velocity(dynamics, tuple(ref.tolist()), t if dynamics.time_varying else 0.0)

    if sing is None:
        if f_here is None:
            return f_ref if f_ref is not None else np.eye(xi.size)[0]
        if f_ref is None:
            return f_here
        w = convergence_weight(obstacle.gamma(xi))
        if w == 0.0:
            return f_here
        return rotational_sum(f_here, [(w, f_ref)])

    point, sign = sing
    point = np.asarray(point, dtype=float)
    if obstacle.inverted:
        toward = _unit_or_none(point - xi)
        if obstacle.gamma(point) > 1.0 and toward is not None:
            return toward
        return convergence_direction(dynamics, obstacle, xi, t, None, initial)

    _, frame = _cached_frame(obstacle, tuple(point.tolist()))
    if frame is None:
        straight = _unit_or_none(sign * (ref - point))
        if straight is None or f_here is None:
            return f_here if f_here is not None else (straight if straight is not None else np.eye(xi.size)[0])
        w = convergence_weight(obstacle.gamma(xi))
        if w == 0.0:
            return f_here
        return rotational_sum(f_here, [(w, straight)])

    if f_here is None:
        fallback = _unit_or_none(sign * (ref - point))
        return fallback if fallback is not None else np.eye(xi.size)[0]
    if f_ref is None:
        return f_here
    _, weight = total_map(obstacle, frame, xi)
    if weight > 0.0:
        rel, axis = xi - point, ref - point
        weight *= _fade(float(rel @ axis) / (norm(rel) * norm(axis)))
    try:
        return chain_direction(f_here, f_ref, xi, ref, point, sign, weight)
    except AntiCollinear:
        return f_here


def mapping_weight(obstacle: Obstacle, attractor: ArrayLike, xi: ArrayLike) -> float:
    """Mapping weight of ``xi`` for ``obstacle`` with singular point ``attractor``."""
    return total_map(obstacle, folding_frame(obstacle, attractor), xi)[1]
