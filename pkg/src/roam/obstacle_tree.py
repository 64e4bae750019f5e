"""Trees of star-shaped components forming a single concave obstacle."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .direction_space import ArrayLike, apply_rotation, norm, rotation_from_pair
from .errors import DegenerateRay
from .obstacles import Ellipse, Obstacle

OPPOSING_TOL = 1e-6
INTERSECTION_SAMPLES = 64
ROOT_TOL = 1e-9
ROOT_MAX_ITER = 200
_SCAN_STEPS = 256


@dataclass(frozen=True, eq=False)
class ObstacleTree:
    """Components linked to a single root through parent indices.

    Structural problems (cycles, several roots, dangling parents) raise at
    construction; geometric conditions are reported by :func:`validate_tree`.
    """

    components: tuple[Obstacle, ...]
    parents: tuple[Optional[int], ...]
    names: tuple[str, ...] = ()
    root: int = field(init=False)
    children: tuple[tuple[int, ...], ...] = field(init=False, repr=False)
    levels: tuple[int, ...] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        comps = tuple(self.components)
        parents = tuple(self.parents)
        if not comps:
            raise ValueError("a tree needs at least one component")
        if len(parents) != len(comps):
            raise ValueError("one parent entry is required per component")
        names = tuple(self.names) or tuple(f"component_{i}" for i in range(len(comps)))
        if len(names) != len(comps):
            raise ValueError("one name is required per component")
        dims = {c.dim for c in comps}
        if len(dims) != 1:
            raise ValueError("all tree components must share one dimension")
        roots = [i for i, p in enumerate(parents) if p is None]
        if len(roots) != 1:
            raise ValueError(f"a tree needs exactly one root, found {len(roots)}")
        kids: list[list[int]] = [[] for _ in comps]
        for i, p in enumerate(parents):
            if p is None:
                continue
            if not 0 <= p < len(comps) or p == i:
                raise ValueError(f"{names[i]}: invalid parent index {p}")
            kids[p].append(i)
        levels = [-1] * len(comps)
        levels[roots[0]] = 0
        frontier = [roots[0]]
        while frontier:
            nxt = []
            for node in frontier:
                for child in kids[node]:
                    levels[child] = levels[node] + 1
                    nxt.append(child)
            frontier = nxt
        if min(levels) < 0:
            raise ValueError("tree components are not all connected to the root (cycle?)")
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "parents", parents)
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "root", roots[0])
        object.__setattr__(self, "children", tuple(tuple(k) for k in kids))
        object.__setattr__(self, "levels", tuple(levels))

    @property
    def dim(self) -> int:
        return self.components[0].dim

    def __len__(self) -> int:
        return len(self.components)

    def path_to_root(self, index: int) -> list[int]:
        """Component indices from ``index`` up to and including the root."""
        path = [index]
        while self.parents[path[-1]] is not None:
            path.append(self.parents[path[-1]])  # type: ignore[arg-type]
        return path

    def gamma(self, xi: ArrayLike) -> float:
        """Distance value of the union (minimum over components)."""
        return min(c.gamma(xi) for c in self.components)

    def translated(self, offset: ArrayLike) -> "ObstacleTree":
        return ObstacleTree(tuple(c.translated(offset) for c in self.components), self.parents, self.names)


def validate_tree(tree: ObstacleTree) -> list[str]:
    """Geometric violations of the tree preconditions, one message each."""
    problems: list[str] = []
    comps = tree.components
    for i, parent_idx in enumerate(tree.parents):
        if parent_idx is None:
            continue
        name, pname = tree.names[i], tree.names[parent_idx]
        child, parent = comps[i], comps[parent_idx]
        ref = child.reference_point
        if child.gamma(ref) >= 1.0:
            problems.append(f"{name}: reference point not inside the component")
        if parent.gamma(ref) >= 1.0:
            problems.append(f"{name}: reference point not inside parent {pname}")
        if child.gamma(parent.reference_point) < 1.0:
            problems.append(f"{name}: parent {pname} reference point lies inside the component")
        samples = child.sample_boundary(INTERSECTION_SAMPLES)
        if not any(parent.gamma(s) < 1.0 for s in samples):
            problems.append(f"{name}: no intersection with parent {pname}")
        grand_idx = tree.parents[parent_idx]
        if grand_idx is not None:
            to_parent = parent.reference_point - ref
            to_grand = comps[grand_idx].reference_point - parent.reference_point
            denom = float(norm(to_parent) * norm(to_grand))
            if denom > 0 and float(to_parent @ to_grand) / denom <= -1.0 + OPPOSING_TOL:
                problems.append(
                    f"{name}: direction to parent {pname} opposes the direction to {tree.names[grand_idx]}"
                )
    return problems


def _first_surface_hit(obstacle: Obstacle, start: np.ndarray, step: np.ndarray) -> float:
    """Smallest ``b >= 0`` with ``start + b * step`` on the obstacle boundary."""
    shape = obstacle.effective_shape
    if isinstance(shape, Ellipse):
        m = (shape.orientation / shape.semi_axes).T
        e = m @ (start - shape.center)
        d = m @ step
        a = float(d @ d)
        bq = 2.0 * float(e @ d)
        cq = float(e @ e) - 1.0
        disc = bq * bq - 4.0 * a * cq
        if disc >= 0.0:
            sq = math.sqrt(disc)
            for b in sorted(((-bq - sq) / (2.0 * a), (-bq + sq) / (2.0 * a))):
                if b >= 0.0:
                    return b
        raise DegenerateRay("propagation ray does not meet the parent surface")

    def excess(b: float) -> float:
        return obstacle.gamma(start + b * step) - 1.0

    length = norm(step)
    b_max = 4.0 * obstacle.diameter / length + 1.0
    lo, f_lo = 0.0, excess(0.0)
    if f_lo == 0.0:
        return 0.0
    hi = lo
    for k in range(1, _SCAN_STEPS + 1):
        hi = b_max * k / _SCAN_STEPS
        f_hi = excess(hi)
        if (f_hi >= 0.0) != (f_lo >= 0.0):
            break
        lo, f_lo = hi, f_hi
    else:
        raise DegenerateRay("propagation ray does not meet the parent surface")
    for _ in range(ROOT_MAX_ITER):
        if hi - lo <= ROOT_TOL:
            break
        mid = 0.5 * (lo + hi)
        f_mid = excess(mid)
        if (f_mid >= 0.0) == (f_lo >= 0.0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def propagate_surface_point(parent: Obstacle, child: Obstacle, s_child: ArrayLike) -> tuple[np.ndarray, float]:
    """Continue the ray from ``s_child`` through the child's reference to the parent surface."""
    s_child = np.asarray(s_child, dtype=float)
    step = child.reference_point - s_child
    if norm(step) == 0.0:
        raise DegenerateRay("surface point coincides with the component reference point")
    b = _first_surface_hit(parent, s_child, step)
    return s_child + b * step, b


@dataclass(frozen=True)
class SurfaceChain:
    """Surface points from a component up to the root, one per component."""

    indices: tuple[int, ...]
    points: tuple[np.ndarray, ...]
    factors: tuple[float, ...]


def propagate_surface_points(tree: ObstacleTree, xi: ArrayLike, index: int) -> SurfaceChain:
    """Surface chain for component ``index`` seen from position ``xi``."""
    path = tree.path_to_root(index)
    s = tree.components[index].boundary_point(xi)
    points = [s]
    factors: list[float] = []
    for child_idx, parent_idx in zip(path[:-1], path[1:]):
        s, b = propagate_surface_point(tree.components[parent_idx], tree.components[child_idx], s)
        points.append(s)
        factors.append(b)
    return SurfaceChain(tuple(path), tuple(points), tuple(factors))


def hiding_weight(tree: ObstacleTree, index: int, xi: ArrayLike, surface_point: Optional[np.ndarray] = None) -> float:
    """Occlusion weight of a component by its parent (1 for the root)."""
    parent_idx = tree.parents[index]
    if parent_idx is None:
        return 1.0
    comp = tree.components[index]
    parent = tree.components[parent_idx]
    s = comp.boundary_point(xi) if surface_point is None else surface_point
    occlusion = parent.gamma(s)
    if occlusion > 1.0:
        return 1.0
    to_xi = np.asarray(xi, dtype=float) - comp.reference_point
    to_parent = parent.reference_point - comp.reference_point
    b = float(to_xi @ to_parent) / float(norm(to_xi) * norm(to_parent))
    if b >= 1.0:
        return 0.0
    return occlusion ** (1.0 / (1.0 - b))


def propagate_velocity(tree: ObstacleTree, chain: SurfaceChain, f_root: ArrayLike) -> np.ndarray:
    """Carry ``f_root`` from the root down the chain to its first component.

    Each link turns the vector by the rotation taking the parent's surface
    direction onto the child's.
    """
    f = np.asarray(f_root, dtype=float)
    idx, pts = chain.indices, chain.points
    for k in range(len(idx) - 1, 0, -1):
        child, parent = tree.components[idx[k - 1]], tree.components[idx[k]]
        rot = rotation_from_pair(pts[k] - parent.reference_point, pts[k - 1] - child.reference_point)
        f = apply_rotation(rot, f, rot.beta)
    return f


def default_leaf_influence(tree: ObstacleTree, factor: float = 4.0) -> ObstacleTree:
    """Give every non-root component without an influence radius a finite one."""
    comps = []
    for i, comp in enumerate(tree.components):
        if i != tree.root and comp.influence_radius is None:
            comp = comp.with_influence(factor * comp.diameter)
        comps.append(comp)
    return ObstacleTree(tuple(comps), tree.parents, tree.names)


def tree_from_components(components: Sequence[Obstacle], parents: Sequence[Optional[int]], names: Sequence[str] = ()) -> ObstacleTree:
    return ObstacleTree(tuple(components), tuple(parents), tuple(names))
