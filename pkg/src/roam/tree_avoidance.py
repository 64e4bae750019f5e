"""Avoidance and convergence directions for trees of star-shaped components."""

from __future__ import annotations

import math
import numpy as np

from .avoidance import (
    SADDLE_TOL,
    AvoidanceIntermediates,
    AvoidanceParams,
    _intersect_radius,
    obstacle_terms,
    rotate_toward,
    rotation_weight,
    speed_scaling,
)
from .convergence import (
    _unit_or_none,
    chain_direction,
    convergence_direction,
    convergence_weight,
    mapping_weight,
)
from .direction_space import TOL_ANTICOLLINEAR, ArrayLike, DirectionFrame, norm
from .dynamics import Dynamics, Singularity
from .errors import AntiCollinear, AtReferencePoint, DegenerateRay, DegenerateSaddle
from .obstacle_tree import ObstacleTree, hiding_weight, propagate_surface_points, propagate_velocity
from .obstacles import LocalGeometry
from .rotation_algebra import RotationTree, reduce_tree, rotational_sum
from .weights import distance_weights, normalized_mapping_weights

_ROOT = "f"


def tree_tangent(normal: ArrayLike, r_in: ArrayLike, initial: ArrayLike, tangent_radius: float = math.pi / 2) -> np.ndarray:
    """Tangent direction on the side of ``initial``, kept parallel to the surface.

    Inward-pointing ``initial`` is pushed out from the inward reference direction to
    radius ``tangent_radius`` around ``-normal``; outward-pointing ``initial`` is pulled in
    from the outward reference direction to radius ``pi - tangent_radius``
    around ``normal``.
    """
    return _tree_tangent_terms(np.asarray(normal, float), np.asarray(r_in, float), np.asarray(initial, float), tangent_radius)[0]


def _tree_tangent_terms(normal: np.ndarray, r_in: np.ndarray, initial: np.ndarray, tangent_radius: float) -> tuple[np.ndarray, float, float]:
    """Tangent, direction-space distance to the anchor, and reference radius."""
    initial = initial / math.sqrt(float(initial @ initial))
    if float(-normal @ initial) > math.cos(tangent_radius):
        frame = DirectionFrame(-normal)
        anchor = r_in
        radius = tangent_radius
    else:
        frame = DirectionFrame(normal)
        anchor = -r_in
        radius = math.pi - tangent_radius
    kappa_r = frame.kappa(anchor)
    reference_radius = min(radius - norm(kappa_r), math.pi / 2)
    if float(frame.anchor @ initial) <= -1.0 + TOL_ANTICOLLINEAR:
        # Only reachable for the outward branch with radius pi - R^e = 0.
        return initial, math.pi - norm(kappa_r), reference_radius
    kappa_f = frame.kappa(initial)
    delta = norm(kappa_f - kappa_r)
    if delta < SADDLE_TOL:
        raise DegenerateSaddle("propagated direction coincides with the reference direction")
    return frame.vector(_intersect_radius(kappa_r, kappa_f, radius)), delta, reference_radius


def tree_terms(geo: LocalGeometry, f_o: np.ndarray, params: AvoidanceParams) -> AvoidanceIntermediates:
    try:
        tangent, delta_k, reference_radius = _tree_tangent_terms(
            geo.normal, geo.reference_in, f_o, params.tangent_radius
        )
    except DegenerateSaddle:
        tangent, delta_k = f_o, 0.0
        kappa_r = DirectionFrame(-geo.normal).kappa(geo.reference_in)
        reference_radius = min(params.tangent_radius - norm(kappa_r), math.pi / 2)
    lam, q = rotation_weight(geo.gamma, delta_k, reference_radius, params.smoothness)
    h = speed_scaling(delta_k, reference_radius, geo.gamma)
    return AvoidanceIntermediates(geo.gamma, lam, q, reference_radius, delta_k, h, tangent)


def _reduce_or_fallback(tree: RotationTree, weights: dict, f_dir: np.ndarray) -> np.ndarray:
    try:
        return reduce_tree(tree, weights)
    except AntiCollinear:
        pass
    flat = [(w, node.direction) for node in tree.nodes if node.id != _ROOT and (w := weights.get(node.id, 0.0)) > 0]
    try:
        return rotational_sum(f_dir, flat)
    except AntiCollinear:
        best = max(tree.nodes, key=lambda node: weights.get(node.id, 0.0))
        return best.direction


def avoid_tree_detailed(
    tree: ObstacleTree,
    initial: ArrayLike,
    convergence: ArrayLike,
    xi: ArrayLike,
    params: AvoidanceParams = AvoidanceParams(),
    weight_mode: str = "absolute",
) -> tuple[np.ndarray, float]:
    """Unit avoidance direction and speed factor for a tree of components.

    ``convergence`` is the convergence direction of the whole tree; it is carried
    through the tree to every component before that component's tangent is
    evaluated.
    """
    initial = np.asarray(initial, dtype=float)
    f_dir = initial / math.sqrt(float(initial @ initial))
    convergence = np.asarray(convergence, dtype=float)
    convergence = convergence / math.sqrt(float(convergence @ convergence))
    xi = np.asarray(xi, dtype=float)

    if len(tree) == 1:
        comp = tree.components[0]
        try:
            geo = comp.local(xi)
        except AtReferencePoint:
            if comp.inverted:
                return f_dir, 1.0
            raise
        terms = obstacle_terms(geo, convergence, params)
        return rotate_toward(initial, convergence, terms.tangent, terms.rotation_weight), terms.speed_factor

    gammas = [comp.gamma(xi) for comp in tree.components]
    weights = distance_weights(gammas, mode=weight_mode, relative=True)
    if not np.any(weights > 0):
        return f_dir, 1.0

    needed: set[int] = set()
    for i in np.flatnonzero(weights > 0):
        needed.update(tree.path_to_root(int(i)))

    directions: dict[int, np.ndarray] = {}
    node_weight: dict[int, float] = {}
    speed: dict[int, float] = {}
    for i in sorted(needed, key=lambda k: tree.levels[k]):
        parent = tree.parents[i]
        comp = tree.components[i]
        fallback = directions[parent] if parent is not None else f_dir
        try:
            chain = propagate_surface_points(tree, xi, i)
            hidden = hiding_weight(tree, i, xi, chain.points[0])
            f_o = propagate_velocity(tree, chain, convergence)
            geo = comp.local(xi)
            terms = tree_terms(geo, f_o, params)
            directions[i] = rotate_toward(initial, f_o, terms.tangent, terms.rotation_weight)
            speed[i] = terms.speed_factor
        except (AntiCollinear, AtReferencePoint, DegenerateRay):
            hidden = 0.0
            directions[i] = fallback
            speed[i] = 1.0
        node_weight[i] = float(weights[i]) * hidden

    total = sum(node_weight.values())
    rtree = RotationTree()
    rtree.add(_ROOT, f_dir)
    for i in sorted(needed, key=lambda k: tree.levels[k]):
        parent = tree.parents[i]
        rtree.add(i, directions[i], _ROOT if parent is None else parent)
    reduce_weights: dict[object, float] = {_ROOT: max(0.0, 1.0 - total)}
    reduce_weights.update(node_weight)
    if total > 1.0:
        for k in node_weight:
            reduce_weights[k] = node_weight[k] / total

    direction = _reduce_or_fallback(rtree, reduce_weights, f_dir)
    h = 1.0
    for k, w in node_weight.items():
        if w > 0.0:
            h *= speed[k] ** w
    return direction, h


def avoid_tree(
    tree: ObstacleTree,
    initial: ArrayLike,
    convergence: ArrayLike,
    xi: ArrayLike,
    params: AvoidanceParams = AvoidanceParams(),
) -> np.ndarray:
    """Avoidance velocity for a tree given the initial velocity and convergence direction."""
    initial = np.asarray(initial, dtype=float)
    speed = math.sqrt(float(initial @ initial))
    if speed == 0.0:
        return np.zeros_like(initial)
    direction, h = avoid_tree_detailed(tree, initial, convergence, xi, params)
    return (h * speed) * direction


def tree_convergence(
    tree: ObstacleTree,
    dynamics: Dynamics,
    xi: ArrayLike,
    t: float = 0.0,
    singularity: Singularity | str = "auto",
    weight_mode: str = "absolute",
) -> np.ndarray:
    """Locally straight convergence direction around a whole tree."""
    xi = np.asarray(xi, dtype=float)
    root = tree.components[tree.root]
    if len(tree) == 1:
        return convergence_direction(dynamics, root, xi, t, singularity)

    sing = dynamics.singularity(t) if isinstance(singularity, str) else singularity
    f_here = _unit_or_none(dynamics.evaluate(xi, t))
    ref = root.reference_point
    others = [i for i in range(len(tree)) if i != tree.root]

    if sing is not None:
        point, sign = np.asarray(sing[0], dtype=float), sing[1]
        if tree.gamma(point) <= 1.0:
            target = _unit_or_none(sign * (ref - point))
            sing = None
        else:
            target = _unit_or_none(dynamics.evaluate(ref, t))
    else:
        target = _unit_or_none(dynamics.evaluate(ref, t))

    if f_here is None:
        return target if target is not None else np.eye(xi.size)[0]
    if target is None:
        return f_here

    if sing is None:
        root_w = convergence_weight(root.gamma(xi))
        raw = [convergence_weight(tree.components[i].gamma(xi)) for i in others]
    else:
        root_w = mapping_weight(root, point, xi)
        raw = [_component_mapping_weight(tree, i, point, xi) for i in others]
    leaf = min(1.0, root_w + float(np.sum(normalized_mapping_weights(raw, mode=weight_mode))))
    if leaf == 0.0:
        return f_here
    if sing is None:
        return rotational_sum(f_here, [(leaf, target)])
    try:
        return chain_direction(f_here, target, xi, ref, point, sign, leaf)
    except AntiCollinear:
        return f_here


def _component_mapping_weight(tree: ObstacleTree, index: int, point: np.ndarray, xi: np.ndarray) -> float:
    comp = tree.components[index]
    if comp.gamma(point) <= 1.0:
        return convergence_weight(comp.gamma(xi))
    return mapping_weight(comp, point, xi)

