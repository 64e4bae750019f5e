"""Weighted sums, sequences and trees of plane rotations."""

from __future__ import annotations

import math
from collections.abc import Hashable, Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

from .direction_space import (
    TOL_ANTICOLLINEAR,
    ArrayLike,
    VectorRotation,
    apply_rotation,
    combine,
    complete_basis,
    norm,
    rotation_from_pair,
    unit,
)
from .errors import AntiCollinear, IncompatibleChain, TreeDepthExceeded, WeightSumInvalid

MAX_LEVELS = 16
CHAIN_TOL = 1e-6
WEIGHT_SUM_TOL = 1e-9


def weighted_sum_shared_base(
    b_i: ArrayLike, terms: Sequence[tuple[ArrayLike, float, float]]
) -> VectorRotation:
    """Average rotations that share the input base ``b_i``.

    Each term is ``(b_o, beta, weight)``.  The rotations are summed as
    tangent vectors ``weight * beta * b_o`` at ``b_i``.
    """
    b_i = unit(b_i)
    total = np.zeros_like(b_i)
    for b_o, beta, weight in terms:
        if weight == 0.0:
            continue
        total = total + (weight * beta) * np.asarray(b_o, dtype=float)
    beta_hat = norm(total)
    if beta_hat == 0.0:
        return VectorRotation(b_i, complete_basis(b_i)[:, 1].copy(), 0.0)
    return VectorRotation(b_i, total / beta_hat, beta_hat)


def rotational_sum(v0: ArrayLike, terms: Sequence[tuple[float, ArrayLike]]) -> np.ndarray:
    """Rotate ``v0`` toward the weighted directions in ``terms``.

    ``terms`` holds ``(weight, direction)`` pairs with weights summing to at
    most one.  A single full-weight term reproduces its direction.
    """
    v0 = unit(v0)
    if len(terms) == 1:
        weight, v = terms[0]
        if weight == 0.0:
            return v0
        rot = rotation_from_pair(v0, v)
        angle = float(weight) * rot.beta
        return combine(math.cos(angle), v0, math.sin(angle), rot.b_o)
    pieces = []
    for weight, v in terms:
        if weight == 0.0:
            continue
        rot = rotation_from_pair(v0, v)
        pieces.append((rot.b_o, rot.beta, float(weight)))
    if not pieces:
        return v0
    summed = weighted_sum_shared_base(v0, pieces)
    return combine(math.cos(summed.beta), v0, math.sin(summed.beta), summed.b_o)


def weighted_sequence(
    chain: Sequence[VectorRotation], weights: Sequence[float]
) -> VectorRotation:
    """Compose a chain of rotations, each applied only partially.

    Element ``n`` turns by ``weights[n] * beta_n``; every later element is
    first carried along with the shortfall ``(weights[n] - 1) * beta_n`` so
    that it starts where the partial rotation stopped.
    """
    if len(chain) != len(weights):
        raise ValueError("chain and weights differ in length")
    if not chain:
        raise ValueError("empty rotation chain")
    for prev, nxt in zip(chain[:-1], chain[1:]):
        if norm(prev.endpoint - nxt.b_i) > CHAIN_TOL:
            raise IncompatibleChain("rotation output base does not match the next input base")

    adapted = list(chain)
    endpoint = adapted[0].b_i
    for n, weight in enumerate(weights):
        rot = adapted[n]
        endpoint = apply_rotation(rot, rot.b_i, weight * rot.beta)
        shortfall = (weight - 1.0) * rot.beta
        if shortfall == 0.0:
            continue
        for m in range(n + 1, len(adapted)):
            later = adapted[m]
            adapted[m] = VectorRotation(
                apply_rotation(rot, later.b_i, shortfall),
                apply_rotation(rot, later.b_o, shortfall),
                later.beta,
            )
    return rotation_from_pair(chain[0].b_i, endpoint)


@dataclass(frozen=True)
class RotationNode:
    id: Hashable
    direction: np.ndarray
    parent: Hashable | None = None


@dataclass
class RotationTree:
    """Directions arranged in a tree with a single root."""

    nodes: list[RotationNode] = field(default_factory=list)

    def add(self, node_id: Hashable, direction: ArrayLike, parent: Hashable | None = None) -> None:
        self.nodes.append(RotationNode(node_id, unit(direction), parent))

    def levels(self) -> tuple[Hashable, dict[Hashable, int], dict[Hashable, list[Hashable]]]:
        """Root id, level per node and children per node."""
        ids = [n.id for n in self.nodes]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate node ids in rotation tree")
        roots = [n.id for n in self.nodes if n.parent is None]
        if len(roots) != 1:
            raise ValueError(f"rotation tree needs exactly one root, found {len(roots)}")
        known = set(ids)
        children: dict[Hashable, list[Hashable]] = {i: [] for i in ids}
        for n in self.nodes:
            if n.parent is not None:
                if n.parent not in known:
                    raise ValueError(f"node {n.id!r} has unknown parent {n.parent!r}")
                children[n.parent].append(n.id)

        level = {roots[0]: 0}
        frontier = [roots[0]]
        depth = 0
        while frontier:
            nxt = []
            for node_id in frontier:
                for child in children[node_id]:
                    level[child] = depth + 1
                    nxt.append(child)
            if nxt and depth + 1 > MAX_LEVELS:
                raise TreeDepthExceeded(f"rotation tree deeper than {MAX_LEVELS} levels")
            frontier = nxt
            depth += 1
        if len(level) != len(ids):
            raise ValueError("rotation tree is not connected")
        return roots[0], level, children


def _descendants(children: Mapping[Hashable, list[Hashable]], node_id: Hashable) -> list[Hashable]:
    out: list[Hashable] = []
    stack = list(children[node_id])
    while stack:
        nid = stack.pop()
        out.append(nid)
        stack.extend(children[nid])
    return out


def reduce_tree(tree: RotationTree, weights: Mapping[Hashable, float]) -> np.ndarray:
    """Weighted average direction of a rotation tree.

    Weights are accumulated bottom-up so each node carries the weight of its
    whole subtree.  The average is then built top-down: at every level the
    running direction is turned toward the (already carried along) children
    by their accumulated weights, and each child's subtree is rotated so that
    the child coincides with the new running direction.
    """
    root, level, children = tree.levels()
    for node in tree.nodes:
        w = float(weights.get(node.id, 0.0))
        if not 0.0 <= w <= 1.0:
            raise WeightSumInvalid(f"weight of node {node.id!r} outside [0, 1]: {w}")
    total = sum(float(weights.get(n.id, 0.0)) for n in tree.nodes)
    if abs(total - 1.0) > WEIGHT_SUM_TOL:
        raise WeightSumInvalid(f"tree weights sum to {total}, expected 1")

    parents = {n.id: n.parent for n in tree.nodes}
    cumulative = {n.id: float(weights.get(n.id, 0.0)) for n in tree.nodes}
    for node_id in sorted(level, key=level.__getitem__, reverse=True):
        parent = parents[node_id]
        if parent is not None:
            cumulative[parent] += cumulative[node_id]

    direction = {n.id: n.direction for n in tree.nodes}
    by_level: dict[int, list[Hashable]] = {}
    for n in tree.nodes:
        by_level.setdefault(level[n.id], []).append(n.id)

    current = direction[root]
    for lvl in range(1, max(by_level) + 1):
        active = [c for c in by_level.get(lvl, []) if cumulative[c] > 0.0]
        if not active:
            break
        current = rotational_sum(current, [(cumulative[c], direction[c]) for c in active])
        for c in active:
            below = _descendants(children, c)
            if not below:
                continue
            carry = rotation_from_pair(direction[c], current)
            if carry.beta == 0.0:
                continue
            for d in below:
                direction[d] = apply_rotation(carry, direction[d], carry.beta)
    return current


def _planar_chain(directions: Sequence[ArrayLike], cumulative: list[float]) -> np.ndarray:
    # In the plane every rotation is a shift of the polar angle.
    angles = []
    for d in directions:
        x, y = np.asarray(d, dtype=float).tolist()
        length = math.hypot(x, y)
        if length == 0.0 or not math.isfinite(length):
            raise ValueError("cannot normalize a zero or non-finite vector")
        angles.append(math.atan2(y, x))
    current = angles[0]
    for k in range(1, len(angles)):
        if cumulative[k] <= 0.0:
            break
        gap = math.remainder(angles[k] - current, math.tau)
        if math.cos(gap) <= -1.0 + TOL_ANTICOLLINEAR:
            raise AntiCollinear(f"rotation pair is anti-collinear (dot={math.cos(gap):.3g})")
        target = current + cumulative[k] * gap
        shift = target - (current + gap)
        for j in range(k + 1, len(angles)):
            angles[j] += shift
        current = target
    return np.array((math.cos(current), math.sin(current)))


def reduce_chain(directions: Sequence[ArrayLike], weights: Sequence[float]) -> np.ndarray:
    """:func:`reduce_tree` for a path, where every node is the parent of the next.

    Avoids building the generic tree; the operations and their order are the
    same, so the result matches :func:`reduce_tree` exactly.
    """
    if len(directions) != len(weights) or not directions:
        raise ValueError("need one weight per direction and at least one direction")
    for w in weights:
        if not 0.0 <= w <= 1.0:
            raise WeightSumInvalid(f"weight outside [0, 1]: {w}")
    if abs(sum(float(w) for w in weights) - 1.0) > WEIGHT_SUM_TOL:
        raise WeightSumInvalid("chain weights must sum to 1")
    cumulative = [0.0] * len(directions)
    running = 0.0
    for k in range(len(directions) - 1, -1, -1):
        running += float(weights[k])
        cumulative[k] = running
    if len(directions[0]) == 2:
        return _planar_chain(directions, cumulative)
    dirs = [unit(d) for d in directions]
    current = dirs[0]
    for k in range(1, len(dirs)):
        if cumulative[k] <= 0.0:
            break
        current = rotational_sum(current, [(cumulative[k], dirs[k])])
        if k + 1 < len(dirs):
            carry = rotation_from_pair(dirs[k], current)
            if carry.beta != 0.0:
                for j in range(k + 1, len(dirs)):
                    dirs[j] = apply_rotation(carry, dirs[j], carry.beta)
    return current
