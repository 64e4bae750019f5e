"""Blending weights across obstacles, tree components and hulls."""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .errors import AllBoundariesViolated

WEIGHT_MODES = ("absolute", "literal")


def _share_infinite(raw: np.ndarray) -> np.ndarray | None:
    hits = np.isinf(raw)
    if hits.any():
        return hits / hits.sum()
    return None


def _check_mode(mode: str) -> None:
    if mode not in WEIGHT_MODES:
        raise ValueError(f"unknown weight mode {mode!r}; expected one of {WEIGHT_MODES}")


def distance_weights(gammas: Sequence[float], mode: str = "absolute", relative: bool = False) -> np.ndarray:
    """Obstacle weights from distance values.

    In ``absolute`` mode the raw weight is ``1 / (gamma - 1)``: it vanishes far
    away, diverges on the surface, and the weights are normalised only when
    their sum exceeds one.  ``relative`` always normalises (as long as any
    weight is positive).  ``literal`` uses ``1 / gamma`` and always normalises.
    """
    _check_mode(mode)
    g = np.asarray(gammas, dtype=float)
    if g.size == 0:
        return g
    if mode == "literal":
        raw = np.where(g <= 0.0, math.inf, 1.0 / np.where(g <= 0.0, 1.0, g))
        shared = _share_infinite(raw)
        if shared is not None:
            return shared
        total = raw.sum()
        return raw / total if total > 0 else raw
    with np.errstate(divide="ignore"):
        raw = np.where(g <= 1.0, math.inf, 1.0 / (g - 1.0))
    shared = _share_infinite(raw)
    if shared is not None:
        return shared
    total = raw.sum()
    if total > 1.0 or (relative and total > 0.0):
        return raw / total
    return raw


def obstacle_weights(gammas: Sequence[float], mode: str = "absolute") -> np.ndarray:
    """Per-obstacle weights summing to at most one; an obstacle on its surface gets one."""
    return distance_weights(gammas, mode=mode, relative=False)


def normalized_mapping_weights(weights: Sequence[float], mode: str = "absolute") -> np.ndarray:
    """Spread mapping weights so that a component on its surface dominates.

    ``absolute`` maps ``w`` to ``w / (1 - w)``; ``literal`` to ``1 / (1 - w)``.
    The results are normalised when their sum exceeds one.
    """
    _check_mode(mode)
    w = np.asarray(weights, dtype=float)
    if w.size == 0:
        return w
    with np.errstate(divide="ignore"):
        if mode == "absolute":
            raw = np.where(w >= 1.0, math.inf, w / (1.0 - w))
        else:
            raw = np.where(w >= 1.0, math.inf, 1.0 / (1.0 - w))
    shared = _share_infinite(raw)
    if shared is not None:
        return shared
    total = raw.sum()
    return raw / total if total > 1.0 else raw


def boundary_weights(gammas: Sequence[float]) -> np.ndarray:
    """Weights of overlapping hulls; a hull fades out as the point reaches its surface."""
    g = np.asarray(gammas, dtype=float)
    excess = np.maximum(g, 1.0) - 1.0
    if not np.any(excess > 0):
        raise AllBoundariesViolated("position lies outside every hull")
    shared = _share_infinite(excess)
    if shared is not None:
        return shared
    return excess / excess.sum()


def compose_moving_frame(static_result: np.ndarray, velocities: Sequence[np.ndarray], weights: Sequence[float]) -> np.ndarray:
    """Add the weighted obstacle velocities back onto a velocity avoided in the relative frame."""
    out = np.array(static_result, dtype=float)
    for w, u in zip(weights, velocities):
        if w != 0.0:
            out = out + w * np.asarray(u, dtype=float)
    return out
