"""Zonotopes on SE(2): a group-valued center combined with an exponentiated
algebra-level error zonotope ``<0, H>``."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import se2
from .se2 import Se2Element
from .zonotope import DEFAULT_TOL, IntervalBox, Zonotope, contains, interval_hull


class Side(str, Enum):
    LEFT = "left"
    RIGHT = "right"


@dataclass(frozen=True)
class GroupZonotope:
    """``{center exp(hat(e))}`` (left) or ``{exp(hat(e)) center}`` (right)
    for ``e`` in ``<0, generators>``."""

    center: Se2Element
    generators: np.ndarray
    side: Side = Side.LEFT

    def __post_init__(self):
        generators = np.array(self.generators, dtype=float)
        if generators.size == 0:
            generators = np.zeros((3, 0))
        if generators.ndim != 2 or generators.shape[0] != 3:
            raise ValueError(f"generator matrix must be 3 x m, got {generators.shape}")
        generators.flags.writeable = False
        object.__setattr__(self, "generators", generators)
        object.__setattr__(self, "side", Side(self.side))

    @property
    def order(self) -> int:
        return self.generators.shape[1]

    def error_zonotope(self) -> Zonotope:
        return Zonotope.centered(self.generators)


@dataclass(frozen=True)
class StateBounds:
    """Per-step heading interval and axis-aligned position box."""

    theta: IntervalBox
    position: IntervalBox


def group_minkowski_member(x: Se2Element, y: Se2Element, side: Side | str) -> Se2Element:
    return se2.compose(x, y) if Side(side) is Side.LEFT else se2.compose(y, x)


def invariant_error(center: Se2Element, x: Se2Element, side: Side | str) -> Se2Element:
    """``center^-1 x`` (left) or ``x center^-1`` (right)."""
    inv = se2.inverse(center)
    return se2.compose(inv, x) if Side(side) is Side.LEFT else se2.compose(x, inv)


def contains_state(gz: GroupZonotope, x: Se2Element, tol: float = DEFAULT_TOL) -> bool:
    eps = se2.log_map(invariant_error(gz.center, x, gz.side))
    return contains(gz.error_zonotope(), eps, tol)


def state_from_coordinates(gz: GroupZonotope, xi) -> Se2Element:
    """Member of ``gz`` at hypercube coordinates ``xi``."""
    offset = se2.exp_map(gz.generators @ np.asarray(xi, dtype=float))
    return group_minkowski_member(gz.center, offset, gz.side)


def sample_state(gz: GroupZonotope, rng: np.random.Generator) -> Se2Element:
    return state_from_coordinates(gz, rng.uniform(-1.0, 1.0, gz.order))


def extract_bounds(gz: GroupZonotope) -> StateBounds:
    """Heading interval (exact) and first-order position box of a left
    group zonotope.

    The position box treats the left Jacobian as the identity, so the
    position set is approximated by ``x_hat + R(theta_hat) <0, H[1:3]>``.
    """
    if gz.side is not Side.LEFT:
        raise NotImplementedError("bound extraction is only defined for left group zonotopes")
    H = gz.generators
    half_width = np.abs(H[0]).sum()
    theta = IntervalBox([gz.center.theta - half_width], [gz.center.theta + half_width])
    rotated = gz.center.rotation() @ H[1:3]
    position = interval_hull(Zonotope(gz.center.x, rotated))
    return StateBounds(theta, position)
