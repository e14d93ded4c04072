"""Euclidean zonotopic set-membership filter for the planar vehicle.

The state vector is ``[theta, x1, x2]`` and the control ``[omega, v, 0]``;
the transition is the explicit Euler step of the unicycle kinematics.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .gains import GainStrategy, observer_gain
from .group_zonotope import StateBounds
from .invariant import SystemModel
from .zonotope import IntervalBox, Zonotope, interval_hull, reduce_order

C_POSITION = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
C_POSITION.flags.writeable = False


def transition(x, u, w, delta: float) -> np.ndarray:
    """One Euler step of the vehicle with process noise ``w = [w_theta, w_l, w_tr]``."""
    theta, x1, x2 = np.asarray(x, dtype=float)
    omega, v = float(u[0]), float(u[1])
    w_theta, w_l, w_tr = np.asarray(w, dtype=float)
    c, s = np.cos(theta), np.sin(theta)
    return np.array([
        theta + (omega + w_theta) * delta,
        x1 + c * (v + w_l) * delta - s * w_tr * delta,
        x2 + s * (v + w_l) * delta + c * w_tr * delta,
    ])


@dataclass(frozen=True)
class ZsmfState:
    center: np.ndarray
    generators: np.ndarray
    step: int = 0
    reduction_threshold: int = 30
    reduction_ranking: str = "euclidean"

    def __post_init__(self):
        z = Zonotope(self.center, self.generators)
        if z.dim != 3:
            raise ValueError("ZSMF state must be three-dimensional")
        object.__setattr__(self, "center", z.center)
        object.__setattr__(self, "generators", z.generators)

    def zonotope(self) -> Zonotope:
        return Zonotope(self.center, self.generators)


def initial_state(center, h0, reduction_threshold: int = 30,
                  reduction_ranking: str = "euclidean") -> ZsmfState:
    h0 = np.asarray(h0, dtype=float)
    if h0.ndim == 1:
        h0 = np.diag(h0)
    return ZsmfState(np.asarray(center, dtype=float), h0, 0, reduction_threshold, reduction_ranking)


def linearize_euclidean(x_hat, u, model: SystemModel) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Jacobians of the Euler step w.r.t. state and process noise at ``w = 0``."""
    theta = float(np.asarray(x_hat)[0])
    v, delta = float(u[1]), model.delta
    c, s = np.cos(theta), np.sin(theta)
    a = np.array([[1.0, 0.0, 0.0], [-s * v * delta, 1.0, 0.0], [c * v * delta, 0.0, 1.0]])
    d_wk = np.array([[delta, 0.0, 0.0], [0.0, c * delta, -s * delta], [0.0, s * delta, c * delta]])
    return a, d_wk, C_POSITION


def step_zsmf(state: ZsmfState, u, y, model: SystemModel, strategy: GainStrategy) -> ZsmfState:
    """Predict with the noise-free Euler step and correct with the
    innovation of the current measurement, ``y_k - C x_hat_k``."""
    u = np.asarray(u, dtype=float)
    h_bar = reduce_order(state.zonotope(), state.reduction_threshold,
                         state.reduction_ranking).generators
    a, d_wk, c = linearize_euclidean(state.center, u, model)
    gain = observer_gain(strategy, a, c, h_bar, model.d_v, model.h_v)
    z = np.asarray(y, dtype=float).reshape(2) - c @ state.center
    center = transition(state.center, u, np.zeros(3), model.delta) + gain @ z
    generators = np.hstack([
        (a - gain @ c) @ h_bar,
        d_wk @ model.d_w @ model.h_w,
        -gain @ model.d_v @ model.h_v,
    ])
    return replace(state, center=center, generators=generators, step=state.step + 1)


def extract_bounds(state: ZsmfState) -> StateBounds:
    hull = interval_hull(state.zonotope())
    return StateBounds(
        IntervalBox(hull.lower[:1], hull.upper[:1]),
        IntervalBox(hull.lower[1:], hull.upper[1:]),
    )
