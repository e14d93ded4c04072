"""Invariant zonotopic set-membership filter on SE(2).

The estimate is a group zonotope: a pose center plus a generator matrix of
the invariant error in se(2) coordinates. One :func:`update` call consumes the
measurement of the current pose, propagates the center, applies the
correction ``exp(hat(L z))`` on the chosen side and pushes the error
zonotope through the linearized invariant error dynamics.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from . import se2
from .gains import GainStrategy, observer_gain
from .group_zonotope import GroupZonotope, Side
from .se2 import Se2Element
from .zonotope import Zonotope, reduce_order

# output matrix of the alternative innovation in left-invariant coordinates
C_TILDE = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
C_TILDE.flags.writeable = False


DISCRETIZATIONS = ("euler", "exact")


class InnovationMode(str, Enum):
    STANDARD = "standard"
    ALTERNATIVE = "alternative"


def _readonly(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class SystemModel:
    """Sampling period and bounded-noise description of the vehicle.

    Process noise enters as ``exp(delta hat(d_w w))`` with ``w in <0, h_w>``;
    measurement noise as ``y = x + d_v v`` with ``v in <0, h_v>``.

    ``discretization`` selects the left error transition: ``"euler"`` uses
    ``I - delta ad(u)``, ``"exact"`` the adjoint of ``exp(-delta u)``.
    """

    delta: float = 0.01
    h_w: np.ndarray = field(default_factory=lambda: np.diag([0.1, 0.1, 0.1]))
    h_v: np.ndarray = field(default_factory=lambda: np.diag([1.0, 1.0]))
    d_w: np.ndarray = field(default_factory=lambda: np.eye(3))
    d_v: np.ndarray = field(default_factory=lambda: np.eye(2))
    innovation_mode: InnovationMode = InnovationMode.ALTERNATIVE
    discretization: str = "euler"

    def __post_init__(self):
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.discretization not in DISCRETIZATIONS:
            raise ValueError(f"discretization must be one of {DISCRETIZATIONS}")
        for name in ("h_w", "h_v", "d_w", "d_v"):
            object.__setattr__(self, name, _readonly(np.atleast_2d(getattr(self, name))))
        object.__setattr__(self, "innovation_mode", InnovationMode(self.innovation_mode))


@dataclass(frozen=True)
class InzsmfState:
    estimate: GroupZonotope
    step: int = 0
    reduction_threshold: int = 30
    reduction_ranking: str = "euclidean"

    @property
    def center(self) -> Se2Element:
        return self.estimate.center

    @property
    def generators(self) -> np.ndarray:
        return self.estimate.generators

    @property
    def side(self) -> Side:
        return self.estimate.side


@dataclass(frozen=True)
class ErrorLinearization:
    """Linear invariant-error model ``e' = (A - L C) e + process w - L meas v``."""

    a: np.ndarray
    c: np.ndarray
    process_map: np.ndarray
    measurement_map: np.ndarray


def initial_state(center: Se2Element, h0, side: Side | str = Side.LEFT,
                  reduction_threshold: int = 30, reduction_ranking: str = "euclidean") -> InzsmfState:
    h0 = np.asarray(h0, dtype=float)
    if h0.ndim == 1:
        h0 = np.diag(h0)
    return InzsmfState(GroupZonotope(center, h0, Side(side)), 0, reduction_threshold,
                       reduction_ranking)


def predict(state: InzsmfState, u, model: SystemModel) -> Se2Element:
    return se2.propagate(state.center, u, model.delta)


def innovation(state: InzsmfState, y, model: SystemModel) -> np.ndarray:
    """``y - x_hat`` (standard) or ``R(theta_hat)^T (y - x_hat)`` (alternative).

    The alternative form is the first two rows of ``X_hat^-1 [y; 1] - [0; 0; 1]``.
    """
    residual = np.asarray(y, dtype=float).reshape(2) - state.center.x
    if model.innovation_mode is InnovationMode.STANDARD:
        return residual
    return state.center.rotation().T @ residual


def linearize(u, center: Se2Element, model: SystemModel,
              side: Side | str = Side.LEFT) -> ErrorLinearization:
    side = Side(side)
    rot_t = center.rotation().T
    if side is Side.LEFT:
        if model.discretization == "exact":
            a = se2.adjoint_group(se2.exp_map(-model.delta * np.asarray(u, dtype=float)))
        else:
            a = np.eye(3) - model.delta * se2.adjoint_ad(u)
        process = model.delta * model.d_w
        if model.innovation_mode is InnovationMode.ALTERNATIVE:
            return ErrorLinearization(a, C_TILDE, process, rot_t @ model.d_v)
        return ErrorLinearization(a, center.rotation() @ C_TILDE, process, model.d_v)
    # right-invariant error: the noise-free error is constant, process noise is
    # carried to the world frame by the adjoint of the predicted pose
    a = np.eye(3)
    predicted = se2.propagate(center, u, model.delta)
    process = model.delta * se2.adjoint_group(predicted) @ model.d_w
    x1, x2 = center.x
    c_std = np.array([[-x2, 1.0, 0.0], [x1, 0.0, 1.0]])
    if model.innovation_mode is InnovationMode.ALTERNATIVE:
        return ErrorLinearization(a, rot_t @ c_std, process, rot_t @ model.d_v)
    return ErrorLinearization(a, c_std, process, model.d_v)


def update(state: InzsmfState, u, y, model: SystemModel,
           strategy: GainStrategy) -> InzsmfState:
    u = np.asarray(u, dtype=float)
    reduced = reduce_order(Zonotope.centered(state.generators), state.reduction_threshold,
                           state.reduction_ranking)
    h_bar = reduced.generators
    lin = linearize(u, state.center, model, state.side)
    gain = observer_gain(strategy, lin.a, lin.c, h_bar, lin.measurement_map, model.h_v)
    correction = se2.exp_map(gain @ innovation(state, y, model))
    predicted = predict(state, u, model)
    if state.side is Side.LEFT:
        center = se2.compose(predicted, correction)
    else:
        center = se2.compose(correction, predicted)
    generators = np.hstack([
        (lin.a - gain @ lin.c) @ h_bar,
        lin.process_map @ model.h_w,
        -gain @ lin.measurement_map @ model.h_v,
    ])
    return replace(state, estimate=GroupZonotope(center, generators, state.side), step=state.step + 1)
