"""SE(2) poses and se(2) tangent vectors.

Tangent vectors are plain ``(3,)`` arrays laid out as ``[sigma, u1, u2]``
(rotation first). Poses keep the heading unwrapped; wrapping only happens
when metrics are computed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

SMALL_ANGLE = 1e-6
_STRUCTURE_TOL = 1e-12


class BranchError(ValueError):
    """Rotation angle outside the principal branch of the logarithm."""


def rotation(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def wrap_angle(angle):
    """Wrap to (-pi, pi]."""
    wrapped = np.mod(np.asarray(angle, dtype=float) + np.pi, 2.0 * np.pi) - np.pi
    wrapped = np.where(wrapped == -np.pi, np.pi, wrapped)
    return wrapped if wrapped.ndim else float(wrapped)


@dataclass(frozen=True)
class Se2Element:
    """A planar pose: heading ``theta`` (rad) and position ``x`` (m)."""

    theta: float
    x: np.ndarray

    def __post_init__(self):
        x = np.array(self.x, dtype=float).reshape(2)
        x.flags.writeable = False
        object.__setattr__(self, "theta", float(self.theta))
        object.__setattr__(self, "x", x)

    @classmethod
    def identity(cls) -> "Se2Element":
        return cls(0.0, np.zeros(2))

    @classmethod
    def from_vector(cls, state) -> "Se2Element":
        """From ``[theta, x1, x2]``."""
        state = np.asarray(state, dtype=float)
        return cls(state[0], state[1:3])

    @classmethod
    def from_matrix(cls, m) -> "Se2Element":
        m = np.asarray(m, dtype=float)
        return cls(np.arctan2(m[1, 0], m[0, 0]), m[:2, 2])

    def rotation(self) -> np.ndarray:
        return rotation(self.theta)

    def matrix(self) -> np.ndarray:
        m = np.eye(3)
        m[:2, :2] = self.rotation()
        m[:2, 2] = self.x
        return m

    def as_vector(self) -> np.ndarray:
        return np.array([self.theta, self.x[0], self.x[1]])


def hat(v) -> np.ndarray:
    sigma, u1, u2 = np.asarray(v, dtype=float).reshape(3)
    return np.array([[0.0, -sigma, u1], [sigma, 0.0, u2], [0.0, 0.0, 0.0]])


def vee(m) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.shape != (3, 3):
        raise ValueError(f"expected a 3x3 matrix, got shape {m.shape}")
    scale = max(1.0, float(np.abs(m).max()))
    if np.any(np.abs(m[2]) > _STRUCTURE_TOL * scale):
        raise ValueError("not an se(2) element: bottom row must be zero")
    block = m[:2, :2]
    if np.any(np.abs(np.diag(block)) > _STRUCTURE_TOL * scale) or abs(
        block[0, 1] + block[1, 0]
    ) > _STRUCTURE_TOL * scale:
        raise ValueError("not an se(2) element: rotation block must be skew-symmetric")
    return np.array([m[1, 0], m[0, 2], m[1, 2]])


def left_jacobian(sigma: float) -> np.ndarray:
    """The ``V(sigma)`` map taking translation coordinates to position."""
    if abs(sigma) < SMALL_ANGLE:
        a = 1.0 - sigma**2 / 6.0
        b = sigma / 2.0
    else:
        a = np.sin(sigma) / sigma
        # 1 - cos(s) = 2 sin^2(s/2) avoids cancellation for small s
        b = 2.0 * np.sin(sigma / 2.0) ** 2 / sigma
    return np.array([[a, -b], [b, a]])


def left_jacobian_inv(sigma: float) -> np.ndarray:
    half = sigma / 2.0
    if abs(sigma) < SMALL_ANGLE:
        a = 1.0 - sigma**2 / 12.0
    else:
        a = half / np.tan(half)
    return np.array([[a, half], [-half, a]])


def exp_map(v) -> Se2Element:
    sigma, u1, u2 = np.asarray(v, dtype=float).reshape(3)
    return Se2Element(sigma, left_jacobian(sigma) @ np.array([u1, u2]))


def log_map(g: Se2Element) -> np.ndarray:
    if abs(g.theta) >= np.pi:
        raise BranchError(f"heading {g.theta} outside the principal branch (-pi, pi)")
    u = left_jacobian_inv(g.theta) @ g.x
    return np.array([g.theta, u[0], u[1]])


def compose(a: Se2Element, b: Se2Element) -> Se2Element:
    return Se2Element(a.theta + b.theta, a.x + a.rotation() @ b.x)


def inverse(g: Se2Element) -> Se2Element:
    return Se2Element(-g.theta, -(g.rotation().T @ g.x))


def adjoint_ad(v) -> np.ndarray:
    """Matrix of the Lie bracket action ``ad_v`` on se(2) coordinates."""
    sigma, u1, u2 = np.asarray(v, dtype=float).reshape(3)
    return np.array([[0.0, 0.0, 0.0], [u2, 0.0, -sigma], [-u1, sigma, 0.0]])


def adjoint_group(g: Se2Element) -> np.ndarray:
    """``Ad_g`` with ``hat(Ad_g v) == g hat(v) g^-1``."""
    out = np.eye(3)
    out[1:, 1:] = g.rotation()
    out[1, 0] = g.x[1]
    out[2, 0] = -g.x[0]
    return out


def propagate(x: Se2Element, u, delta: float) -> Se2Element:
    """Noise-free vehicle transition ``x exp(delta hat(u))``."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    return compose(x, exp_map(delta * np.asarray(u, dtype=float)))


Transition = Callable[[Se2Element, np.ndarray, float], Se2Element]


def group_affine_residual(
    x1: Se2Element,
    x2: Se2Element,
    u,
    delta: float,
    transition: Transition = propagate,
) -> float:
    """Frobenius norm of ``f(x1 x2) - f(x1) f(I)^-1 f(x2)`` in matrix form."""
    lhs = transition(compose(x1, x2), u, delta).matrix()
    f_identity = transition(Se2Element.identity(), u, delta).matrix()
    rhs = (
        transition(x1, u, delta).matrix()
        @ np.linalg.inv(f_identity)
        @ transition(x2, u, delta).matrix()
    )
    return float(np.linalg.norm(lhs - rhs, "fro"))
