"""Observer gain design: pole configuration and F-radius optimal gains."""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import linear_sum_assignment, minimize, minimize_scalar

PLACEMENT_TOL = 1e-8
_POLE_MERGE_TOL = 1e-10
_MAX_COND = 1e10


class GainDesignError(ValueError):
    pass


class UnobservableError(GainDesignError):
    pass


@dataclass(frozen=True)
class PoleConfiguration:
    poles: tuple

    def __post_init__(self):
        poles = tuple(complex(p) if complex(p).imag else float(complex(p).real) for p in self.poles)
        if not poles:
            raise ValueError("at least one pole is required")
        if any(abs(p) >= 1.0 for p in poles):
            raise ValueError(f"all poles must lie strictly inside the unit circle: {poles}")
        object.__setattr__(self, "poles", poles)


@dataclass(frozen=True)
class FRadiusOptimal:
    pass


GainStrategy = Union[PoleConfiguration, FRadiusOptimal]


def spectral_radius(m) -> float:
    m = np.atleast_2d(np.asarray(m, dtype=float))
    if m.shape[0] != m.shape[1]:
        raise ValueError("spectral radius needs a square matrix")
    return float(np.max(np.abs(np.linalg.eigvals(m))))


def observability_matrix(a, c) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    c = np.atleast_2d(np.asarray(c, dtype=float))
    blocks = [c]
    for _ in range(a.shape[0] - 1):
        blocks.append(blocks[-1] @ a)
    return np.vstack(blocks)


def is_observable(a, c) -> bool:
    return np.linalg.matrix_rank(observability_matrix(a, c)) == np.asarray(a).shape[0]


def match_poles(eigenvalues, poles) -> float:
    """Largest distance under the best one-to-one pairing of two pole sets."""
    eigenvalues = np.asarray(eigenvalues, dtype=complex)
    poles = np.asarray(poles, dtype=complex)
    if eigenvalues.size != poles.size:
        return np.inf
    cost = np.abs(eigenvalues[:, None] - poles[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max())


# -- pole placement -------------------------------------------------------


def _group_poles(poles) -> list[tuple[complex, int]]:
    remaining = [complex(p) for p in poles]
    groups = []
    while remaining:
        lam = remaining.pop(0)
        tol = _POLE_MERGE_TOL * max(1.0, abs(lam))
        same = [p for p in remaining if abs(p - lam) <= tol]
        for p in same:
            remaining.remove(p)
        if abs(lam.imag) <= tol:
            lam = complex(lam.real, 0.0)
        groups.append((lam, 1 + len(same)))
    for lam, mult in groups:
        if lam.imag == 0.0:
            continue
        tol = _POLE_MERGE_TOL * max(1.0, abs(lam))
        partners = [m for mu, m in groups if abs(mu - lam.conjugate()) <= tol]
        if partners != [mult]:
            raise GainDesignError(f"poles are not closed under conjugation: {lam} lacks a partner")
    return [(lam, m) for lam, m in groups if lam.imag >= 0.0]


class _EigenstructureFamily:
    """All gains placing the requested poles with a diagonalizable closed
    loop, parametrized by eigenvector coordinates inside each pole's
    admissible subspace (dual controllability problem on ``(A^T, C^T)``)."""

    def __init__(self, a: np.ndarray, c: np.ndarray, poles):
        n, q = a.shape[0], c.shape[0]
        self.n, self.q = n, q
        self.blocks = []  # (basis, is_complex, n_free, n_fixed_columns)
        self.n_params = 0
        columns = 0
        for lam, mult in _group_poles(poles):
            if mult > q:
                raise GainDesignError(
                    f"pole {lam} repeated {mult} times but only {q} outputs are available"
                )
            cplx = lam.imag != 0.0
            shift = lam if cplx else lam.real
            basis = null_space(np.hstack([a.T - shift * np.eye(n), -c.T]))
            if basis.shape[1] != q:
                raise UnobservableError(f"pole {lam} cannot be assigned (rank defect)")
            free = 0 if mult == q else mult
            if free:
                self.n_params += free * (2 * q if cplx else (1 if q == 2 else q))
            self.blocks.append((basis, cplx, free))
            columns += mult * (2 if cplx else 1)
        if columns != n:
            raise GainDesignError(f"{columns} poles supplied for a system of order {n}")

    def gains(self, params: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Batch of gains ``(G, n, q)`` and a validity mask for ``(G, p)`` params."""
        params = np.atleast_2d(params)
        g = params.shape[0]
        n, q = self.n, self.q
        v_cols, w_cols = [], []
        k = 0
        for basis, cplx, free in self.blocks:
            if not free:
                coeffs = [np.broadcast_to(np.eye(q)[j], (g, q)) for j in range(q)]
            elif cplx:
                coeffs = []
                for _ in range(free):
                    coeffs.append(params[:, k : k + q] + 1j * params[:, k + q : k + 2 * q])
                    k += 2 * q
            elif q == 2:
                coeffs = []
                for _ in range(free):
                    phi = params[:, k]
                    coeffs.append(np.column_stack([np.cos(phi), np.sin(phi)]))
                    k += 1
            else:
                coeffs = []
                for _ in range(free):
                    coeffs.append(params[:, k : k + q])
                    k += q
            for coeff in coeffs:
                vw = coeff @ basis.T
                if cplx:
                    v_cols += [vw[:, :n].real, vw[:, :n].imag]
                    w_cols += [vw[:, n:].real, vw[:, n:].imag]
                else:
                    v_cols.append(vw[:, :n].real)
                    w_cols.append(vw[:, n:].real)
        V = np.stack(v_cols, axis=2)
        W = np.stack(w_cols, axis=2)
        cond = np.linalg.cond(V)
        ok = np.isfinite(cond) & (cond < _MAX_COND)
        V = np.where(ok[:, None, None], V, np.eye(n))
        # closed loop A^T - C^T K has eigenvectors V when K V = W; L = K^T
        L = np.linalg.solve(np.transpose(V, (0, 2, 1)), np.transpose(W, (0, 2, 1)))
        return L, ok

    def cost(self, params: np.ndarray) -> np.ndarray:
        L, ok = self.gains(params)
        norms = np.einsum("gij,gij->g", L, L)
        return np.where(ok, norms, np.inf)


def _minimum_norm_params(family: _EigenstructureFamily, rng: np.random.Generator) -> np.ndarray:
    p = family.n_params
    if p == 0:
        return np.zeros((1, 0))
    if p == 1 and family.q == 2:
        grid = np.linspace(0.0, np.pi, 181)
        costs = family.cost(grid[:, None])
        best = int(np.argmin(costs))
        step = grid[1] - grid[0]
        res = minimize_scalar(
            lambda phi: family.cost(np.array([[phi]]))[0],
            bounds=(grid[best] - step, grid[best] + step),
            method="bounded",
            options={"xatol": 1e-12},
        )
        phi = res.x if res.fun <= costs[best] else grid[best]
        return np.array([[phi]])
    starts = rng.uniform(-np.pi, np.pi, (256, p))
    costs = family.cost(starts)
    best_x, best_f = None, np.inf
    for i in np.argsort(costs)[:4]:
        if not np.isfinite(costs[i]):
            continue
        res = minimize(lambda x: family.cost(x[None, :])[0], starts[i], method="Nelder-Mead",
                       options={"xatol": 1e-7, "fatol": 1e-12, "maxiter": 4000})
        if res.fun < best_f:
            best_x, best_f = res.x, res.fun
    if best_x is None:
        raise GainDesignError("no well-conditioned eigenvector configuration found")
    return best_x[None, :]


@functools.lru_cache(maxsize=256)
def _place_cached(a_bytes, a_shape, c_bytes, c_shape, poles) -> np.ndarray:
    a = np.frombuffer(a_bytes).reshape(a_shape)
    c = np.frombuffer(c_bytes).reshape(c_shape)
    if not is_observable(a, c):
        raise UnobservableError("(A, C) is not observable")
    family = _EigenstructureFamily(a, c, poles)
    params = _minimum_norm_params(family, np.random.default_rng(0))
    L, ok = family.gains(params)
    if not ok[0]:
        raise GainDesignError("closed-loop eigenvector matrix is singular")
    L = L[0]
    err = match_poles(np.linalg.eigvals(a - L @ c), poles)
    if err > PLACEMENT_TOL:
        raise GainDesignError(f"placed eigenvalues miss the requested poles by {err:.3g}")
    L.flags.writeable = False
    return L


def pole_placement_gain(a, c, poles) -> np.ndarray:
    """Gain ``L`` such that ``eig(A - L C)`` equals ``poles``.

    Among all placements with a diagonalizable closed loop, the one with the
    smallest Frobenius norm is returned. Identical requests are cached.
    """
    a = np.ascontiguousarray(a, dtype=float)
    c = np.ascontiguousarray(np.atleast_2d(c), dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or c.shape[1] != a.shape[0]:
        raise ValueError(f"incompatible shapes A{a.shape}, C{c.shape}")
    key = tuple(complex(p) for p in poles)
    return _place_cached(a.tobytes(), a.shape, c.tobytes(), c.shape, key).copy()


# -- F-radius optimal gain ------------------------------------------------


def _p_bar(h_reduced) -> np.ndarray:
    h = np.atleast_2d(np.asarray(h_reduced, dtype=float))
    return h @ h.T


def _noise_cov(d, h) -> np.ndarray:
    d = np.atleast_2d(np.asarray(d, dtype=float))
    h = np.atleast_2d(np.asarray(h, dtype=float))
    return d @ h @ h.T @ d.T


def f_radius_optimal_gain(a, c, h_reduced, d_v, h_v) -> np.ndarray:
    """``L* = A P C^T (C P C^T + Q_v)^-1`` with ``P = H H^T`` of the reduced generator."""
    a = np.asarray(a, dtype=float)
    c = np.atleast_2d(np.asarray(c, dtype=float))
    p = _p_bar(h_reduced)
    s = c @ p @ c.T + _noise_cov(d_v, h_v)
    if np.linalg.cond(s) > 1e12:
        raise GainDesignError("innovation matrix S is singular; check the measurement-noise model")
    return np.linalg.solve(s, (a @ p @ c.T).T).T


def f_radius_cost(l, a, c, h_reduced, d_w, h_w, d_v, h_v) -> float:
    """Squared F-radius of the next error zonotope produced by gain ``l``."""
    l = np.atleast_2d(np.asarray(l, dtype=float))
    closed = np.asarray(a, dtype=float) - l @ np.atleast_2d(c)
    p = _p_bar(h_reduced)
    total = closed @ p @ closed.T + _noise_cov(d_w, h_w) + l @ _noise_cov(d_v, h_v) @ l.T
    return float(np.trace(total))


def f_radius_gradient(l, a, c, h_reduced, d_v, h_v) -> np.ndarray:
    l = np.atleast_2d(np.asarray(l, dtype=float))
    c = np.atleast_2d(np.asarray(c, dtype=float))
    p = _p_bar(h_reduced)
    return -2.0 * np.asarray(a) @ p @ c.T + 2.0 * l @ (c @ p @ c.T + _noise_cov(d_v, h_v))


def observer_gain(strategy: GainStrategy, a, c, h_reduced, d_v, h_v) -> np.ndarray:
    if isinstance(strategy, PoleConfiguration):
        return pole_placement_gain(a, c, strategy.poles)
    if isinstance(strategy, FRadiusOptimal):
        return f_radius_optimal_gain(a, c, h_reduced, d_v, h_v)
    raise TypeError(f"unknown gain strategy {strategy!r}")
