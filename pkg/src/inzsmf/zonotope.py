"""Euclidean zonotope calculus.

A zonotope ``<p, H>`` is the set ``{p + H z : z in [-1, 1]^m}``. Every
operation here is a pure function on immutable values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

DEFAULT_TOL = 1e-9
_ROUNDING = 1e-12  # relative slack on the zonotope norm for floating point


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Zonotope:
    """Center vector plus ``d x m`` generator matrix."""

    center: np.ndarray
    generators: np.ndarray

    def __post_init__(self):
        center = np.asarray(self.center, dtype=float).reshape(-1)
        generators = np.asarray(self.generators, dtype=float)
        if generators.size == 0:
            generators = np.zeros((center.size, 0))
        elif generators.ndim == 1:
            generators = generators.reshape(-1, 1)
        if generators.ndim != 2 or generators.shape[0] != center.size:
            raise ValueError(
                f"generator matrix has shape {generators.shape}, "
                f"expected ({center.size}, m)"
            )
        object.__setattr__(self, "center", _frozen(center))
        object.__setattr__(self, "generators", _frozen(generators))

    @property
    def dim(self) -> int:
        return self.center.size

    @property
    def order(self) -> int:
        return self.generators.shape[1]

    @classmethod
    def singleton(cls, point) -> "Zonotope":
        point = np.asarray(point, dtype=float).reshape(-1)
        return cls(point, np.zeros((point.size, 0)))

    @classmethod
    def centered(cls, generators) -> "Zonotope":
        generators = np.atleast_2d(np.asarray(generators, dtype=float))
        return cls(np.zeros(generators.shape[0]), generators)


@dataclass(frozen=True)
class IntervalBox:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=float).reshape(-1)
        upper = np.asarray(self.upper, dtype=float).reshape(-1)
        if lower.shape != upper.shape:
            raise ValueError("lower and upper bounds differ in dimension")
        if np.any(lower > upper):
            raise ValueError("interval box has lower > upper")
        object.__setattr__(self, "lower", _frozen(lower))
        object.__setattr__(self, "upper", _frozen(upper))

    @property
    def widths(self) -> np.ndarray:
        return self.upper - self.lower

    def contains(self, x, tol: float = 0.0) -> bool:
        x = np.asarray(x, dtype=float).reshape(-1)
        return bool(np.all(x >= self.lower - tol) and np.all(x <= self.upper + tol))


def _check_dim(expected: int, got: int, what: str) -> None:
    if expected != got:
        raise ValueError(f"{what}: dimension mismatch ({expected} vs {got})")


def minkowski_sum(a: Zonotope, b: Zonotope) -> Zonotope:
    _check_dim(a.dim, b.dim, "minkowski_sum")
    return Zonotope(a.center + b.center, np.hstack([a.generators, b.generators]))


def linear_map(l, z: Zonotope) -> Zonotope:
    l = np.atleast_2d(np.asarray(l, dtype=float))
    _check_dim(l.shape[1], z.dim, "linear_map")
    return Zonotope(l @ z.center, l @ z.generators)


RANKINGS = ("euclidean", "girard")


def column_ranking_key(H: np.ndarray, ranking: str = "euclidean") -> np.ndarray:
    """Per-column score; larger scores are kept first during reduction.

    ``girard`` scores a column by ``|h|_1 - |h|_inf``, the extra volume its
    boxing would add, so nearly axis-aligned columns are boxed first.
    """
    if ranking == "euclidean":
        return np.linalg.norm(H, axis=0)
    if ranking == "girard":
        a = np.abs(H)
        return a.sum(axis=0) - a.max(axis=0, initial=0.0)
    raise ValueError(f"unknown ranking {ranking!r}, expected one of {RANKINGS}")


def reduce_order(z: Zonotope, s: int, ranking: str = "euclidean") -> Zonotope:
    """Over-approximate ``z`` by a zonotope with at most ``s`` generators.

    Columns are ranked by Euclidean norm by default (ties keep their
    original order). The ``s - d`` highest ranked are kept and the remainder
    is boxed into a ``d x d`` diagonal block of absolute row sums.
    """
    d = z.dim
    if s <= d:
        raise ValueError(f"reduction order s={s} must exceed the dimension d={d}")
    if z.order <= s:
        return z
    H = z.generators
    idx = np.argsort(-column_ranking_key(H, ranking), kind="stable")
    H = H[:, idx]
    kept = H[:, : s - d]
    boxed = np.diag(np.abs(H[:, s - d :]).sum(axis=1))
    return Zonotope(z.center, np.hstack([kept, boxed]))


def f_radius(z: Zonotope) -> float:
    return float(np.linalg.norm(z.generators, "fro"))


def covariance(z: Zonotope) -> np.ndarray:
    return z.generators @ z.generators.T


def interval_hull(z: Zonotope) -> IntervalBox:
    r = np.abs(z.generators).sum(axis=1)
    return IntervalBox(z.center - r, z.center + r)


def sample(z: Zonotope, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Draw ``p + H xi`` with ``xi`` uniform on the generator hypercube.

    Returns a ``(d,)`` vector, or ``(size, d)`` when ``size`` is given.
    """
    if size is None:
        xi = rng.uniform(-1.0, 1.0, z.order)
        return z.center + z.generators @ xi
    xi = rng.uniform(-1.0, 1.0, (size, z.order))
    return z.center + xi @ z.generators.T


# -- membership -------------------------------------------------------------


def _facet_normals(H: np.ndarray) -> np.ndarray | None:
    """Unit candidate facet normals of a full-dimensional zonotope, d <= 3."""
    d = H.shape[0]
    if d == 1:
        return np.ones((1, 1))
    if d == 2:
        size = np.hypot(H[0], H[1])
        keep = size > 0.0  # drops columns whose squares underflow
        return np.column_stack([-H[1], H[0]])[keep] / size[keep, None] if np.any(keep) else None
    if d == 3:
        i, j = np.triu_indices(H.shape[1], k=1)
        normals = np.cross(H[:, i].T, H[:, j].T)
        size = np.linalg.norm(normals, axis=1)
        lengths = np.linalg.norm(H, axis=0)
        # parallel column pairs span no facet
        keep = size > 1e-12 * lengths[i] * lengths[j]
        return normals[keep] / size[keep, None] if np.any(keep) else None
    return None


def _norm_by_facets(H: np.ndarray, b: np.ndarray) -> np.ndarray | None:
    """Zonotope norm of each column of ``b`` by the support ratio over facets."""
    normals = _facet_normals(H)
    if normals is None:
        return None
    support = np.abs(normals @ H).sum(axis=1)
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        ratio = np.abs(normals @ b) / support[:, None]
    return np.nan_to_num(ratio, nan=0.0).max(axis=0)


def _norm_by_lp(H: np.ndarray, b: np.ndarray) -> float:
    d, m = H.shape
    # the norm is scale free; HiGHS tolerances are absolute
    scale = np.abs(H).max()
    H, b = H / scale, b / scale
    cost = np.zeros(m + 1)
    cost[-1] = 1.0
    eye = np.eye(m)
    ones = np.ones((m, 1))
    a_ub = np.vstack([np.hstack([eye, -ones]), np.hstack([-eye, -ones])])
    a_eq = np.hstack([H, np.zeros((d, 1))])
    res = linprog(
        cost,
        A_ub=a_ub,
        b_ub=np.zeros(2 * m),
        A_eq=a_eq,
        b_eq=b,
        bounds=[(None, None)] * m + [(0, None)],
        method="highs",
    )
    if res.status == 2:
        return np.inf
    if not res.success:
        raise RuntimeError(f"membership LP failed: {res.message}")
    return float(res.fun)


def zonotope_norm(z: Zonotope, x, method: str = "auto") -> float:
    """Smallest ``max|xi|`` with ``center + H xi == x`` (``inf`` if none).

    ``method`` is ``"lp"`` (linear program), ``"facets"`` (exact support
    ratio over facet normals, needs full-rank generators and d <= 3) or
    ``"auto"`` (facets when applicable, LP otherwise).
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    _check_dim(z.dim, x.size, "zonotope_norm")
    b = x - z.center
    H = z.generators[:, np.any(z.generators != 0.0, axis=0)]
    if H.shape[1] == 0:
        return 0.0 if not np.any(b) else np.inf
    if method not in ("auto", "lp", "facets"):
        raise ValueError(f"unknown method {method!r}")
    if method != "lp" and np.linalg.matrix_rank(H) == z.dim:
        value = _norm_by_facets(H, b[:, None])
        if value is not None:
            return float(value[0])
    if method == "facets":
        raise ValueError("facet method needs full-rank generators and dim <= 3")
    return _norm_by_lp(H, b)


def _inflate(H: np.ndarray, tol: float) -> np.ndarray:
    # points within max-norm distance tol of <0, H> form the zonotope <0, [H, tol I]>
    H = H[:, np.any(H != 0.0, axis=0)]
    return np.hstack([H, tol * np.eye(H.shape[0])]) if tol > 0 else H


def contains(z: Zonotope, x, tol: float = DEFAULT_TOL, method: str = "auto") -> bool:
    """True iff some ``xi`` in ``[-1, 1]^m`` has ``|center + H xi - x|_inf <= tol``."""
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    x = np.asarray(x, dtype=float).reshape(-1)
    _check_dim(z.dim, x.size, "contains")
    b = x - z.center
    # cheap rejection before solving anything
    if np.any(np.abs(b) > np.abs(z.generators).sum(axis=1) * (1 + _ROUNDING) + tol):
        return False
    H = _inflate(z.generators, tol)
    if H.shape[1] == 0:
        return True
    return zonotope_norm(Zonotope(np.zeros(z.dim), H), b, method) <= 1.0 + _ROUNDING


def contains_many(z: Zonotope, points, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Vectorized :func:`contains` for an ``(n, d)`` array of points."""
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    _check_dim(z.dim, pts.shape[1], "contains_many")
    H = _inflate(z.generators, tol)
    b = (pts - z.center).T
    if H.shape[1] == 0:
        return ~np.any(b, axis=0)
    norms = _norm_by_facets(H, b) if np.linalg.matrix_rank(H) == z.dim else None
    if norms is None:
        return np.array([contains(z, p, tol) for p in pts], dtype=bool)
    return norms <= 1.0 + _ROUNDING
