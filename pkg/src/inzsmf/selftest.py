"""Quick numerical self checks, run by ``inzsmf selftest``.

Each check is small enough that the whole set runs in a few seconds. The
pytest suite covers the same ground with far more samples.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import bench, gains, invariant, se2
from .group_zonotope import Side
from .se2 import Se2Element
from .zonotope import Zonotope, contains, covariance, f_radius, minkowski_sum, reduce_order, sample


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float


def _random_zonotope(rng, d, m) -> Zonotope:
    return Zonotope(rng.normal(size=d), rng.normal(size=(d, m)))


def check_minkowski(rng) -> tuple[bool, str]:
    a, b = _random_zonotope(rng, 3, 4), _random_zonotope(rng, 3, 3)
    s = minkowski_sum(a, b)
    pts = sample(a, rng, 200) + sample(b, rng, 200)
    bad = sum(not contains(s, p) for p in pts)
    return bad == 0, f"{bad}/200 sums outside"


def check_reduction(rng) -> tuple[bool, str]:
    z = _random_zonotope(rng, 3, 40)
    r = reduce_order(z, 10)
    pts = sample(z, rng, 200)
    bad = sum(not contains(r, p) for p in pts)
    return bad == 0 and r.order == 10, f"order {r.order}, {bad}/200 outside"


def check_f_radius(rng) -> tuple[bool, str]:
    z = _random_zonotope(rng, 3, 12)
    err = abs(f_radius(z) ** 2 - np.trace(covariance(z)))
    return err <= 1e-12 * max(1.0, f_radius(z) ** 2), f"|F^2 - tr P| = {err:.2e}"


def check_exp_log(rng) -> tuple[bool, str]:
    worst = 0.0
    for _ in range(200):
        v = rng.uniform(-1, 1, 3) * np.array([3.0, 10.0, 10.0])
        worst = max(worst, np.abs(se2.log_map(se2.exp_map(v)) - v).max())
    return worst <= 1e-10, f"max roundtrip error {worst:.2e}"


def check_group_affine(rng) -> tuple[bool, str]:
    worst = 0.0
    for _ in range(200):
        x1 = Se2Element.from_vector(rng.uniform(-3, 3, 3))
        x2 = Se2Element.from_vector(rng.uniform(-3, 3, 3))
        u = rng.uniform(-1, 1, 3) * np.array([1.0, 10.0, 1.0])
        worst = max(worst, se2.group_affine_residual(x1, x2, u, 0.01))
    return worst <= 1e-12, f"max residual {worst:.2e}"


def check_pole_placement(rng) -> tuple[bool, str]:
    model = invariant.SystemModel()
    lin = invariant.linearize([0.4, 8.0, 0.0], Se2Element.identity(), model, Side.LEFT)
    poles = (0.95, 0.98, 0.98)
    L = gains.pole_placement_gain(lin.a, lin.c, poles)
    err = gains.match_poles(np.linalg.eigvals(lin.a - L @ lin.c), poles)
    return err <= gains.PLACEMENT_TOL, f"pole mismatch {err:.2e}"


def check_f_radius_gain(rng) -> tuple[bool, str]:
    model = invariant.SystemModel()
    lin = invariant.linearize([0.4, 8.0, 0.0], Se2Element.identity(), model, Side.LEFT)
    h = rng.normal(size=(3, 8))
    L = gains.f_radius_optimal_gain(lin.a, lin.c, h, lin.measurement_map, model.h_v)
    grad = gains.f_radius_gradient(L, lin.a, lin.c, h, lin.measurement_map, model.h_v)
    return np.abs(grad).max() <= 1e-10, f"stationarity residual {np.abs(grad).max():.2e}"


def check_short_run(rng) -> tuple[bool, str]:
    config = bench.preset("table1-row6", steps=300, repetitions=1, containment_from=100)
    report = bench.run_experiment(config)
    ok = not report.errors and report.containment_rate >= 0.95
    return ok, f"containment {report.containment_rate:.3f}, ART {report.art_seconds * 1e3:.2f} ms"


CHECKS: dict[str, Callable] = {
    "minkowski_sum": check_minkowski,
    "reduction_containment": check_reduction,
    "f_radius_identity": check_f_radius,
    "exp_log_roundtrip": check_exp_log,
    "group_affine": check_group_affine,
    "pole_placement": check_pole_placement,
    "f_radius_gain": check_f_radius_gain,
    "short_run": check_short_run,
}


def run_checks(seed: int = 0, names=None) -> list[CheckResult]:
    results = []
    for name, fn in CHECKS.items():
        if names and name not in names:
            continue
        rng = np.random.default_rng(seed)
        start = time.perf_counter()
        try:
            passed, detail = fn(rng)
        except Exception as exc:  # report, keep going
            passed, detail = False, f"{type(exc).__name__}: {exc}"
        results.append(CheckResult(name, bool(passed), detail, time.perf_counter() - start))
    return results
