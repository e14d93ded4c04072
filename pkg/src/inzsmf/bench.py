"""Vehicle simulation, experiment presets, metrics and run artifacts."""

from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from . import invariant, zsmf
from .gains import FRadiusOptimal, GainStrategy, PoleConfiguration
from .group_zonotope import Side, StateBounds, contains_state, extract_bounds
from .invariant import DISCRETIZATIONS, InnovationMode, SystemModel
from .se2 import BranchError, Se2Element, wrap_angle
from .zonotope import RANKINGS, contains

FILTERS = ("inzsmf", "zsmf")
GAINS = ("fradius", "poles")

TRUE_INIT = (math.pi / 2, 0.0, 0.0)
TABLE1_ESTIMATES = (
    (math.pi / 2, 0.0, 0.0),
    (math.pi / 4, 0.0, 0.0),
    (0.0, 0.0, 0.0),
    (math.pi / 2, 5.0, 5.0),
    (math.pi / 4, 5.0, 5.0),
    (0.0, 5.0, 5.0),
    (0.0, 5.0, -5.0),
    (0.0, -5.0, 5.0),
)
TABLE2_ESTIMATE = (0.0, 5.0, -5.0)


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field_name = field_name
        self.message = message


@dataclass(frozen=True)
class ExperimentConfig:
    name: str = "custom"
    true_init: tuple = TRUE_INIT
    est_init: tuple = TRUE_INIT
    radius: float = 20.0
    speed: float = 8.0
    delta: float = 0.01
    steps: int = 2000
    repetitions: int = 5
    h_w: tuple = (0.1, 0.1, 0.1)  # diagonal of the process-noise generator
    h_v: tuple = (1.0, 1.0)  # diagonal of the measurement-noise generator
    filter: str = "inzsmf"
    gain: str = "fradius"
    poles: tuple = (0.95, 0.98, 0.98)
    side: str = "left"
    innovation: str = "alternative"
    discretization: str = "euler"
    h0: tuple = (1.7, 5.2, 5.2)  # diagonal of the initial generator
    reduction_order: int = 30
    reduction_ranking: str = "euclidean"
    seed: int = 0
    check_containment: bool = True
    containment_from: int = 200

    @property
    def omega(self) -> float:
        return self.speed / self.radius

    @property
    def control(self) -> np.ndarray:
        return np.array([self.omega, self.speed, 0.0])

    def validate(self) -> "ExperimentConfig":
        if len(self.true_init) != 3:
            raise ConfigError("true_init", "expected theta,x1,x2")
        if len(self.est_init) != 3:
            raise ConfigError("est_init", "expected theta,x1,x2")
        for name in ("radius", "speed", "delta"):
            if not getattr(self, name) > 0:
                raise ConfigError(name, "must be positive")
        if self.steps < 1:
            raise ConfigError("steps", "must be at least 1")
        if self.repetitions < 1:
            raise ConfigError("repetitions", "must be at least 1")
        if len(self.h_w) != 3 or any(v < 0 for v in self.h_w):
            raise ConfigError("h_w", "expected three nonnegative values")
        if len(self.h_v) != 2 or any(v < 0 for v in self.h_v):
            raise ConfigError("h_v", "expected two nonnegative values")
        if len(self.h0) != 3 or any(v < 0 for v in self.h0):
            raise ConfigError("h0", "expected three nonnegative values")
        if self.filter not in FILTERS:
            raise ConfigError("filter", f"must be one of {FILTERS}")
        if self.gain not in GAINS:
            raise ConfigError("gain", f"must be one of {GAINS}")
        if self.gain == "poles":
            if len(self.poles) != 3:
                raise ConfigError("poles", "three poles are required")
            try:
                PoleConfiguration(self.poles)
            except ValueError as exc:
                raise ConfigError("poles", str(exc)) from None
        if self.side not in ("left", "right"):
            raise ConfigError("side", "must be left or right")
        if self.innovation not in ("standard", "alternative"):
            raise ConfigError("innovation", "must be standard or alternative")
        if self.discretization not in DISCRETIZATIONS:
            raise ConfigError("discretization", f"must be one of {DISCRETIZATIONS}")
        if self.reduction_order <= 3:
            raise ConfigError("reduction_order", "must exceed the state dimension 3")
        if self.reduction_ranking not in RANKINGS:
            raise ConfigError("reduction_ranking", f"must be one of {RANKINGS}")
        if self.containment_from < 0:
            raise ConfigError("containment_from", "must be nonnegative")
        return self

    def model(self) -> SystemModel:
        return SystemModel(
            delta=self.delta,
            h_w=np.diag(self.h_w),
            h_v=np.diag(self.h_v),
            innovation_mode=InnovationMode(self.innovation),
            discretization=self.discretization,
        )

    def strategy(self) -> GainStrategy:
        return PoleConfiguration(self.poles) if self.gain == "poles" else FRadiusOptimal()


def preset(name: str, **overrides) -> ExperimentConfig:
    """``table1-rowK`` (K = 1..8) or ``table2``."""
    if name == "table2":
        config = ExperimentConfig(name=name, est_init=TABLE2_ESTIMATE)
    elif name.startswith("table1-row"):
        try:
            row = int(name[len("table1-row"):])
            est = TABLE1_ESTIMATES[row - 1]
            if row < 1:
                raise IndexError
        except (ValueError, IndexError):
            raise ConfigError("preset", f"unknown preset {name!r}") from None
        config = ExperimentConfig(name=name, est_init=est)
    else:
        raise ConfigError("preset", f"unknown preset {name!r}")
    return replace(config, **overrides)


PRESETS = tuple(f"table1-row{k}" for k in range(1, 9)) + ("table2",)


# -- simulation ---------------------------------------------------------------


@dataclass
class Trajectory:
    states: np.ndarray  # (N+1, 3) true [theta, x1, x2]
    measurements: np.ndarray  # (N, 2), measurement k observes states[k]
    process_noise: np.ndarray  # (N, 3)
    measurement_noise: np.ndarray  # (N, 2)


def repetition_rng(config: ExperimentConfig, rep: int) -> np.random.Generator:
    seeds = np.random.SeedSequence(config.seed).spawn(rep + 1)
    return np.random.default_rng(seeds[rep])


def simulate_truth(config: ExperimentConfig, rng: np.random.Generator) -> Trajectory:
    n = config.steps
    if n < 1:
        raise ConfigError("steps", "must be at least 1")
    h_w = np.diag(config.h_w)
    h_v = np.diag(config.h_v)
    w = rng.uniform(-1.0, 1.0, (n, 3)) @ h_w.T
    v = rng.uniform(-1.0, 1.0, (n, 2)) @ h_v.T
    u = config.control
    states = np.empty((n + 1, 3))
    states[0] = config.true_init
    for k in range(n):
        states[k + 1] = zsmf.transition(states[k], u, w[k], config.delta)
    return Trajectory(states, states[:n, 1:] + v, w, v)


# -- filtering ----------------------------------------------------------------


@dataclass
class RunLog:
    centers: np.ndarray  # (N+1, 3)
    bounds: list  # N+1 StateBounds
    contained: np.ndarray  # (N+1,) float: 1, 0 or nan when not checked
    step_times: np.ndarray  # (N,) seconds per filter update
    error: str | None = None


def _bounds_row(b: StateBounds) -> list:
    return [b.theta.lower[0], b.theta.upper[0], b.position.lower[0], b.position.upper[0],
            b.position.lower[1], b.position.upper[1]]


def run_filter(config: ExperimentConfig, traj: Trajectory) -> RunLog:
    n = config.steps
    model = config.model()
    strategy = config.strategy()
    u = config.control
    centers = np.full((n + 1, 3), np.nan)
    contained = np.full(n + 1, np.nan)
    times = np.full(n, np.nan)
    bounds: list = []

    if config.filter == "inzsmf":
        state = invariant.initial_state(Se2Element.from_vector(config.est_init), config.h0,
                                        Side(config.side), config.reduction_order,
                                        config.reduction_ranking)

        def record(k, st):
            centers[k] = st.center.as_vector()
            if st.side is Side.LEFT:
                bounds.append(extract_bounds(st.estimate))
            if config.check_containment:
                try:
                    contained[k] = contains_state(st.estimate, Se2Element.from_vector(traj.states[k]))
                except BranchError:
                    contained[k] = 0.0

        def advance(st, k):
            return invariant.update(st, u, traj.measurements[k], model, strategy)
    else:
        state = zsmf.initial_state(config.est_init, config.h0, config.reduction_order,
                                   config.reduction_ranking)

        def record(k, st):
            centers[k] = st.center
            bounds.append(zsmf.extract_bounds(st))
            if config.check_containment:
                contained[k] = contains(st.zonotope(), traj.states[k])

        def advance(st, k):
            return zsmf.step_zsmf(st, u, traj.measurements[k], model, strategy)

    record(0, state)
    error = None
    for k in range(n):
        try:
            start = time.perf_counter()
            state = advance(state, k)
            times[k] = time.perf_counter() - start
        except (ValueError, np.linalg.LinAlgError) as exc:
            error = f"step {k}: {type(exc).__name__}: {exc}"
            break
        record(k + 1, state)
    return RunLog(centers, bounds, contained, times, error)


# -- metrics ------------------------------------------------------------------


def rmse_metrics(truth, centers) -> tuple[float, float]:
    truth = np.asarray(truth, dtype=float)
    centers = np.asarray(centers, dtype=float)
    if truth.shape != centers.shape:
        raise ValueError(f"length mismatch: {truth.shape} vs {centers.shape}")
    if truth.shape[0] < 1:
        raise ValueError("need at least one step")
    dtheta = wrap_angle(truth[:, 0] - centers[:, 0])
    dpos = truth[:, 1:3] - centers[:, 1:3]
    return float(np.sqrt(np.mean(dtheta**2))), float(np.sqrt(np.mean(np.sum(dpos**2, axis=1))))


def aar_metrics(bounds: Sequence[StateBounds]) -> tuple[float, float]:
    if len(bounds) < 1:
        raise ValueError("need at least one step")
    theta = np.array([b.theta.widths[0] for b in bounds])
    area = np.array([np.prod(b.position.widths) for b in bounds])
    return float(theta.mean()), float(area.mean())


def improvement(baseline: float, candidate: float) -> float:
    """Relative reduction of ``candidate`` w.r.t. ``baseline`` in percent;
    positive means the candidate metric is smaller (better)."""
    if baseline == 0:
        raise ValueError("baseline metric is zero")
    return (baseline - candidate) / baseline * 100.0


METRIC_FIELDS = ("rmse_theta", "rmse_x", "aar_theta", "aar_x", "art_seconds")


@dataclass(frozen=True)
class MetricsReport:
    rmse_theta: float
    rmse_x: float
    aar_theta: float
    aar_x: float
    art_seconds: float
    containment_rate: float = float("nan")
    repetitions: int = 1
    failed_repetitions: int = 0
    errors: tuple = ()

    def improvements_over(self, baseline: "MetricsReport") -> dict:
        return {name: improvement(getattr(baseline, name), getattr(self, name))
                for name in METRIC_FIELDS}


def repetition_report(config: ExperimentConfig, traj: Trajectory, log: RunLog) -> MetricsReport:
    """Metrics of one repetition over steps 1..N."""
    rmse_theta, rmse_x = rmse_metrics(traj.states[1:], log.centers[1:])
    aar_theta, aar_x = aar_metrics(log.bounds[1:]) if len(log.bounds) > 1 else (math.nan, math.nan)
    tail = log.contained[config.containment_from:]
    rate = float(np.mean(tail)) if config.check_containment and tail.size else math.nan
    return MetricsReport(rmse_theta, rmse_x, aar_theta, aar_x, float(np.mean(log.step_times)), rate)


@dataclass
class Repetition:
    index: int
    trajectory: Trajectory
    log: RunLog
    report: MetricsReport | None


def run_repetition(config: ExperimentConfig, rep: int) -> Repetition:
    traj = simulate_truth(config, repetition_rng(config, rep))
    log = run_filter(config, traj)
    report = None if log.error else repetition_report(config, traj, log)
    return Repetition(rep, traj, log, report)


def aggregate(reps: Sequence[Repetition]) -> MetricsReport:
    ok = [r.report for r in reps if r.report is not None]
    errors = tuple(r.log.error for r in reps if r.log.error)
    if not ok:
        nan = math.nan
        return MetricsReport(nan, nan, nan, nan, nan, nan, 0, len(errors), errors)
    means = {name: float(np.mean([getattr(r, name) for r in ok]))
             for name in METRIC_FIELDS + ("containment_rate",)}
    return MetricsReport(**means, repetitions=len(ok), failed_repetitions=len(errors), errors=errors)


def run_repetitions(config: ExperimentConfig) -> list[Repetition]:
    config.validate()
    return [run_repetition(config, i) for i in range(config.repetitions)]


def run_experiment(config: ExperimentConfig) -> MetricsReport:
    """Average the metrics of ``config.repetitions`` independent runs.

    Repetitions run one after another so that step timings are not
    distorted by sibling processes; use :func:`run_many` to spread whole
    experiments over workers.
    """
    return aggregate(run_repetitions(config))


def _pool_map(fn, configs: Sequence[ExperimentConfig], workers: int) -> list:
    for c in configs:
        c.validate()
    if workers <= 1 or len(configs) <= 1:
        return [fn(c) for c in configs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, configs))


def run_many(configs: Sequence[ExperimentConfig], workers: int = 1) -> list[MetricsReport]:
    """Run several experiments; results keep the input order."""
    return _pool_map(run_experiment, configs, workers)


def run_many_logged(configs: Sequence[ExperimentConfig], workers: int = 1) -> list[list[Repetition]]:
    return _pool_map(run_repetitions, configs, workers)


# -- artifacts ----------------------------------------------------------------

RUN_COLUMNS = (
    "step", "true_theta", "true_x1", "true_x2", "est_theta", "est_x1", "est_x2",
    "theta_lower", "theta_upper", "x1_lower", "x1_upper", "x2_lower", "x2_upper",
    "contained", "step_time_s",
)
METRICS_COLUMNS = ("config", "filter", "gain", "repetitions", "failed_repetitions",
                   *METRIC_FIELDS, "containment_rate")


def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def write_run_csv(path, traj: Trajectory, log: RunLog) -> None:
    n = traj.states.shape[0]
    nan_bounds = [math.nan] * 6
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RUN_COLUMNS)
        for k in range(n):
            b = _bounds_row(log.bounds[k]) if k < len(log.bounds) else nan_bounds
            step_time = log.step_times[k - 1] if k > 0 else math.nan
            row = [k, *traj.states[k], *log.centers[k], *b, log.contained[k], step_time]
            writer.writerow([fmt(v) for v in row])


def metrics_row(config: ExperimentConfig, report: MetricsReport) -> dict:
    row = {"config": config.name, "filter": config.filter, "gain": config.gain,
           "repetitions": report.repetitions, "failed_repetitions": report.failed_repetitions}
    for name in METRIC_FIELDS + ("containment_rate",):
        row[name] = getattr(report, name)
    return row


def write_metrics_csv(path, rows: Sequence[dict]) -> None:
    columns = list(METRICS_COLUMNS)
    for row in rows:
        columns += [k for k in row if k not in columns]
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: fmt(v) for k, v in row.items()})


def read_metrics_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    out = []
    for row in rows:
        parsed = {}
        for k, v in row.items():
            if v == "":
                parsed[k] = None
                continue
            try:
                parsed[k] = int(v)
            except ValueError:
                try:
                    parsed[k] = float(v)
                except ValueError:
                    parsed[k] = v
        out.append(parsed)
    return out


def metadata(config: ExperimentConfig, **extra) -> dict:
    meta = {
        "config": {f.name: getattr(config, f.name) for f in fields(config)},
        "omega": config.omega,
        "noise_model": "uniform on the generator hypercube, independent per step",
        "initial_generator": list(config.h0),
        "reduction_order": config.reduction_order,
        "reduction_ranking": config.reduction_ranking,
        "steps": config.steps,
        "seed": config.seed,
        "repetition_seeds": "numpy SeedSequence(seed).spawn(repetitions)",
        "gain_policy": (
            "pole configuration: minimum-Frobenius-norm gain among diagonalizable placements; "
            "cached when (A, C) is constant (InZSMF), recomputed every step for ZSMF"
            if config.gain == "poles"
            else "F-radius optimal gain recomputed every step"
        ),
        "zsmf_center_update": "x' = phi(x, u, 0) + L (y_k - C x_k)",
        "position_bounds": "first-order (left Jacobian = identity) box for InZSMF",
    }
    meta.update(extra)
    return meta


def write_metadata(path, config: ExperimentConfig, **extra) -> None:
    Path(path).write_text(json.dumps(metadata(config, **extra), indent=2, default=str) + "\n")
