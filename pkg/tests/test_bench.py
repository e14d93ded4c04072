import json
import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from inzsmf import bench
from inzsmf.bench import ConfigError, ExperimentConfig
from inzsmf.group_zonotope import StateBounds
from inzsmf.zonotope import IntervalBox, Zonotope, contains


def test_presets():
    assert bench.preset("table1-row6").est_init == (0.0, 5.0, 5.0)
    assert bench.preset("table2").est_init == (0.0, 5.0, -5.0)
    assert bench.preset("table1-row1").est_init == bench.TRUE_INIT
    assert bench.preset("table1-row3", steps=10).steps == 10
    for bad in ("table1-row0", "table1-row9", "table3", "table1-rowx"):
        with pytest.raises(ConfigError):
            bench.preset(bad)


def test_circular_ramp_rate():
    c = ExperimentConfig()
    assert c.omega == pytest.approx(0.4)
    np.testing.assert_allclose(c.control, [0.4, 8.0, 0.0])


@pytest.mark.parametrize("field, value", [
    ("steps", 0), ("repetitions", 0), ("delta", -1.0), ("filter", "ekf"), ("gain", "lqr"),
    ("poles", (0.5, 1.2, 0.3)), ("side", "up"), ("innovation", "x"), ("reduction_order", 3),
    ("h0", (1.0, 2.0)), ("reduction_ranking", "l1"), ("discretization", "rk4"),
])
def test_validation_names_field(field, value):
    config = replace(ExperimentConfig(gain="poles" if field == "poles" else "fradius"), **{field: value})
    with pytest.raises(ConfigError) as info:
        config.validate()
    assert info.value.field_name == field


def test_zero_noise_trajectory_closed_form():
    c = ExperimentConfig(h_w=(0, 0, 0), h_v=(0, 0), steps=200)
    traj = bench.simulate_truth(c, np.random.default_rng(0))
    k = np.arange(201)
    np.testing.assert_allclose(traj.states[:, 0], np.pi / 2 + 0.004 * k, atol=1e-12)
    np.testing.assert_array_equal(traj.measurements, traj.states[:200, 1:])


def test_zero_noise_trajectory_near_circle():
    c = ExperimentConfig(h_w=(0, 0, 0), h_v=(0, 0), steps=1571)
    traj = bench.simulate_truth(c, np.random.default_rng(0))
    # continuous solution from (pi/2, 0, 0): circle of radius 20 centered at (-20, 0)
    t = 0.01 * np.arange(1572)
    exact = np.column_stack([-20 + 20 * np.cos(0.4 * t), 20 * np.sin(0.4 * t)])
    assert np.linalg.norm(traj.states[:, 1:] - exact, axis=1).max() <= 1e-2 * 20


def test_noise_is_admissible():
    c = ExperimentConfig(steps=500)
    traj = bench.simulate_truth(c, np.random.default_rng(3))
    zw = Zonotope(np.zeros(3), np.diag(c.h_w))
    zv = Zonotope(np.zeros(2), np.diag(c.h_v))
    assert all(contains(zw, w, tol=0.0) for w in traj.process_noise)
    assert all(contains(zv, v, tol=0.0) for v in traj.measurement_noise)


def test_rmse_metrics():
    truth = np.array([[0.1, 0.0, 0.0], [0.2, 1.0, 1.0]])
    assert bench.rmse_metrics(truth, truth) == (0.0, 0.0)
    shifted = truth + [0.1, 0.0, 0.0]
    assert bench.rmse_metrics(truth, shifted)[0] == pytest.approx(0.1)
    with pytest.raises(ValueError):
        bench.rmse_metrics(truth, truth[:1])


def test_rmse_wraps_angles():
    truth = np.array([[0.01, 0.0, 0.0]])
    est = np.array([[2 * np.pi - 0.01, 0.0, 0.0]])
    assert bench.rmse_metrics(truth, est)[0] == pytest.approx(0.02, abs=1e-12)


@given(st.integers(0, 2**32 - 1), st.integers(1, 50))
def test_metrics_match_direct_formulas(seed, n):
    rng = np.random.default_rng(seed)
    truth, est = rng.normal(size=(n, 3)), rng.normal(size=(n, 3))
    r_theta, r_x = bench.rmse_metrics(truth, est)
    d = np.angle(np.exp(1j * (truth[:, 0] - est[:, 0])))
    assert r_theta == pytest.approx(math.sqrt(sum(d**2) / n), abs=1e-12)
    ref_x = math.sqrt(sum((truth[k, 1] - est[k, 1]) ** 2 + (truth[k, 2] - est[k, 2]) ** 2
                          for k in range(n)) / n)
    assert r_x == pytest.approx(ref_x, abs=1e-12)
    lo = rng.normal(size=(n, 3))
    hi = lo + rng.uniform(0, 3, size=(n, 3))
    bounds = [StateBounds(IntervalBox(lo[k, :1], hi[k, :1]), IntervalBox(lo[k, 1:], hi[k, 1:]))
              for k in range(n)]
    a_theta, a_x = bench.aar_metrics(bounds)
    assert a_theta == pytest.approx(np.mean(hi[:, 0] - lo[:, 0]), abs=1e-12)
    assert a_x == pytest.approx(np.mean((hi[:, 1] - lo[:, 1]) * (hi[:, 2] - lo[:, 2])), abs=1e-12)


def test_aar_examples():
    flat = StateBounds(IntervalBox([1.0], [1.0]), IntervalBox([0.0, 0.0], [0.0, 0.0]))
    assert bench.aar_metrics([flat]) == (0.0, 0.0)
    box = StateBounds(IntervalBox([0.0], [0.5]), IntervalBox([0.0, 0.0], [2.0, 2.5]))
    assert bench.aar_metrics([box, box]) == (0.5, 5.0)


def test_improvement():
    assert bench.improvement(0.1388153, 0.1286731) == pytest.approx(7.31, abs=0.01)
    assert bench.improvement(0.4768847, 0.2223981) == pytest.approx(53.36, abs=0.01)
    assert bench.improvement(2.0, 2.0) == 0.0
    assert bench.improvement(1.0, 2.0) == -100.0
    with pytest.raises(ValueError):
        bench.improvement(0.0, 1.0)


def test_zero_noise_exact_init_zero_rmse():
    c = bench.preset("table1-row1", filter="zsmf", gain="poles", h_w=(0, 0, 0), h_v=(0, 0),
                     h0=(0, 0, 0), steps=100, repetitions=1)
    r = bench.run_experiment(c)
    assert r.rmse_theta == 0.0 and r.rmse_x == 0.0


def test_zero_noise_inzsmf_error_is_discretization_only():
    # the truth is an Euler polygon, the group filter predicts along exact arcs
    c = bench.preset("table1-row1", filter="inzsmf", gain="poles", h_w=(0, 0, 0), h_v=(0, 0),
                     h0=(0, 0, 0), steps=500, repetitions=1)
    r = bench.run_experiment(c)
    assert r.rmse_theta < 5e-3 and r.rmse_x < 1e-2


def test_determinism_except_timing():
    c = bench.preset("table1-row6", steps=150, repetitions=2, containment_from=50)
    a, b = bench.run_experiment(c), bench.run_experiment(c)
    assert replace(a, art_seconds=0.0) == replace(b, art_seconds=0.0)
    c2 = replace(c, seed=1)
    assert bench.run_experiment(c2).rmse_x != a.rmse_x


def test_repetition_streams_are_independent():
    c = ExperimentConfig(steps=20)
    w0 = bench.simulate_truth(c, bench.repetition_rng(c, 0)).process_noise
    w1 = bench.simulate_truth(c, bench.repetition_rng(c, 1)).process_noise
    assert not np.allclose(w0, w1)
    again = bench.simulate_truth(c, bench.repetition_rng(c, 0)).process_noise
    np.testing.assert_array_equal(w0, again)


def test_filter_errors_abort_repetition():
    c = bench.preset("table1-row1", side="right", gain="poles", steps=10, repetitions=2,
                     check_containment=False)
    r = bench.run_experiment(c)
    assert r.repetitions == 0 and r.failed_repetitions == 2
    assert "UnobservableError" in r.errors[0]
    assert math.isnan(r.rmse_theta)


def test_run_many_keeps_order():
    configs = [bench.preset(n, steps=30, repetitions=1, check_containment=False)
               for n in ("table1-row1", "table1-row6")]
    serial = bench.run_many(configs)
    parallel = bench.run_many(configs, workers=2)
    for a, b in zip(serial, parallel):
        assert a.rmse_x == b.rmse_x


def test_artifacts_roundtrip(tmp_path):
    c = bench.preset("table1-row2", steps=40, repetitions=1)
    (rep,) = bench.run_repetitions(c)
    bench.write_run_csv(tmp_path / "run.csv", rep.trajectory, rep.log)
    rows = bench.read_metrics_csv(tmp_path / "run.csv")
    assert len(rows) == 41 and tuple(rows[0]) == bench.RUN_COLUMNS
    assert rows[5]["true_x1"] == rep.trajectory.states[5, 1]
    assert rows[5]["est_theta"] == rep.log.centers[5, 0]
    report = bench.aggregate([rep])
    bench.write_metrics_csv(tmp_path / "m.csv", [bench.metrics_row(c, report)])
    (row,) = bench.read_metrics_csv(tmp_path / "m.csv")
    for name in bench.METRIC_FIELDS:
        assert row[name] == getattr(report, name)
    bench.write_metadata(tmp_path / "meta.json", c)
    meta = json.loads((tmp_path / "meta.json").read_text())
    assert meta["seed"] == 0 and meta["initial_generator"] == [1.7, 5.2, 5.2]
    assert meta["reduction_order"] == 30


def test_fmt():
    assert bench.fmt(0.1) == "0.10000000000000001"
    assert float(bench.fmt(np.pi)) == np.pi
    assert bench.fmt(True) == "1" and bench.fmt(3) == "3" and bench.fmt("a") == "a"
