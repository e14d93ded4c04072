from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from inzsmf import bench, gains, invariant, se2
from inzsmf.gains import FRadiusOptimal, PoleConfiguration
from inzsmf.group_zonotope import GroupZonotope, Side, contains_state
from inzsmf.invariant import C_TILDE, InnovationMode, SystemModel
from inzsmf.se2 import Se2Element

U = np.array([0.4, 8.0, 0.0])


def test_predict():
    model = SystemModel()
    st0 = invariant.initial_state(Se2Element(0.3, [1.0, 2.0]), [0.1, 0.1, 0.1])
    same = invariant.predict(st0, np.zeros(3), model)
    assert same.theta == 0.3 and np.array_equal(same.x, [1.0, 2.0])
    moved = invariant.predict(invariant.initial_state(Se2Element.identity(), [1, 1, 1]), U, model)
    ref = se2.exp_map([0.004, 0.08, 0.0])
    assert moved.theta == ref.theta and np.allclose(moved.x, ref.x, atol=0)


def test_innovation_modes():
    st0 = invariant.initial_state(Se2Element(np.pi / 2, [1.0, 1.0]), [1, 1, 1])
    alt = SystemModel()
    std = SystemModel(innovation_mode=InnovationMode.STANDARD)
    np.testing.assert_array_equal(invariant.innovation(st0, [1.0, 1.0], alt), [0.0, 0.0])
    np.testing.assert_allclose(invariant.innovation(st0, [2.0, 1.0], alt), [0.0, -1.0], atol=1e-15)
    np.testing.assert_allclose(invariant.innovation(st0, [2.0, 1.0], std), [1.0, 0.0])


@given(st.floats(-3, 3), st.floats(-5, 5), st.floats(-5, 5))
def test_alternative_is_rotated_standard(theta, y1, y2):
    st0 = invariant.initial_state(Se2Element(theta, [0.5, -0.2]), [1, 1, 1])
    z_std = invariant.innovation(st0, [y1, y2], SystemModel(innovation_mode="standard"))
    z_alt = invariant.innovation(st0, [y1, y2], SystemModel())
    np.testing.assert_allclose(z_alt, se2.rotation(theta).T @ z_std, atol=1e-12)
    # first two rows of X^-1 [y; 1] - [0; 0; 1]
    full = np.linalg.inv(st0.center.matrix()) @ np.array([y1, y2, 1.0]) - [0, 0, 1]
    np.testing.assert_allclose(z_alt, full[:2], atol=1e-12)


def test_linearize_hand_values():
    lin = invariant.linearize(U, Se2Element.identity(), SystemModel())
    np.testing.assert_allclose(lin.a, [[1, 0, 0], [0, 1, 0.004], [0.08, -0.004, 1]], atol=1e-15)
    np.testing.assert_array_equal(lin.c, C_TILDE)
    np.testing.assert_allclose(lin.process_map, 0.01 * np.eye(3))
    zero = invariant.linearize(np.zeros(3), Se2Element.identity(), SystemModel())
    np.testing.assert_array_equal(zero.a, np.eye(3))


def test_exact_discretization_is_group_adjoint():
    lin = invariant.linearize(U, Se2Element.identity(), SystemModel(discretization="exact"))
    np.testing.assert_allclose(lin.a, se2.adjoint_group(se2.exp_map(-0.01 * U)), atol=1e-15)
    euler = invariant.linearize(U, Se2Element.identity(), SystemModel())
    assert np.abs(lin.a - euler.a).max() < 2e-4


def test_left_linearization_is_autonomous():
    model = SystemModel()
    rng = np.random.default_rng(0)
    ref = invariant.linearize(U, Se2Element.identity(), model)
    for theta in rng.uniform(-np.pi, np.pi, 100):
        center = Se2Element(theta, rng.normal(scale=10, size=2))
        lin = invariant.linearize(U, center, model)
        np.testing.assert_array_equal(lin.a, ref.a)
        np.testing.assert_array_equal(lin.c, ref.c)
        np.testing.assert_array_equal(lin.process_map, ref.process_map)
        np.testing.assert_allclose(lin.measurement_map, se2.rotation(theta).T, atol=1e-15)


def test_zero_noise_exact_init_tracks_truth():
    model = SystemModel(h_w=np.zeros((3, 3)), h_v=np.zeros((2, 2)))
    truth = Se2Element(np.pi / 2, [0.0, 0.0])
    st0 = invariant.initial_state(truth, np.zeros((3, 3)))
    strategy = PoleConfiguration((0.9, 0.9, 0.8))
    for _ in range(200):
        st0 = invariant.update(st0, U, truth.x, model, strategy)
        truth = se2.propagate(truth, U, model.delta)
    assert st0.center.theta == pytest.approx(truth.theta, abs=1e-12)
    np.testing.assert_allclose(st0.center.x, truth.x, atol=1e-12)
    assert not np.any(st0.generators)


def test_single_step_example():
    model = SystemModel()
    center = Se2Element.identity()
    truth = se2.compose(center, se2.exp_map([0.3, 1.0, 1.0]))
    st0 = invariant.initial_state(center, [1.6, 5.1, 5.1])
    assert contains_state(st0.estimate, truth)
    st1 = invariant.update(st0, U, truth.x, model, FRadiusOptimal())
    assert st1.generators.shape == (3, 3 + 3 + 2)
    assert st1.step == 1
    truth1 = se2.propagate(truth, U, model.delta)
    assert contains_state(st1.estimate, truth1, tol=1e-6)


@pytest.mark.parametrize("strategy", [FRadiusOptimal(), PoleConfiguration((0.95, 0.98, 0.98))])
def test_generator_structure(strategy, rng):
    model = SystemModel()
    st0 = invariant.initial_state(Se2Element(0.3, [1.0, 2.0]), [1.7, 5.2, 5.2], reduction_threshold=8)
    for k in range(12):
        y = rng.normal(size=2)
        prev = st0
        st0 = invariant.update(st0, U, y, model, strategy)
        reduced = min(prev.generators.shape[1], 8)
        assert st0.generators.shape[1] == reduced + 3 + 2
        assert st0.generators.shape[1] <= 8 + 3 + 2
        np.testing.assert_array_equal(st0.generators[:, reduced:reduced + 3], model.delta * model.h_w)
        lin = invariant.linearize(U, prev.center, model)
        h_bar = invariant.reduce_order(prev.estimate.error_zonotope(), 8).generators
        L = gains.observer_gain(strategy, lin.a, lin.c, h_bar, lin.measurement_map, model.h_v)
        np.testing.assert_array_equal(st0.generators[:, reduced + 3:],
                                      -L @ prev.center.rotation().T @ model.h_v)


def test_innovation_equivalence():
    config = bench.preset("table1-row5", steps=400, repetitions=1)
    traj = bench.simulate_truth(config, bench.repetition_rng(config, 0))
    logs = {}
    for mode in ("alternative", "standard"):
        logs[mode] = bench.run_filter(replace(config, innovation=mode, check_containment=False), traj)
    np.testing.assert_allclose(logs["alternative"].centers, logs["standard"].centers, atol=1e-9)


def _one_step_residual(eps, model, L, center):
    x = se2.compose(center, se2.exp_map(eps))
    st0 = invariant.InzsmfState(GroupZonotope(center, np.zeros((3, 0))))
    z = invariant.innovation(st0, x.x, model)
    est = se2.compose(se2.propagate(center, U, model.delta), se2.exp_map(L @ z))
    eps1 = se2.log_map(se2.compose(se2.inverse(est), se2.propagate(x, U, model.delta)))
    lin = invariant.linearize(U, center, model)
    return np.linalg.norm(eps1 - (lin.a - L @ lin.c) @ eps)


def halving_ratios(model, scales, seed=1):
    rng = np.random.default_rng(seed)
    center = Se2Element(0.3, [1.0, -2.0])
    lin = invariant.linearize(U, center, model)
    L = gains.pole_placement_gain(lin.a, lin.c, (0.95, 0.98, 0.98))
    d = rng.normal(size=3)
    d /= np.linalg.norm(d)
    r = np.array([_one_step_residual(s * d, model, L, center) for s in scales])
    return r[:-1] / r[1:]


def test_error_dynamics_quadratic_at_moderate_scales():
    ratios = halving_ratios(SystemModel(), 0.1 * 0.5 ** np.arange(5))
    assert ratios.min() >= 3.5


def test_exact_discretization_is_quadratic_to_small_scales():
    ratios = halving_ratios(SystemModel(discretization="exact"), 0.1 * 0.5 ** np.arange(11))
    assert ratios.min() >= 3.5


def test_euler_discretization_floor():
    # below roughly 5e-3 the delta^2 ad(u)^2 / 2 truncation, linear in eps, dominates
    ratios = halving_ratios(SystemModel(), 1e-4 * 0.5 ** np.arange(3))
    assert np.all(np.abs(ratios - 2.0) < 0.1)


def test_right_side_runs_with_f_radius(rng):
    model = SystemModel()
    truth = Se2Element(np.pi / 2, [0.0, 0.0])
    st0 = invariant.initial_state(Se2Element(np.pi / 2 - 0.1, [0.5, -0.5]), [1.7, 5.2, 5.2], Side.RIGHT)
    assert contains_state(st0.estimate, truth)
    hits = 0
    for _ in range(300):
        y = truth.x + rng.uniform(-1, 1, 2)
        st0 = invariant.update(st0, U, y, model, FRadiusOptimal())
        truth = se2.propagate(truth, U, model.delta)
        hits += contains_state(st0.estimate, truth, tol=1e-6)
    assert hits >= 0.95 * 300
    assert abs(st0.center.theta - truth.theta) < 0.5


def test_right_side_pole_placement_unobservable():
    st0 = invariant.initial_state(Se2Element.identity(), [1, 1, 1], Side.RIGHT)
    with pytest.raises(gains.UnobservableError):
        invariant.update(st0, U, [0.0, 0.0], SystemModel(), PoleConfiguration((0.9, 0.9, 0.8)))


def test_model_validation():
    with pytest.raises(ValueError):
        SystemModel(delta=0.0)
    with pytest.raises(ValueError):
        SystemModel(discretization="rk4")
