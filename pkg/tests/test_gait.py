"""Periodic-gait solver checks: symmetry operators, residuals, speed,
mirror structure and the null-space dimension."""

import math

import numpy as np
import pytest

from stridesim import make_config, scale_body
from stridesim.dynamics import WalkingDynamics, exchange_support
from stridesim.errors import InvalidParameterError
from stridesim.gait import (OPS, build_symmetry_ops, periodicity_system,
                            solve_periodic_gait)


def test_operator_identities():
    ops = build_symmetry_ops()
    assert np.allclose(ops.M @ ops.Mhat, np.eye(8))
    assert np.allclose(ops.O @ ops.O, np.eye(8))
    assert np.allclose(ops.S @ ops.S, np.eye(12))
    # N picks the swing- and stance-foot velocity blocks
    q = np.arange(12.0)
    assert np.allclose(ops.N @ q, [6, 7, 10, 11])
    # O flips lateral components only
    s = np.arange(8.0)
    assert np.allclose(ops.O @ s, [0, -1, 2, -3, 4, -5, 6, -7])


def test_exchange_matches_matrix():
    rng = np.random.default_rng(0)
    q = rng.normal(size=12)
    assert np.allclose(OPS.S @ q, exchange_support(q))


@pytest.fixture(scope="module")
def default_gait(adult, default_config):
    dyn = WalkingDynamics(adult, default_config)
    return solve_periodic_gait(dyn)


def test_residuals_and_speed(default_gait):
    assert default_gait.residual < 1e-9
    assert default_gait.speed_error < 1e-9


def test_foot_velocities_zero(default_gait):
    g = default_gait
    q0 = g.qbar
    qT = g.nominal_state(g.config.step_time)
    assert abs(q0[6:8]).max() < 1e-9       # initial swing
    assert abs(q0[10:12]).max() < 1e-9     # stance
    assert abs(qT[6:8]).max() < 1e-9       # final swing


def test_periodicity_via_exchange(default_gait):
    """Evolving one step, exchanging support and mirroring laterally
    reproduces the initial relative vectors."""
    g = default_gait
    qT = g.nominal_state(g.config.step_time)
    lhs = OPS.M @ g.qbar
    rhs = OPS.O @ OPS.M @ exchange_support(qT)
    assert abs(lhs - rhs).max() < 1e-9


def test_mean_speed_numeric(default_gait):
    g = default_gait
    T = g.config.step_time
    ts = np.linspace(0.0, T, 2001)
    vx = np.array([g.nominal_state(t)[8] for t in ts])
    assert abs(np.trapezoid(vx, ts) / T - g.config.speed) < 1e-6


def test_nominal_state_bounds(default_gait):
    with pytest.raises(InvalidParameterError):
        default_gait.nominal_state(default_gait.config.step_time + 0.2)


def test_null_space_dimension(adult, default_config):
    dyn = WalkingDynamics(adult, default_config)
    lhs, _ = periodicity_system(dyn, np.asarray(default_config.const_vector()))
    assert np.linalg.matrix_rank(lhs) == 12
    assert lhs.shape == (12, 20)


def test_in_place_gait_is_pure_lateral(adult):
    cfg = make_config(speed=0.0, freq=1.7, ds_ratio=0.2)
    g = solve_periodic_gait(WalkingDynamics(adult, cfg))
    sagittal = g.qbar[[0, 2, 4, 6, 8, 10]]
    assert abs(sagittal).max() < 1e-9
    assert abs(g.ubar[[0, 2, 4, 6]]).max() < 1e-9   # no sagittal torques
    assert abs(g.qbar[3]) > 1e-3                     # lateral sway exists


def test_zero_speed_slope_gait_exists(adult):
    cfg = make_config(speed=0.0, freq=1.7, ds_ratio=0.2, slope=0.14)
    g = solve_periodic_gait(WalkingDynamics(adult, cfg))
    # pelvis hangs above the stance foot along true vertical
    assert abs(g.qbar[2] - adult.leg_length * math.sin(0.14)) < 0.02


def test_mass_independence(default_config):
    gaits = [solve_periodic_gait(WalkingDynamics(scale_body(m, 1.7), default_config))
             for m in (40.0, 70.0, 120.0)]
    for g in gaits[1:]:
        assert abs(g.qbar - gaits[0].qbar).max() < 1e-9


def test_mirror_symmetry_between_sides(adult, default_config):
    dyn = WalkingDynamics(adult, default_config)
    g_pos = solve_periodic_gait(dyn, default_config)
    g_neg = solve_periodic_gait(dyn, default_config.with_support(-1))
    flip = np.array(([1.0, -1.0] * 3) * 2)
    assert abs(g_neg.qbar - flip * g_pos.qbar).max() < 1e-9


def test_backward_reverses_step(adult):
    fwd = solve_periodic_gait(WalkingDynamics(adult, make_config(speed=0.8, freq=1.7)))
    bwd = solve_periodic_gait(WalkingDynamics(adult, make_config(speed=-0.8, freq=1.7)))
    sag_flip = np.array([-1.0, 1.0] * 3 + [-1.0, 1.0] * 3)
    assert abs(bwd.qbar - sag_flip * fwd.qbar).max() < 1e-9


@pytest.mark.parametrize("speed,freq,ds,slope,torso,drag", [
    (1.5, 2.5, 0.4, 0.2, 0.3, 60.0),
    (-1.5, 1.0, 0.0, -0.2, -0.15, -60.0),
    (0.3, 1.2, 0.35, 0.1, 0.0, -30.0),
])
def test_grid_corners(adult, speed, freq, ds, slope, torso, drag):
    cfg = make_config(speed=speed, freq=freq, ds_ratio=ds, slope=slope,
                      torso=torso, drag=drag)
    g = solve_periodic_gait(WalkingDynamics(adult, cfg))
    assert g.residual < 1e-9 and g.speed_error < 1e-9
    qT = g.nominal_state(cfg.step_time)
    assert abs(qT[6:8]).max() < 1e-9
