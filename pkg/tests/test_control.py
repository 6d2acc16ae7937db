"""Error-model construction, constrained regulator and time projection."""

import numpy as np
import pytest

from stridesim import make_config, scale_body
from stridesim.control import (dlqr_gain, error_model, measure_error,
                               time_project)
from stridesim.dynamics import WalkingDynamics, exchange_support
from stridesim.gait import OPS, solve_periodic_gait


@pytest.fixture(scope="module")
def setup(adult, default_config):
    dyn = WalkingDynamics(adult, default_config)
    gait = solve_periodic_gait(dyn)
    em = error_model(dyn)
    gain = dlqr_gain(em)
    return dyn, gait, em, gain


def test_error_model_identities(setup):
    dyn, gait, em, _ = setup
    A, B, _ = dyn.transition(dyn.config.step_time)
    oms = OPS.O @ OPS.M @ OPS.S
    assert np.allclose(em.ahat, oms @ A @ OPS.Mhat)
    assert np.allclose(em.bhat, oms @ B)
    at0, bt0 = em.intra_phase(0.0)
    assert np.allclose(at0, np.eye(8)) and abs(bt0).max() == 0.0


def test_zero_error_stays_zero(setup):
    _, _, em, _ = setup
    assert abs(em.ahat @ np.zeros(8)).max() == 0.0


def test_discrete_error_vs_full_state(setup):
    """E[k+1] from the error model equals full-state propagation followed
    by exchange/mirror extraction."""
    dyn, gait, em, _ = setup
    rng = np.random.default_rng(2)
    for _ in range(10):
        e0 = rng.normal(0, 0.05, 8)
        du = rng.normal(0, 5.0, 8)
        q0 = gait.qbar + OPS.Mhat @ e0
        qT = dyn.propagate(q0, gait.ubar + du, gait.vbar, dyn.config.step_time)
        qbarT = gait.nominal_state(dyn.config.step_time)
        e1_full = em.step_error(qT, qbarT)
        e1_model = em.ahat @ e0 + em.bhat @ du
        assert abs(e1_full - e1_model).max() < 1e-10


def test_measure_error_blocks(setup):
    _, gait, _, _ = setup
    q = gait.qbar.copy()
    assert abs(measure_error(q, gait.qbar)).max() == 0.0
    q[2:4] += [0.03, -0.02]   # pure pelvis offset lands in the pelvis-stance block
    e = measure_error(q, gait.qbar)
    assert abs(e[0:2]).max() == 0.0
    assert np.allclose(e[2:4], [0.03, -0.02])
    rng = np.random.default_rng(3)
    qa, qb = rng.normal(size=12), rng.normal(size=12)
    assert np.allclose(measure_error(qa, qb), OPS.M @ (qa - qb))


def test_gain_properties(setup):
    _, _, em, gain = setup
    assert gain.spectral_radius < 1.0
    assert abs(gain.K[[2, 3, 6, 7]]).max() == 0.0   # ankle rows untouched
    closed = em.ahat - em.bhat @ gain.K
    assert abs(em.chat @ closed).max() < 1e-10      # touch-down rows pinned
    rng = np.random.default_rng(4)
    e = rng.normal(0, 0.1, 8)
    assert abs((closed @ e)[4:6]).max() < 1e-10


def test_projection_equals_gain_at_zero(setup):
    _, _, em, gain = setup
    rng = np.random.default_rng(5)
    e = rng.normal(0, 0.05, 8)
    du = time_project(e, 0.0, em, gain)
    assert abs(du + gain.K @ e).max() < 1e-12


def test_projection_consistency(setup):
    """Along undisturbed evolution of (E0, dU = -K E0), the projection
    returns exactly dU at every phase time."""
    _, _, em, gain = setup
    rng = np.random.default_rng(6)
    T = em.dyn.config.step_time
    for _ in range(20):
        e0 = rng.normal(0, 0.05, 8)
        du = -gain.K @ e0
        t = rng.uniform(0.0, 0.999) * T
        at, bt = em.intra_phase(t)
        e_t = at @ e0 + bt @ du
        du_t = time_project(e_t, t, em, gain)
        assert abs(du_t - du).max() < 1e-9


def test_projection_constant_over_phase(setup):
    _, _, em, gain = setup
    rng = np.random.default_rng(7)
    e0 = rng.normal(0, 0.03, 8)
    du = -gain.K @ e0
    vals = []
    for t in np.linspace(0.0, 0.95 * em.dyn.config.step_time, 8):
        at, bt = em.intra_phase(t)
        vals.append(time_project(at @ e0 + bt @ du, t, em, gain))
    spread = np.ptp(np.array(vals), axis=0)
    assert spread.max() < 1e-9


def test_projection_fallback():
    body = scale_body(70, 1.7)
    cfg = make_config(speed=1.0, freq=1.7)
    em = error_model(WalkingDynamics(body, cfg))
    gain = dlqr_gain(em)
    prev = np.arange(8.0)

    class Singular:
        dyn = em.dyn

        def intra_phase(self, t):
            return np.zeros((8, 8)), np.zeros((8, 8))

    out = time_project(np.ones(8), 0.1, Singular(), gain, fallback=prev)
    assert np.allclose(out, prev)


def test_decay_after_transient(setup):
    """Closed-loop error norm decays monotonically after at most 2 steps."""
    _, _, em, gain = setup
    closed = em.ahat - em.bhat @ gain.K
    rng = np.random.default_rng(8)
    for _ in range(10):
        e = rng.normal(0, 0.1, 8)
        norms = []
        for _ in range(8):
            e = closed @ e
            norms.append(np.linalg.norm(e))
        assert all(b <= a * (1 + 1e-12) for a, b in zip(norms[1:], norms[2:]))
