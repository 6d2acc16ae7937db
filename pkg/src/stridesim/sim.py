"""Simulation engine: event-split closed-form stepping and frame sampling.

A walker advances by exact matrix-exponential segments, splitting time
only at phase boundaries (double-to-single support, support exchange),
push window edges and parameter changes; there is no integration step.
The stabilizing correction is recomputed at every emitted frame and at
step edges, then held constant over the following segment, which is
exactly optimal along undisturbed motion.  One walker is single-owner;
independent walkers can run in parallel.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import lapack

from .body import BodyModel
from .config import GaitConfig, check_bounds
from .control import (RCOND_LIMIT, dlqr_gain, error_model, measure_error,
                      time_project)
from .dynamics import _UC, _UR, _V, _XI, _ZETA, NAUG, WalkingDynamics, exchange_support
from .errors import GeometryError, InvalidParameterError, WorkspaceError
from .gait import solve_periodic_gait
from .kinematics import Pose, convert

_EPS = 1e-12
_FOOT_IDX = (0, 1, 4, 5)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Push:
    start: float
    duration: float
    fx: float
    fy: float

    @property
    def end(self) -> float:
        return self.start + self.duration


@dataclass
class Frame:
    """One sampled display frame in world coordinates."""
    t: float
    pose: Pose | None            # slope-frame pose (None if infeasible)
    pelvis: np.ndarray | None    # world pelvis
    joints: dict | None          # world joint positions per side
    angles: dict | None
    err_norm: float
    du_norm: float
    push_active: bool
    infeasible: bool


def _world_rotation(slope: float) -> np.ndarray:
    c, s = math.cos(slope), math.sin(slope)
    return np.array([[c, 0.0, -s], [0.0, 1.0, 0.0], [s, 0.0, c]])


class Walker:
    """One simulated character; owns its state, gait pair and controller."""

    def __init__(self, body: BodyModel, config: GaitConfig, method: str = "adaptive",
                 state_weight: float = 1.0, input_weight: float = 1e-5):
        self.body = body
        self.method = method
        self.weights = (state_weight, input_weight)
        self.t = 0.0
        self.step_index = 0
        self.phase_start = 0.0
        self.pushes: list[Push] = []
        self._rebuild(config.with_support(1))
        self.q = self.gaits[1].qbar.copy()
        self.d = 1
        self.du = np.zeros(8)
        self._reset_aug()

    # ------------------------------------------------------------ construction

    def _rebuild(self, config: GaitConfig):
        self.config = config
        self.dyn = WalkingDynamics(self.body, config)
        self.gaits = {1: solve_periodic_gait(self.dyn, config.with_support(1)),
                      -1: solve_periodic_gait(self.dyn, config.with_support(-1))}
        self.em = error_model(self.dyn)
        self.gain = dlqr_gain(self.em, *self.weights)
        self._world_rot = _world_rotation(config.slope)
        self._cfg_side = {1: config.with_support(1), -1: config.with_support(-1)}
        from .gait import OPS
        self._m_op = OPS.M
        self._mhat_cols = (0, 1, 2, 3, 6, 7, 8, 9)
        # (embedding + gain) folded into one operator: for the 8x20 block
        # W = M Phi[q, 0:20], W @ sel_k = A~ - B~ K
        sel_k = np.zeros((20, 8))
        for i, c in enumerate(self._mhat_cols):
            sel_k[c, i] = 1.0
        sel_k[12:20, :] = -self.gain.K
        self._sel_k = sel_k
        self._vbase = {1: np.asarray(config.with_support(1).const_vector()),
                       -1: np.asarray(config.with_support(-1).const_vector())}

    @property
    def phase_t(self) -> float:
        return self.t - self.phase_start

    @property
    def gait(self):
        return self.gaits[self.d]

    def _push_force(self, t: float):
        fx = fy = 0.0
        for p in self.pushes:
            if p.start - _EPS <= t < p.end - _EPS:
                fx += p.fx
                fy += p.fy
        return fx, fy

    def _const_vector(self, t: float) -> np.ndarray:
        v = self._vbase[self.d].copy()
        if self.pushes:
            fx, fy = self._push_force(t)
            v[3] += fx
            v[4] += fy
        return v

    def _reset_aug(self):
        """Rebuild the augmented propagation state around the current q."""
        y = np.zeros(NAUG)
        y[0:12] = self.q
        tp = self.phase_t
        y[_UC] = self.gait.ubar[:4] + self.du[:4] + tp * (self.gait.ubar[4:] + self.du[4:])
        y[_UR] = self.gait.ubar[4:] + self.du[4:]
        y[_V] = self._const_vector(self.t)
        y[_ZETA] = tp * self.q[list(_FOOT_IDX)]
        y[_XI] = tp * y[_V]
        self._y = y
        # running transition from phase start (exact; advanced per segment)
        if tp == 0.0:
            self._phi = np.eye(NAUG)
        else:
            tds = self.config.ds_time
            if self.dyn.ds is not None and tp <= tds:
                self._phi = self.dyn.segment_expm(True, tp)
            elif self.dyn.ds is None:
                self._phi = self.dyn.segment_expm(False, tp)
            else:
                self._phi = self.dyn.segment_expm(False, tp - tds) @ self.dyn.segment_expm(True, tds)
        # nominal step carrier: qbar(t) = (phi @ ybar)[0:12]
        ybar = np.zeros(NAUG)
        ybar[0:12] = self.gait.qbar
        ybar[_UC] = self.gait.ubar[:4]
        ybar[_UR] = self.gait.ubar[4:]
        ybar[_V] = self.gait.vbar
        self._ybar = ybar

    def _nominal_now(self) -> np.ndarray:
        return (self._phi @ self._ybar)[0:12]

    def _intra_phase_now(self):
        A = self._phi[0:12, 0:12]
        B = self._phi[0:12, 12:20]
        return A, B

    # --------------------------------------------------------------- stepping

    def _next_boundary(self, t_stop: float) -> float:
        best = t_stop
        tds = self.config.ds_time
        if tds > 0.0 and self.phase_t < tds - _EPS:
            c = self.phase_start + tds
            if self.t + _EPS < c < best:
                best = c
        c = self.phase_start + self.config.step_time
        if self.t + _EPS < c < best:
            best = c
        for p in self.pushes:
            for edge in (p.start, p.end):
                if self.t + _EPS < edge < best:
                    best = edge
        return best

    def advance(self, t_stop: float):
        """Advance wall time by closed-form segments to t_stop."""
        if t_stop < self.t - 1e-9:
            raise InvalidParameterError("cannot step backward in time")
        while self.t < t_stop - _EPS:
            t_next = self._next_boundary(t_stop)
            in_ds = self.dyn.ds is not None and self.phase_t < self.config.ds_time - _EPS
            dt = t_next - self.t
            phi = self.dyn.segment_expm(in_ds, dt)
            self._y = phi @ self._y
            self._phi = phi @ self._phi
            self.q = self._y[0:12]
            self.t = t_next
            step_end = self.phase_start + self.config.step_time
            if abs(t_next - step_end) <= 1e-9:
                self._exchange()
            elif self.pushes:
                # push edges change the constant forcing mid-phase
                self._y[_V] = self._const_vector(self.t)
        self.t = t_stop
        self.q = self._y[0:12]

    def _exchange(self):
        self.q = exchange_support(self._y[0:12])
        self.d = -self.d
        self.step_index += 1
        self.phase_start = self.t
        e = measure_error(self.q, self.gait.qbar)
        self.du = time_project(e, 0.0, self.em, self.gain, fallback=self.du)
        self._reset_aug()

    def control_sample(self):
        """Recompute the corrective torque profile from the current error.

        Solves the projection block system in place (preallocated buffers;
        the gain rows are constant).  Near-singular systems hold the last
        correction, as in :func:`stridesim.control.project_correction`.
        """
        phi = self._phi
        nom = phi @ self._ybar
        e = self._m_op @ (self.q - nom[0:12])
        # Schur form of the projection block system: dU = -K E with
        # (A~ - B~ K) E = e; same solution and the same singular set
        m = (self._m_op @ phi[0:12, 0:20]) @ self._sel_k
        lu, piv, info = lapack.dgetrf(m)
        diag = np.abs(lu.diagonal())
        suspicious = info != 0 or diag.min() <= 1e-10 * diag.max()
        if suspicious:
            # exact reciprocal-condition estimate only in the rare regime
            anorm = float(np.abs(m).sum(axis=0).max())
            rcond = lapack.dgecon(lu, anorm, norm="1")[0] if info == 0 else 0.0
            if rcond < RCOND_LIMIT:
                log.warning("time projection near-singular (rcond=%.2e); holding last correction", rcond)
                du = self.du
            else:
                sol, _ = lapack.dgetrs(lu, piv, e)
                du = -(self.gain.K @ sol)
        else:
            sol, _ = lapack.dgetrs(lu, piv, e)
            du = -(self.gain.K @ sol)
        delta_c = du[:4] - self.du[:4]
        delta_r = du[4:] - self.du[4:]
        self._y[_UC] += delta_c + self.phase_t * delta_r
        self._y[_UR] += delta_r
        self.du = du
        return e, du

    # ----------------------------------------------------------------- events

    def apply_push(self, fx: float, fy: float, start: float, duration: float):
        """Queue a constant-force window; the controller is never told."""
        if duration < 0.0:
            raise InvalidParameterError("push duration must be >= 0")
        if start < self.t - 1e-9:
            raise InvalidParameterError("push starts in the past")
        if duration == 0.0 or (fx == 0.0 and fy == 0.0):
            return
        self.pushes.append(Push(start=start, duration=duration, fx=fx, fy=fy))
        self._y[_V] = self._const_vector(self.t)

    def set_params(self, **changes):
        """Re-solve the nominal gait and controller for changed parameters.

        The phase position is preserved as a fraction of the step; the
        current state becomes an error against the new nominal, which the
        time projection absorbs at the next sample.
        """
        allowed = {"speed", "freq", "ds_ratio", "slope", "torso", "clearance",
                   "drag", "lateral_force"}
        unknown = set(changes) - allowed
        if unknown:
            raise InvalidParameterError(f"unknown parameters: {sorted(unknown)}")
        for name, value in changes.items():
            check_bounds(name, float(value))
        step_time = 1.0 / changes["freq"] if "freq" in changes else self.config.step_time
        ratio = changes.get("ds_ratio", self.config.ds_time / self.config.step_time)
        new_config = replace(
            self.config,
            step_time=step_time,
            ds_time=ratio * step_time,
            speed=changes.get("speed", self.config.speed),
            slope=changes.get("slope", self.config.slope),
            torso=changes.get("torso", self.config.torso),
            clearance=changes.get("clearance", self.config.clearance),
            drag=changes.get("drag", self.config.drag),
            lateral_force=changes.get("lateral_force", self.config.lateral_force),
            support=self.d,
        )
        frac = self.phase_t / self.config.step_time
        self._rebuild(new_config)
        self.phase_start = self.t - frac * new_config.step_time
        self.du = np.zeros(8)
        self._reset_aug()
        self.control_sample()

    # ---------------------------------------------------------------- sampling

    def sample_frame(self) -> Frame:
        tp = min(self.phase_t, self.config.step_time)
        e = measure_error(self.q, self._nominal_now())
        err_norm = float(np.linalg.norm(e))
        du_norm = float(np.linalg.norm(self.du))
        push = self._push_force(self.t) != (0.0, 0.0)
        infeasible = False
        try:
            pose = convert(self.q, tp, self._cfg_side[self.d],
                           self.body, method=self.method)
        except (GeometryError, WorkspaceError):
            # extreme transient: degrade gracefully to a clamped posture and
            # flag the frame; the model state itself keeps evolving exactly
            infeasible = True
            try:
                pose = convert(self.q, tp, self._cfg_side[self.d],
                               self.body, method=self.method, clamp=True)
            except (GeometryError, WorkspaceError):
                return Frame(t=self.t, pose=None, pelvis=None, joints=None,
                             angles=None, err_norm=err_norm, du_norm=du_norm,
                             push_active=push, infeasible=True)
        infeasible = infeasible or pose.stance.clamped or pose.swing.clamped
        R = self._world_rot
        joints = {}
        angles = {}
        for side in ("left", "right"):
            leg = getattr(pose, side)
            joints[side] = {j: R @ getattr(leg, j) for j in ("hip", "knee", "ankle", "toe")}
            angles[side] = {a: getattr(leg, a) for a in
                            ("hip_sag", "hip_lat", "knee_flex", "ankle_flex", "foot_pitch")}
        return Frame(t=self.t, pose=pose, pelvis=R @ pose.pelvis, joints=joints,
                     angles=angles, err_norm=err_norm, du_norm=du_norm,
                     push_active=push, infeasible=infeasible)


@dataclass(frozen=True)
class ParamEvent:
    at: float
    changes: dict


def run_frames(walker: Walker, duration: float, fps: float,
               param_events: list[ParamEvent] = ()):
    """Yield frames at the display rate, applying scheduled events exactly."""
    n = int(round(duration * fps))
    dt = 1.0 / fps
    events = sorted(param_events, key=lambda e: e.at)
    i = 0
    for k in range(n):
        t_k = k * dt
        while i < len(events) and events[i].at <= t_k + _EPS:
            walker.advance(events[i].at)
            walker.set_params(**events[i].changes)
            i += 1
        walker.advance(t_k)
        walker.control_sample()
        yield walker.sample_frame()
