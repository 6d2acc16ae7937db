"""Walking dynamics: three coupled linear pendulums with closed-form stepping.

The model keeps every mass on a constant-height plane of a coordinate
frame attached to the (possibly inclined) ground: two leg pendulums with
their point mass halfway between foot and hip, and a torso pendulum held
at a fixed bend angle by an ideal stance-hip actuator, all joined by a
massless pelvis of width ``w``.  The state is the horizontal position of
swing foot, pelvis and stance foot (sagittal and lateral each),

    x = [swing, pelvis, stance] in R^6,    q = [x, xdot] in R^12,

driven by swing-hip and stance-ankle torques u in R^4 and a constant
vector v = [d, sin(torso+slope), sin(slope), F_sag, F_lat].  Eliminating
the internal joint forces from the per-limb Newton/moment balances gives
an exactly linear second-order system

    xdd(t) = C_x x(t) + C_u u(t) + C_v v            (single support)
    xdd(t) = (C_x0 + t C_x1) x + C_u u(t) + (C_v0 + t C_v1) v   (double support)

where the double-support time dependence comes from the linear hand-off
of the vertical load between the two pinned feet and touches only the
(constant) foot-position and d columns.  With piecewise-linear torque
profiles u(t) = u_c + t u_r the whole step has an exact solution

    q(t) = A(t) q(0) + B(t) [u_c; u_r] + C(t) v

computed from the exponential of one constant augmented generator per
phase.  See docs/dynamics.md for the full derivation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from .body import BodyModel
from .config import GaitConfig
from .errors import InvalidParameterError

# state component indices (positions; velocities are +6)
SWING_X, SWING_Y, PELVIS_X, PELVIS_Y, STANCE_X, STANCE_Y = range(6)
NX = 6
NQ = 12
NU = 4          # [hip_sag, hip_lat, ankle_sag, ankle_lat]
NV = 5          # [d, sin(torso+slope), sin(slope), F_sag, F_lat]
IV_D, IV_TORSO, IV_SLOPE, IV_FSAG, IV_FLAT = range(NV)

# augmented propagation state [q, u_c, u_r, v, zeta, xi]
_Q = slice(0, 12)
_UC = slice(12, 16)
_UR = slice(16, 20)
_V = slice(20, 25)
_ZETA = slice(25, 29)   # integral of the foot positions (= t * feet while pinned)
_XI = slice(29, 34)     # integral of v (= t * v for constant v)
NAUG = 34
_FOOT_COLS = (SWING_X, SWING_Y, STANCE_X, STANCE_Y)


def support_exchange_matrix() -> np.ndarray:
    """S: swaps the swing and stance blocks of q (positions and velocities)."""
    sx = np.zeros((6, 6))
    sx[0:2, 4:6] = np.eye(2)
    sx[2:4, 2:4] = np.eye(2)
    sx[4:6, 0:2] = np.eye(2)
    return la.block_diag(sx, sx)


def exchange_support(q: np.ndarray) -> np.ndarray:
    """Swap swing and stance roles at the end of a step; pelvis unchanged."""
    out = np.array(q, dtype=float)
    for off in (0, 6):
        out[off + 0:off + 2], out[off + 4:off + 6] = \
            q[off + 4:off + 6].copy(), q[off + 0:off + 2].copy()
    return out


@dataclass
class _PhaseMatrices:
    """One support phase's continuous-dynamics matrices (affine in phase time)."""
    cx0: np.ndarray
    cx1: np.ndarray      # zero in single support
    cu: np.ndarray
    cv0: np.ndarray
    cv1: np.ndarray      # zero in single support

    def accel(self, x, u, v, t):
        return (self.cx0 + t * self.cx1) @ x + self.cu @ u + (self.cv0 + t * self.cv1) @ v


class WalkingDynamics:
    """Continuous dynamics and closed-form transition matrices for one
    (body, configuration) pair.  Immutable after construction; transition
    matrices are cached per queried time."""

    def __init__(self, body: BodyModel, config: GaitConfig):
        if body.m1 <= 0 or body.m2 <= 0 or body.m3 <= 0 or body.leg_length <= 0:
            raise InvalidParameterError("degenerate body model")
        self.body = body
        self.config = config
        self.z0 = body.leg_length * math.cos(config.slope)
        if self.z0 <= 0:
            raise InvalidParameterError("slope makes the pelvis plane degenerate")
        self._ctheta = math.cos(config.torso + config.slope)
        self._stheta = math.sin(config.torso + config.slope)
        self.ss = self._assemble_phase(double_support=False)
        self.ds = self._assemble_phase(double_support=True) if config.ds_time > 0 else None
        self._gen_ss = self._generator(self.ss, integrators=False)
        self._gen_ds = self._generator(self.ds, integrators=True) if self.ds else None
        self._expm_cache: dict[tuple[bool, float], np.ndarray] = {}
        self._trans_cache: dict[float, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}

    # ---------------------------------------------------------------- assembly

    def _plane_rows(self, plane: str, double_support: bool):
        """One plane's linear equations  E * unknowns = R * [x, u, v, t*x, t*v].

        Unknowns (single support):  [fdd, cdd, H_st, H_sw, G_st, T]
        Unknowns (double support):  [cdd, H_st, H_sw, G_st, G_sw, T]
        with f, c, s the planar swing/pelvis/stance coordinates, H_* the
        horizontal hip forces on each leg, G_* the horizontal ground
        forces and T the stance-hip torque holding the torso.  The
        lateral plane uses mirrored torque sign conventions so both
        planes share one set of equations; only the plane constants
        differ (tangential gravity and torso moments are sagittal, the
        pelvis-width offsets are lateral).  The *1 return matrices carry
        the double-support load hand-off (coefficients of t*x and t*v).
        """
        body, g = self.body, self.body.gravity
        m1, m2, m3 = body.m1, body.m2, body.m3
        mt = m1 + m2 + m3
        i1 = i2 = body.leg_inertia
        z0 = self.z0
        r3c = body.torso_com_height * self._ctheta
        w = body.pelvis_width
        sag = plane == "sag"
        # per-unit-d lateral hip offsets (stance hip at -d w/2, swing at +d w/2)
        o_st = 0.0 if sag else -w / 2.0
        o_sw = 0.0 if sag else +w / 2.0
        iv_f = IV_FSAG if sag else IV_FLAT

        # vertical forces as (const, slope-in-t) pairs; t spans the DS phase
        if double_support:
            tds = self.config.ds_time
            n_st = (0.0, mt * g / tds)            # stance-foot normal load
            n_sw = (mt * g, -mt * g / tds)        # trailing-foot normal load
            v_st = (m1 * g - n_st[0], -n_st[1])   # pelvis-on-stance-leg vertical force
            v_sw = (m2 * g - n_sw[0], -n_sw[1])
        else:
            n_st = (mt * g, 0.0)
            v_st = (-(m2 + m3) * g, 0.0)
            v_sw = (m2 * g, 0.0)

        # unknown ordering
        if double_support:
            FDD = None
            CDD, HST, HSW, GST, GSW, T = range(6)
        else:
            FDD, CDD, HST, HSW, GST, T = range(6)
            GSW = None
        n = 6
        E = np.zeros((n, n))
        rx0 = np.zeros((n, 3))   # columns f, c, s
        rx1 = np.zeros((n, 3))
        ru = np.zeros((n, 2))    # columns hip, ankle
        rv0 = np.zeros((n, NV))
        rv1 = np.zeros((n, NV))

        def grav(row, m):
            if sag:
                rv0[row, IV_SLOPE] += -m * g   # tangential gravity -m g sin(slope)

        # swing-leg Newton (horizontal)
        r = 0
        if double_support:
            E[r, CDD] = m2 / 2.0
            E[r, GSW] = -1.0
        else:
            E[r, FDD] = m2 / 2.0
            E[r, CDD] = m2 / 2.0
        E[r, HSW] = -1.0
        grav(r, m2)

        # swing-leg moment balance about its mass center
        r = 1
        if double_support:
            E[r, CDD] = i2 / z0
            E[r, GSW] = z0 / 2.0
            nf, vf = n_sw, v_sw
            # -((f - c - o_sw)/2) Nf - ((c + o_sw - f)/2) Vf
            rx0[r, 0] += (-nf[0] + vf[0]) / 2.0
            rx1[r, 0] += (-nf[1] + vf[1]) / 2.0
            rx0[r, 1] += (nf[0] - vf[0]) / 2.0
            rx1[r, 1] += (nf[1] - vf[1]) / 2.0
            rv0[r, IV_D] += o_sw * (nf[0] - vf[0]) / 2.0
            rv1[r, IV_D] += o_sw * (nf[1] - vf[1]) / 2.0
        else:
            E[r, FDD] = -i2 / z0
            E[r, CDD] = +i2 / z0
            rx0[r, 0] += +v_sw[0] / 2.0   # f
            rx0[r, 1] += -v_sw[0] / 2.0   # c
            rv0[r, IV_D] += -o_sw * v_sw[0] / 2.0
        E[r, HSW] = -z0 / 2.0
        ru[r, 0] = 1.0

        # stance-leg Newton
        r = 2
        E[r, CDD] = m1 / 2.0
        E[r, GST] = -1.0
        E[r, HST] = -1.0
        grav(r, m1)

        # stance-leg moment balance about its mass center
        r = 3
        E[r, CDD] = i1 / z0
        E[r, GST] = z0 / 2.0
        E[r, HST] = -z0 / 2.0
        E[r, T] = 1.0
        rx0[r, 2] += (-n_st[0] + v_st[0]) / 2.0   # s
        rx1[r, 2] += (-n_st[1] + v_st[1]) / 2.0
        rx0[r, 1] += (n_st[0] - v_st[0]) / 2.0    # c
        rx1[r, 1] += (n_st[1] - v_st[1]) / 2.0
        rv0[r, IV_D] += o_st * (n_st[0] - v_st[0]) / 2.0
        rv1[r, IV_D] += o_st * (n_st[1] - v_st[1]) / 2.0
        ru[r, 1] = 1.0

        # pelvis + torso assembly Newton
        r = 4
        E[r, CDD] = m3
        E[r, HST] = 1.0
        E[r, HSW] = 1.0
        grav(r, m3)
        rv0[r, iv_f] += 1.0

        # pelvis + torso assembly moment balance about the pelvis center
        # (determines the ideal stance-hip torque T).  The torso's inertial
        # reaction acts at the pelvis plane (no r3 * m3 * cdd lever), so the
        # massless-leg limit is exactly the inverted pendulum at height z0;
        # only the static posture moment and external-force arms keep the
        # torso lever.  See docs/dynamics.md.
        r = 5
        E[r, T] = 1.0
        ru[r, 0] = 1.0
        rv0[r, iv_f] += -r3c
        if sag:
            rv0[r, IV_TORSO] += -m3 * g * body.torso_com_height
            rv0[r, IV_SLOPE] += +m3 * g * r3c
        else:
            rv0[r, IV_D] += (w / 2.0) * (v_st[0] - v_sw[0])
            rv1[r, IV_D] += (w / 2.0) * (v_st[1] - v_sw[1])
        return E, rx0, rx1, ru, rv0, rv1, (FDD, CDD)

    def _assemble_phase(self, double_support: bool) -> _PhaseMatrices:
        cx0 = np.zeros((NX, NX))
        cx1 = np.zeros((NX, NX))
        cu = np.zeros((NX, NU))
        cv0 = np.zeros((NX, NV))
        cv1 = np.zeros((NX, NV))
        for plane, cols, urow in (("sag", (SWING_X, PELVIS_X, STANCE_X), (0, 2)),
                                  ("lat", (SWING_Y, PELVIS_Y, STANCE_Y), (1, 3))):
            E, rx0, rx1, ru, rv0, rv1, (FDD, CDD) = self._plane_rows(plane, double_support)
            sol = np.linalg.solve(E, np.hstack([rx0, rx1, ru, rv0, rv1]))
            rows = {} if FDD is None else {cols[0]: sol[FDD]}
            rows[cols[1]] = sol[CDD]
            for xrow, srow in rows.items():
                x0, x1 = srow[0:3], srow[3:6]
                uu, v0, v1 = srow[6:8], srow[8:8 + NV], srow[8 + NV:8 + 2 * NV]
                for j, col in enumerate(cols):
                    cx0[xrow, col] = x0[j]
                    cx1[xrow, col] = x1[j]
                cu[xrow, urow[0]] = uu[0]
                cu[xrow, urow[1]] = uu[1]
                cv0[xrow] += v0
                cv1[xrow] += v1
        if double_support:
            # the load hand-off must not touch the moving pelvis columns,
            # otherwise the closed-form propagation below would be wrong
            pelvis_ramp = max(abs(cx1[:, PELVIS_X]).max(), abs(cx1[:, PELVIS_Y]).max())
            scale = max(1.0, abs(cx1).max())
            if pelvis_ramp > 1e-9 * scale:
                raise AssertionError(
                    f"double-support load hand-off leaks into pelvis columns ({pelvis_ramp:.2e})")
            cx1[:, PELVIS_X] = 0.0
            cx1[:, PELVIS_Y] = 0.0
        else:
            assert abs(cx1).max() < 1e-12 and abs(cv1).max() < 1e-12
        return _PhaseMatrices(cx0=cx0, cx1=cx1, cu=cu, cv0=cv0, cv1=cv1)

    # ------------------------------------------------------------- propagation

    def _generator(self, ph: _PhaseMatrices, integrators: bool) -> np.ndarray:
        L = np.zeros((NAUG, NAUG))
        L[0:6, 6:12] = np.eye(6)
        L[6:12, 0:6] = ph.cx0
        L[6:12, _UC] = ph.cu
        L[6:12, _V] = ph.cv0
        L[_UC, _UR] = np.eye(4)
        if integrators:
            L[6:12, _ZETA] = ph.cx1[:, list(_FOOT_COLS)]
            L[6:12, _XI] = ph.cv1
            for k, col in enumerate(_FOOT_COLS):
                L[_ZETA.start + k, col] = 1.0
            L[_XI, _V] = np.eye(NV)
        return L

    def segment_expm(self, double_support: bool, dt: float) -> np.ndarray:
        """Exact propagation operator over dt inside one phase (cached)."""
        key = (double_support, float(dt))
        phi = self._expm_cache.get(key)
        if phi is None:
            gen = self._gen_ds if double_support else self._gen_ss
            phi = la.expm(gen * dt)
            self._expm_cache[key] = phi
        return phi

    def transition(self, t: float):
        """A(t), B(t), C(t) for phase time t in [0, T], double support first."""
        cfg = self.config
        if t < -1e-12 or t > cfg.step_time + 1e-9:
            raise InvalidParameterError(f"phase time {t} outside [0, {cfg.step_time}]")
        t = min(max(t, 0.0), cfg.step_time)
        cached = self._trans_cache.get(t)
        if cached is not None:
            return cached
        tds = cfg.ds_time
        if self.ds is not None and t <= tds:
            phi = self.segment_expm(True, t)
        elif self.ds is None:
            phi = self.segment_expm(False, t)
        else:
            phi = self.segment_expm(False, t - tds) @ self.segment_expm(True, tds)
        out = (phi[_Q, _Q].copy(), phi[_Q, 12:20].copy(), phi[_Q, _V].copy())
        self._trans_cache[t] = out
        return out

    def propagate(self, q0: np.ndarray, torque: np.ndarray, v: np.ndarray, t: float) -> np.ndarray:
        """Closed-form state at phase time t: q(t) = A q0 + B [u_c;u_r] + C v."""
        A, B, C = self.transition(t)
        return A @ np.asarray(q0, float) + B @ np.asarray(torque, float) + C @ np.asarray(v, float)

    def in_double_support(self, t: float) -> bool:
        return self.ds is not None and t < self.config.ds_time

    def accel(self, x, xdot, u, v, t):
        """Continuous accelerations at phase time t (for oracles/diagnostics)."""
        ph = self.ds if self.in_double_support(t) else self.ss
        tl = t if self.in_double_support(t) else 0.0
        return ph.accel(np.asarray(x, float), np.asarray(u, float), np.asarray(v, float), tl)
