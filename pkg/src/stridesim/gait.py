"""Periodic open-loop gait synthesis.

A step maps onto its mirrored successor: evolving the initial state
over one step, exchanging the feet (S), extracting foot- and
pelvis-relative vectors (M) and flipping lateral components (O) must
reproduce the initial relative vectors, while initial swing- and
stance-foot velocities vanish (N q = 0).  Those 12 linear conditions on
(Qbar, Ubar) leave an 8-dimensional family; the stance-ankle torque
policy (4), the average-speed condition (1) and the stance-at-origin
anchor (2) pin all but the last, which a least-squares minimization of
the swing-hip torque parameters resolves.  See docs/gait.md.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from .config import GaitConfig
from .dynamics import (NQ, PELVIS_X, STANCE_X, STANCE_Y, WalkingDynamics,
                       support_exchange_matrix)
from .errors import GaitSolveError, InvalidParameterError

# hip-torque entries of Ubar = [u_c(4); u_r(4)]
HIP_PARAM_IDX = (0, 1, 4, 5)


@dataclass(frozen=True)
class SymmetryOps:
    """Constant block operators of the step-to-step symmetry conditions."""
    S: np.ndarray      # 12x12 support exchange
    M: np.ndarray      # 8x12  relative-vector extraction
    Mhat: np.ndarray   # 12x8  relative-vector embedding (M @ Mhat = I8)
    N: np.ndarray      # 4x12  swing- and stance-foot velocity rows
    O: np.ndarray      # 8x8   lateral mirror


def build_symmetry_ops() -> SymmetryOps:
    """The operator set; independent of body size (relative-vector definition)."""
    mx = np.zeros((4, 6))
    mx[0:2, 0:2] = np.eye(2)            # swing - stance
    mx[0:2, 4:6] = -np.eye(2)
    mx[2:4, 2:4] = np.eye(2)            # pelvis - stance
    mx[2:4, 4:6] = -np.eye(2)
    mhx = np.zeros((6, 4))
    mhx[0:4, 0:4] = np.eye(4)
    n = np.zeros((4, 12))
    n[0:2, 6:8] = np.eye(2)             # swing-foot velocity
    n[2:4, 10:12] = np.eye(2)           # stance-foot velocity
    return SymmetryOps(
        S=support_exchange_matrix(),
        M=la.block_diag(mx, mx),
        Mhat=la.block_diag(mhx, mhx),
        N=n,
        O=np.diag([1.0, -1.0] * 4),
    )


OPS = build_symmetry_ops()


@dataclass(frozen=True)
class PeriodicGait:
    """One solved open-loop step: initial state, torque profile, constants."""
    qbar: np.ndarray          # 12, stance foot at the origin
    ubar: np.ndarray          # 8  = [u_c; u_r]
    vbar: np.ndarray          # 5
    config: GaitConfig
    dyn: WalkingDynamics
    residual: float           # max over both symmetry condition rows
    speed_error: float

    def nominal_state(self, t: float) -> np.ndarray:
        """qbar(t) = A(t) Qbar + B(t) Ubar + C(t) Vbar for t in [0, T]."""
        if t < -1e-12 or t > self.config.step_time + 1e-9:
            raise InvalidParameterError(f"t={t} outside the step")
        return self.dyn.propagate(self.qbar, self.ubar, self.vbar, t)

    def nominal_torque(self, t: float) -> np.ndarray:
        return self.ubar[:4] + t * self.ubar[4:]


def periodicity_system(dyn: WalkingDynamics, vbar: np.ndarray):
    """The stacked symmetry conditions  L [Qbar; Ubar] = rhs  (12 x 20).

    Its null space has dimension exactly 8 for non-degenerate steps.
    """
    A, B, C = dyn.transition(dyn.config.step_time)
    oms = OPS.O @ OPS.M @ OPS.S
    lhs = np.zeros((12, 20))
    lhs[0:8, 0:NQ] = OPS.M - oms @ A
    lhs[0:8, NQ:20] = -oms @ B
    lhs[8:12, 0:NQ] = OPS.N
    rhs = np.zeros(12)
    rhs[0:8] = oms @ C @ vbar
    return lhs, rhs


def _policy_rows(dyn: WalkingDynamics, cfg: GaitConfig, vbar: np.ndarray):
    """Ankle-torque policy, average speed and stance-anchor rows (7 x 20)."""
    body = dyn.body
    A, B, C = dyn.transition(cfg.step_time)
    mt = body.m1 + body.m2 + body.m3
    rows = np.zeros((7, 20))
    rhs = np.zeros(7)
    # lateral stance-ankle torques are zero
    rows[0, NQ + 3] = 1.0
    rows[1, NQ + 7] = 1.0
    # sagittal stance-ankle torque implements the linear center-of-pressure
    # travel from the heel (the foot point, at touch-down) to the toe over
    # the step, mirrored when walking backward and stationary in place:
    # tau(t) = -Mt g x_cop(t) with x_cop = sigma h t / T under static load
    sigma = float(np.sign(cfg.speed))
    rows[2, NQ + 2] = 1.0
    rhs[2] = 0.0
    rows[3, NQ + 6] = 1.0
    rhs[3] = -sigma * mt * body.gravity * body.foot_length / cfg.step_time
    # average forward speed: pelvis sagittal displacement over the step
    rows[4, 0:NQ] = A[PELVIS_X]
    rows[4, PELVIS_X] -= 1.0
    rows[4, NQ:20] = B[PELVIS_X]
    rhs[4] = cfg.speed * cfg.step_time - float(C[PELVIS_X] @ vbar)
    # anchor: stance foot at the origin
    rows[5, STANCE_X] = 1.0
    rows[6, STANCE_Y] = 1.0
    return rows, rhs


def solve_periodic_gait(dyn: WalkingDynamics, config: GaitConfig | None = None) -> PeriodicGait:
    """Find the open-loop periodic step for the configured support side."""
    cfg = config if config is not None else dyn.config
    mine = (cfg.step_time, cfg.ds_time, cfg.slope, cfg.torso)
    ref = (dyn.config.step_time, dyn.config.ds_time, dyn.config.slope, dyn.config.torso)
    if mine != ref:
        # only the timing and the fixed angles shape the dynamics matrices;
        # speed, forces and the support side enter through the constraint
        # right-hand sides and the constant vector
        raise InvalidParameterError("config timing/angles must match the dynamics object")
    vbar = np.asarray(cfg.const_vector())
    lhs_p, rhs_p = periodicity_system(dyn, vbar)
    lhs_q, rhs_q = _policy_rows(dyn, cfg, vbar)
    G = np.vstack([lhs_p, lhs_q])
    h = np.concatenate([rhs_p, rhs_q])

    # one SVD gives the particular solution, the rank and the null basis
    u_svd, sv, vt = np.linalg.svd(G, full_matrices=True)
    tol = max(G.shape) * np.finfo(float).eps * sv[0]
    rank = int((sv > tol).sum())
    if rank < G.shape[0]:
        raise GaitSolveError(
            f"constraint system rank {rank} < {G.shape[0]} (T={cfg.step_time}); "
            "degenerate step timing or body")
    z0 = vt[:rank].T @ ((u_svd.T @ h)[:rank] / sv[:rank])
    nb = vt[rank:].T
    if nb.shape[1] > 0:
        # resolve the remaining freedom by minimal swing-hip torque parameters
        P = np.zeros((4, 20))
        for i, j in enumerate(HIP_PARAM_IDX):
            P[i, NQ + j] = 1.0
        xi, *_ = np.linalg.lstsq(P @ nb, -P @ z0, rcond=None)
        z0 = z0 + nb @ xi

    qbar, ubar = z0[:NQ], z0[NQ:]
    res_p = lhs_p @ z0 - rhs_p
    residual = float(abs(res_p).max())
    A, B, C = dyn.transition(cfg.step_time)
    disp = float((A[PELVIS_X] @ qbar + B[PELVIS_X] @ ubar + C[PELVIS_X] @ vbar) - qbar[PELVIS_X])
    speed_error = abs(disp / cfg.step_time - cfg.speed)
    if residual > 1e-9 or speed_error > 1e-9:
        raise GaitSolveError(
            f"gait residual {residual:.2e} / speed error {speed_error:.2e} too large")
    return PeriodicGait(qbar=qbar, ubar=ubar, vbar=vbar, config=cfg, dyn=dyn,
                        residual=residual, speed_error=speed_error)
