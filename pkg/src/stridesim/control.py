"""Step-to-step error regulation and continuous time-projection.

The deviation from the nominal step lives in the 8-dimensional space of
foot- and pelvis-relative vectors, E = O M S (Q - Qbar) at step
boundaries, with discrete dynamics

    E[k+1] = Ahat E[k] + Bhat dU[k],      Chat E[k+1] = 0,

where Chat pins the relative swing-foot velocity at touch-down to zero
(the next step's feet must land at rest).  A discrete LQR over the
swing-hip torque parameters, reduced onto the constraint's null space,
yields the gain K with dU = -K E; the stance-ankle rows of K are
structurally zero so the center-of-pressure policy is never altered.

Between step boundaries, a measured error e(t) = M (q(t) - qbar(t)) is
projected back to an equivalent phase-start pair (E, dU) consistent with
the same gain by solving

    [ A~(t)  B~(t) ] [ E  ]   [ e ]
    [  K      I    ] [ dU ] = [ 0 ],     A~ = M A(t) Mhat,  B~ = M B(t),

and dU is applied immediately; it is constant along undisturbed motion.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg as la
from scipy.linalg import lapack

from .dynamics import WalkingDynamics
from .errors import ControlSynthesisError
from .gait import OPS

log = logging.getLogger(__name__)

# swing-hip entries of [u_c; u_r]; the controller only ever drives these
HIP_ROWS = (0, 1, 4, 5)

CHAT = np.zeros((2, 8))
CHAT[0, 4] = 1.0
CHAT[1, 5] = 1.0

RCOND_LIMIT = 1e-12


@dataclass(frozen=True)
class ErrorModel:
    """Discrete and intra-phase error maps for one (body, config) pair."""
    dyn: WalkingDynamics
    ahat: np.ndarray     # 8x8  O M S A(T) Mhat
    bhat: np.ndarray     # 8x8  O M S B(T)
    chat: np.ndarray     # 2x8

    def intra_phase(self, t: float):
        """A~(t) = M A(t) Mhat and B~(t) = M B(t) on the relative space."""
        A, B, _ = self.dyn.transition(t)
        return OPS.M @ A @ OPS.Mhat, OPS.M @ B

    def step_error(self, q_end: np.ndarray, qbar_end: np.ndarray) -> np.ndarray:
        """E[k+1] from the pre-exchange end-of-step states."""
        return OPS.O @ OPS.M @ OPS.S @ (np.asarray(q_end) - np.asarray(qbar_end))


def error_model(dyn: WalkingDynamics) -> ErrorModel:
    A, B, _ = dyn.transition(dyn.config.step_time)
    oms = OPS.O @ OPS.M @ OPS.S
    return ErrorModel(dyn=dyn, ahat=oms @ A @ OPS.Mhat, bhat=oms @ B, chat=CHAT.copy())


def measure_error(q: np.ndarray, qbar: np.ndarray) -> np.ndarray:
    """Instantaneous relative-space error e(t) = M (q - qbar)."""
    return OPS.M @ (np.asarray(q, float) - np.asarray(qbar, float))


@dataclass(frozen=True)
class DlqrGain:
    K: np.ndarray                 # 8x8, stance-ankle rows zero
    state_weight: float
    input_weight: float
    spectral_radius: float


def dlqr_gain(em: ErrorModel, state_weight: float = 1.0,
              input_weight: float = 1e-5) -> DlqrGain:
    """Constrained discrete LQR over the swing-hip torque parameters.

    The touch-down constraint Chat (Ahat E + Bhat dU) = 0 is eliminated
    by the split dU = dU0(E) + Nc xi: dU0 the minimum-norm particular
    solution and Nc a basis of the constraint's input null space; a
    standard Riccati solve over xi recomposes into one gain K.
    """
    pi = np.zeros((8, 4))
    for col, row in enumerate(HIP_ROWS):
        pi[row, col] = 1.0
    bh = em.bhat @ pi                      # 8x4
    g = em.chat @ bh                       # 2x4
    if np.linalg.matrix_rank(g) < 2:
        raise ControlSynthesisError("touch-down constraint not controllable by hip torques")
    gp = np.linalg.pinv(g)
    h = em.chat @ em.ahat                  # 2x8
    nc = la.null_space(g)                  # 4x2
    a_r = em.ahat - bh @ gp @ h
    b_r = bh @ nc
    q_w = state_weight * np.eye(8)
    r_w = input_weight * np.eye(nc.shape[1])
    try:
        p = la.solve_discrete_are(a_r, b_r, q_w, r_w)
    except Exception as exc:
        raise ControlSynthesisError(f"Riccati solve failed: {exc}") from exc
    k_xi = np.linalg.solve(r_w + b_r.T @ p @ b_r, b_r.T @ p @ a_r)
    k = pi @ (gp @ h + nc @ k_xi)
    closed = em.ahat - em.bhat @ k
    rho = float(max(abs(np.linalg.eigvals(closed))))
    if rho >= 1.0:
        raise ControlSynthesisError(f"constrained closed loop unstable (rho={rho:.6f})")
    if abs(em.chat @ closed).max() > 1e-8:
        raise ControlSynthesisError("touch-down constraint violated by the synthesized gain")
    return DlqrGain(K=k, state_weight=state_weight, input_weight=input_weight,
                    spectral_radius=rho)


def project_correction(atil: np.ndarray, btil: np.ndarray, gain: DlqrGain,
                       e: np.ndarray, fallback: np.ndarray | None = None) -> np.ndarray:
    """Solve the 16x16 projection block system for given intra-phase maps.

    Near-singularity (reciprocal condition below 1e-12) returns the
    previous correction unchanged.
    """
    m = np.zeros((16, 16))
    m[0:8, 0:8] = atil
    m[0:8, 8:16] = btil
    m[8:16, 0:8] = gain.K
    m[8:16, 8:16] = np.eye(8)
    rhs = np.zeros(16)
    rhs[0:8] = np.asarray(e, float)
    anorm = float(abs(m).sum(axis=0).max())
    lu, piv, info = lapack.dgetrf(m)
    rcond = lapack.dgecon(lu, anorm, norm="1")[0] if info == 0 else 0.0
    if rcond < RCOND_LIMIT:
        log.warning("time projection near-singular (rcond=%.2e); holding last correction", rcond)
        return np.zeros(8) if fallback is None else np.asarray(fallback, float)
    sol, _ = lapack.dgetrs(lu, piv, rhs)
    return sol[8:16]


def time_project(e: np.ndarray, t: float, em: ErrorModel, gain: DlqrGain,
                 fallback: np.ndarray | None = None) -> np.ndarray:
    """Corrective torque-profile adjustment for a mid-phase error."""
    atil, btil = em.intra_phase(t)
    return project_correction(atil, btil, gain, np.asarray(e, float), fallback)
