"""Closed-form human-like walking trajectory engine."""

from .body import BodyModel, scale_body
from .config import GaitConfig, make_config
from .control import dlqr_gain, error_model, measure_error, time_project
from .dynamics import WalkingDynamics, exchange_support
from .gait import PeriodicGait, solve_periodic_gait
from .kinematics import Pose, convert
from .sim import Frame, Walker, run_frames

__all__ = [
    "BodyModel", "scale_body", "GaitConfig", "make_config",
    "WalkingDynamics", "exchange_support",
    "PeriodicGait", "solve_periodic_gait",
    "dlqr_gain", "error_model", "measure_error", "time_project",
    "Pose", "convert",
    "Frame", "Walker", "run_frames",
]
