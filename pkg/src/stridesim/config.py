"""Gait configuration, parameter bounds and config-file overrides."""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, replace

from .errors import InvalidParameterError

# Validated steering ranges.  The sim, CLI and service all reject values
# outside these; the service advertises them in its "bounds" handshake.
PARAM_BOUNDS = {
    "speed": (-1.7, 1.7),        # m/s, signed (negative walks backward)
    "freq": (1.0, 2.5),          # steps/s
    "ds_ratio": (0.0, 0.4),      # double-support fraction of the step
    "slope": (-0.2, 0.2),        # rad
    "torso": (-0.15, 0.3),       # rad
    "clearance": (0.0, 0.10),    # swing-toe lift, fraction of leg length
    "drag": (-60.0, 60.0),       # N, sagittal constant force
    "lateral_force": (-60.0, 60.0),  # N, lateral constant force
    "mass": (10.0, 150.0),       # kg
    "height": (0.8, 2.6),        # m
    "fps": (1.0, 240.0),
}
PUSH_BOUNDS = {"force": 150.0, "duration": 2.0}

DEFAULTS = {
    "mass": 70.0, "height": 1.7, "speed": 1.0, "freq": 1.7, "ds_ratio": 0.2,
    "slope": 0.0, "torso": 0.0, "clearance": 0.05, "drag": 0.0,
    "lateral_force": 0.0, "fps": 30.0,
}


@dataclass(frozen=True)
class GaitConfig:
    """One step's fixed walking parameters.

    ``step_time`` is the full step duration T; the first ``ds_time``
    seconds of every step are double support.  ``support`` is +1 or -1
    and selects which hip is the stance side for the current step.
    """

    step_time: float
    ds_time: float
    speed: float = 0.0
    slope: float = 0.0
    torso: float = 0.0
    clearance: float = 0.05
    drag: float = 0.0
    lateral_force: float = 0.0
    support: int = 1

    def __post_init__(self):
        if self.step_time <= 0.0:
            raise InvalidParameterError("step_time must be positive")
        if not 0.0 <= self.ds_time < self.step_time:
            raise InvalidParameterError("need 0 <= ds_time < step_time")
        if self.support not in (-1, 1):
            raise InvalidParameterError("support flag must be +1 or -1")

    @property
    def ss_time(self) -> float:
        return self.step_time - self.ds_time

    def const_vector(self):
        """The constant forcing entries [d, sin(torso+slope), sin(slope), F_sag, F_lat]."""
        return [float(self.support), math.sin(self.torso + self.slope),
                math.sin(self.slope), self.drag, self.lateral_force]

    def with_support(self, d: int) -> "GaitConfig":
        return replace(self, support=d)


def check_bounds(name: str, value: float) -> float:
    lo, hi = PARAM_BOUNDS[name]
    if not (lo <= value <= hi):
        raise InvalidParameterError(f"{name}={value} outside [{lo}, {hi}]")
    return float(value)


def make_config(speed: float, freq: float, ds_ratio: float = 0.2, slope: float = 0.0,
                torso: float = 0.0, clearance: float = 0.05, drag: float = 0.0,
                lateral_force: float = 0.0, support: int = 1,
                validate: bool = True) -> GaitConfig:
    """Build a GaitConfig from steering-level parameters (frequency in steps/s)."""
    if validate:
        check_bounds("speed", speed)
        check_bounds("freq", freq)
        check_bounds("ds_ratio", ds_ratio)
        check_bounds("slope", slope)
        check_bounds("torso", torso)
        check_bounds("clearance", clearance)
        check_bounds("drag", drag)
        check_bounds("lateral_force", lateral_force)
    step_time = 1.0 / freq
    return GaitConfig(step_time=step_time, ds_time=ds_ratio * step_time,
                      speed=speed, slope=slope, torso=torso, clearance=clearance,
                      drag=drag, lateral_force=lateral_force, support=support)


def load_overrides(path: str) -> dict:
    """Read an INI-style config file.

    ``[anthropometry]`` overrides proportion-table entries,
    ``[control]`` overrides the regulator weights
    (``state_weight``, ``input_weight``).
    """
    cp = configparser.ConfigParser()
    read = cp.read(path)
    if not read:
        raise InvalidParameterError(f"config file not found: {path}")
    out: dict = {"anthropometry": {}, "control": {}}
    if cp.has_section("anthropometry"):
        for key, val in cp.items("anthropometry"):
            out["anthropometry"][key] = float(val)
    if cp.has_section("control"):
        for key, val in cp.items("control"):
            out["control"][key] = float(val)
    return out
