"""Anthropometric body model scaled from total mass and height.

All segment lengths scale linearly with height, masses linearly with
total mass, and planar inertias with mass * length^2 (thin-rod values).
The default proportion table is a standard average-adult set; it can be
overridden through the ``[anthropometry]`` section of a config file
(see :mod:`stridesim.config`).
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InvalidParameterError

GRAVITY = 9.81

# Fractions of total height / total mass.  leg = thigh + shank is the
# hip-to-ground pendulum length; a fully stretched leg reaches the pelvis
# plane exactly.
DEFAULT_PROPORTIONS = {
    "leg_length": 0.530,        # hip to ground
    "foot_length": 0.152,       # heel to toe
    "pelvis_width": 0.191,      # hip to hip
    "thigh_length": 0.245,
    "shank_length": 0.285,      # includes foot height
    "torso_com_height": 0.180,  # pelvis to torso mass point, along the torso axis
    "leg_mass": 0.161,          # each leg
    "torso_mass": 0.678,        # trunk + head + arms
}


@dataclass(frozen=True)
class BodyModel:
    """Scaled segment lengths, masses and planar inertias.

    ``m1`` and ``m2`` are the (identical) leg masses, ``m3`` the torso
    mass; the inertias are about each limb's mass center, valid for both
    the sagittal and the lateral plane (none about the limb axis).
    """

    total_mass: float
    total_height: float
    leg_length: float
    foot_length: float
    pelvis_width: float
    thigh_length: float
    shank_length: float
    torso_com_height: float
    m1: float
    m2: float
    m3: float
    leg_inertia: float
    torso_inertia: float
    gravity: float = GRAVITY

    def __post_init__(self):
        for name in ("total_mass", "total_height", "leg_length", "foot_length",
                     "pelvis_width", "thigh_length", "shank_length",
                     "torso_com_height", "m1", "m2", "m3"):
            if getattr(self, name) <= 0.0:
                raise InvalidParameterError(f"BodyModel.{name} must be positive")
        if abs(self.thigh_length + self.shank_length - self.leg_length) > 1e-9:
            raise InvalidParameterError("thigh + shank must equal the leg length")


def scale_body(mass: float, height: float, proportions: dict | None = None) -> BodyModel:
    """Build a body model for a subject of given total mass [kg] and height [m]."""
    if mass <= 0.0 or height <= 0.0:
        raise InvalidParameterError("mass and height must be positive")
    p = dict(DEFAULT_PROPORTIONS)
    if proportions:
        p.update(proportions)
    leg = p["leg_length"] * height
    thigh = p["thigh_length"] * height
    shank = p["shank_length"] * height
    # keep thigh + shank = leg exact even under overridden tables
    chain = thigh + shank
    thigh *= leg / chain
    shank *= leg / chain
    m_leg = p["leg_mass"] * mass
    m_torso = mass - 2.0 * m_leg
    if m_torso <= 0.0:
        raise InvalidParameterError("leg-mass fraction leaves no torso mass")
    r3 = p["torso_com_height"] * height
    return BodyModel(
        total_mass=mass,
        total_height=height,
        leg_length=leg,
        foot_length=p["foot_length"] * height,
        pelvis_width=p["pelvis_width"] * height,
        thigh_length=thigh,
        shank_length=shank,
        torso_com_height=r3,
        m1=m_leg,
        m2=m_leg,
        m3=m_torso,
        leg_inertia=m_leg * leg * leg / 12.0,
        torso_inertia=m_torso * (2.0 * r3) ** 2 / 12.0,
    )
