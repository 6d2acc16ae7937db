"""Exception types shared across the package."""


class StridesimError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(StridesimError):
    """A scalar parameter is out of its accepted range."""


class GaitSolveError(StridesimError):
    """The periodic-gait constraint system is singular or infeasible."""


class ControlSynthesisError(StridesimError):
    """Riccati iteration failed or the closed loop could not be stabilized."""


class GeometryError(StridesimError):
    """A kinematic construction has no real / feasible solution."""


class WorkspaceError(GeometryError):
    """A leg target is outside the reachable workspace."""
