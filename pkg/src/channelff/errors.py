"""Exception hierarchy shared across the package."""


class ChannelError(Exception):
    """Base class for all channelff errors."""


class NonHyperbolicError(ChannelError):
    """State where b^2 + 4a <= 0: no pair of real distinct wave speeds."""


class DepthUnderflow(ChannelError):
    """Evaluation or update at a non-positive water depth."""


class NonPositiveDepth(DepthUnderflow):
    """Steady-profile integration drove the depth to zero or below."""


class CriticalFlow(ChannelError):
    """Steady-profile integration hit or crossed the critical regime."""


class BoundaryDomainError(ChannelError):
    """Boundary relation evaluated outside its domain (e.g. gate with Q <= 0)."""


class NewtonDivergence(ChannelError):
    """Boundary closure Newton iteration failed to converge."""


class CflViolation(ChannelError):
    """Requested time step exceeds the stable explicit step."""


class PoleProximityError(ChannelError):
    """Transfer function evaluated too close to a pole."""


class ConfigError(ChannelError):
    """Scenario configuration file is malformed or inconsistent."""
