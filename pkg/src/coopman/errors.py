"""Exception types used across the package."""


class CoopmanError(Exception):
    """Base class for all package-specific errors."""


class ScenarioError(CoopmanError):
    """A scenario description is malformed or physically inconsistent."""


class RepresentationSingularity(CoopmanError):
    """An Euler-angle operation was requested too close to pitch = +/- pi/2."""


class FunnelViolation(CoopmanError):
    """A tracking error left its prescribed performance envelope."""

    def __init__(self, message, t=None, channel=None, value=None, bound=None):
        super().__init__(message)
        self.t = t
        self.channel = channel
        self.value = value
        self.bound = bound


class InfeasibleBounds(CoopmanError):
    """Performance-bound evaluation was asked for an invalid configuration."""


class NoFeasibleGains(CoopmanError):
    """Gain search finished without certifying the requested limits."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best
