"""Exception types raised across the package.

Two families: ``ConfigError`` for bad inputs (CLI exit code 2) and
``NumericalFailure`` for computations that could not finish (exit code 3).
"""


class ConfigError(ValueError):
    """Invalid user input: parameters, reaction specs or run configs."""


class RegimeUnsupported(ConfigError):
    """Parameters fall in the fast-diffusion range gamma < 0."""


class DomainError(ConfigError):
    """Argument outside the domain of a function (e.g. u outside [0, 1])."""


class NumericalFailure(RuntimeError):
    """A numerical procedure failed to produce a trustworthy answer."""


class NoRoot(NumericalFailure):
    """Isocline equation has no root at the requested X."""


class NoRealRoots(NumericalFailure):
    """The λ-polynomial has no real root (speed below the threshold)."""


class StepSizeUnderflow(NumericalFailure):
    def __init__(self, msg, last_state=None):
        super().__init__(msg)
        self.last_state = last_state


class MaxStepsExceeded(NumericalFailure):
    def __init__(self, msg, last_state=None):
        super().__init__(msg)
        self.last_state = last_state


class BracketFailure(NumericalFailure):
    def __init__(self, msg, traces=()):
        super().__init__(msg)
        self.traces = tuple(traces)


class QuadratureNonConvergence(NumericalFailure):
    def __init__(self, msg, partial=None):
        super().__init__(msg)
        self.partial = partial


class WindowTooShort(NumericalFailure):
    """Fewer samples than required inside a fit window."""


class SpeedAboveCritical(ConfigError):
    """A change-sign wave was requested at a speed c >= c*."""


class NotChangeSign(NumericalFailure):
    """The orbit through the requested point is not a type-2 change-sign orbit."""


class StabilityCollapse(NumericalFailure):
    """Adaptive time step underflowed."""


class ClippingExcess(NumericalFailure):
    """Range clipping removed more than the allowed amount in one step."""
