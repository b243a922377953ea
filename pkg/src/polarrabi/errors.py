"""Exception and warning types raised by polarrabi."""


class PolarRabiError(Exception):
    """Base class for all library errors."""


class ParameterError(PolarRabiError, ValueError):
    pass


class NoCrossingFound(PolarRabiError):
    pass


class UnsupportedParameter(PolarRabiError):
    """A parameter value outside what the perturbative expressions cover."""


class NearDegeneracy(PolarRabiError):
    """An energy denominator of the perturbation series is (nearly) zero.

    Signals breakdown of non-degenerate perturbation theory at the given
    parameter point.
    """

    def __init__(self, message, label=None, other=None, gap=None):
        super().__init__(message)
        self.label = label
        self.other = other
        self.gap = gap


class DivergentShift(PolarRabiError):
    pass


class DivisionByZeroChannel(PolarRabiError, ZeroDivisionError):
    pass


class CutoffTooSmall(PolarRabiError):
    pass


class SolverFailure(PolarRabiError):
    pass


class AmbiguousMatch(PolarRabiError):
    pass


class ConfigError(PolarRabiError):
    pass


class DegenerateChannelsWarning(UserWarning):
    """Two emission lines overlap within the total linewidth.

    The incoherent Lorentzian sum ignores interference between such lines.
    """
