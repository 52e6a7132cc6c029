"""Exception types shared across the package."""


class WsetlabError(Exception):
    """Base class for all library errors."""


class DomainError(WsetlabError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class EmptyDomain(DomainError):
    pass


class OutsideDomain(WsetlabError):
    """A distribution lies outside the domain of a functional or gauge space.

    ``index`` names the offending gauge index when the failure comes from a
    divergent gauge integral.
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class GaugeOverflow(WsetlabError, OverflowError):
    """Gauge value exceeds the float range; ``saturated`` holds the clamp."""

    def __init__(self, message, saturated):
        super().__init__(message)
        self.saturated = saturated


class QuadratureFailure(WsetlabError):
    def __init__(self, message, value=float("nan"), error=float("inf")):
        super().__init__(message)
        self.value = value
        self.error = error


class TooLarge(WsetlabError):
    pass


class BracketFailure(WsetlabError):
    pass


class InvalidGauge(WsetlabError, ValueError):
    pass


class UnsupportedCoupling(WsetlabError, ValueError):
    pass
