"""Exception hierarchy shared by every qhlab module."""


class QHLabError(Exception):
    """Base class for all library errors."""


class InvalidSpec(QHLabError, ValueError):
    pass


class DimensionMismatch(QHLabError, ValueError):
    pass


class PointOutsideDomain(QHLabError, ValueError):
    pass


class SamplingExhausted(QHLabError, RuntimeError):
    pass


class NotRadialConfiguration(QHLabError, ValueError):
    pass


class NotOnNearestBoundarySegment(QHLabError, ValueError):
    pass


class CenterSingularity(QHLabError, ValueError):
    pass


class OutOfRange(QHLabError, ValueError):
    pass


class SegmentExitsDomain(QHLabError, ValueError):
    pass


class BudgetExceeded(QHLabError, RuntimeError):
    pass


class IndexOutOfRange(QHLabError, IndexError):
    pass


class NoHypothesisHits(QHLabError, RuntimeError):
    pass


class AxisMismatch(QHLabError, ValueError):
    pass


class NoClosedForm(QHLabError, ValueError):
    """Raised when a closed-form metric is requested for an unsupported configuration."""


class IoFailure(QHLabError, OSError):
    pass
