"""Exception hierarchy shared by every module."""


class InfoGeoError(Exception):
    """Base class for numeric failures raised by the toolkit."""


class DomainError(InfoGeoError, ValueError):
    """A point lies on or outside the open domain of a potential or family."""


class DimensionError(InfoGeoError, ValueError):
    pass


class RangeError(InfoGeoError, ValueError):
    """A scalar parameter (e.g. a skew weight) is outside its admissible range."""


class ConvergenceError(InfoGeoError, RuntimeError):
    pass


class SupportError(InfoGeoError, ValueError):
    """Distributions have incompatible supports for the requested divergence."""


class QuadratureError(InfoGeoError, RuntimeError):
    pass


class DegenerateGeneratorError(InfoGeoError, ValueError):
    pass


class PartitionError(InfoGeoError, ValueError):
    pass


class InfeasibleError(InfoGeoError, ValueError):
    pass


class SingularMetricError(InfoGeoError, ValueError):
    pass


class EmptyClusterError(InfoGeoError, RuntimeError):
    pass


class DegenerateError(InfoGeoError, RuntimeError):
    """A statistical estimate is not identifiable from the simulated data."""
