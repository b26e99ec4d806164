"""Dually flat information geometry: potentials, divergences, statistical manifolds."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConvergenceError,
    DegenerateError,
    DegenerateGeneratorError,
    DimensionError,
    DomainError,
    EmptyClusterError,
    InfeasibleError,
    InfoGeoError,
    PartitionError,
    QuadratureError,
    RangeError,
    SingularMetricError,
    SupportError,
)

__all__ = [
    "__version__",
    "ConvergenceError",
    "DegenerateError",
    "DegenerateGeneratorError",
    "DimensionError",
    "DomainError",
    "EmptyClusterError",
    "InfeasibleError",
    "InfoGeoError",
    "PartitionError",
    "QuadratureError",
    "RangeError",
    "SingularMetricError",
    "SupportError",
]
