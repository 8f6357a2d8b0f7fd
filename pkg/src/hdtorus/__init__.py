"""Bond percolation on high-dimensional tori: random-walk sums, Monte Carlo,
exact enumeration, lace-expansion diagrams and bootstrap functions."""
from .errors import (
    ConfigError,
    DimensionError,
    DomainError,
    HdtorusError,
    SingularityError,
    SizeError,
    UnsupportedFamilyError,
)
from .torus import Family, TorusSpec, edge_list, neighbors, step_distribution, torus_metric

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DimensionError",
    "DomainError",
    "Family",
    "HdtorusError",
    "SingularityError",
    "SizeError",
    "TorusSpec",
    "UnsupportedFamilyError",
    "__version__",
    "edge_list",
    "neighbors",
    "step_distribution",
    "torus_metric",
]
