"""Numerical laboratory for concentration of measure on spheres and unitary dynamics."""
from .errors import InvalidArgument, RankDeficientError, ResourceLimitError, SupportViolationError

__version__ = "0.1.0"

__all__ = ["InvalidArgument", "RankDeficientError", "ResourceLimitError", "SupportViolationError", "__version__"]
