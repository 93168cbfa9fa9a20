"""Edge unfolding of polycubes whose layers are orthogonally convex."""
from .model import (
    InternalInvariantViolation,
    ManifoldError,
    ParseError,
    Polycube,
    ValidationError,
    extract_surface,
    load_voxels,
    validate,
)
from .unfolder import UnfoldResult, unfold
from .verify import VerifyReport, oracle_suite, verify_net

__all__ = [
    "InternalInvariantViolation",
    "ManifoldError",
    "ParseError",
    "Polycube",
    "UnfoldResult",
    "ValidationError",
    "VerifyReport",
    "extract_surface",
    "load_voxels",
    "oracle_suite",
    "unfold",
    "validate",
    "verify_net",
]
