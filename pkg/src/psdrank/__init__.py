"""Lower bounds and explicit factorizations for the PSD-rank of nonnegative matrices."""

from .bounds import (
    BOUND_NAMES,
    BoundReport,
    SimplexOptConfig,
    block_zero_bound,
    compute_bound,
    evaluate_certificate,
    rescaled_bound,
)
from .exceptions import DimensionError, DomainError, PreconditionError, PsdRankError
from .factorizations import PsdFactorization, VerifyReport, normalize_to_povm_form, verify
from .generators import MatrixFamilySpec, generate
from .linalg import DEFAULT_TOL, ToleranceConfig

__version__ = "0.1.0"

__all__ = [
    "BOUND_NAMES",
    "BoundReport",
    "DEFAULT_TOL",
    "DimensionError",
    "DomainError",
    "MatrixFamilySpec",
    "PreconditionError",
    "PsdFactorization",
    "PsdRankError",
    "SimplexOptConfig",
    "ToleranceConfig",
    "VerifyReport",
    "block_zero_bound",
    "compute_bound",
    "evaluate_certificate",
    "generate",
    "normalize_to_povm_form",
    "rescaled_bound",
    "verify",
]
