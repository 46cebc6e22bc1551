"""Dense matrix utilities: spectra, norms, PSD checks, fidelity and entropy.

Matrices are plain 2-D numpy arrays. Real input stays real; complex input is
kept complex. Helpers here never mutate their arguments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DimensionError, DomainError

__all__ = [
    "ToleranceConfig",
    "DEFAULT_TOL",
    "as_matrix",
    "field_of",
    "is_nonnegative",
    "is_stochastic",
    "column_normalize",
    "strip_zero_lines",
    "singular_values",
    "numeric_rank",
    "trace_norm",
    "frobenius_norm",
    "trace_norm_rank_bound",
    "PsdCheck",
    "is_psd",
    "psd_sqrt",
    "hadamard_product",
    "kronecker",
    "classical_fidelity",
    "fidelity_matrix",
    "quantum_fidelity",
    "check_density_matrix",
    "mutual_information_bits",
]


@dataclass(frozen=True)
class ToleranceConfig:
    """Numerical thresholds used by rank, PSD and verification checks.

    ``psd_eig_floor`` is stored as a magnitude; an eigenvalue passes the PSD
    test when it is at least ``-psd_eig_floor``.
    """

    rank_rel_threshold: float = 1e-10
    psd_eig_floor: float = 1e-9
    verify_abs_tol: float = 1e-9

    def __post_init__(self) -> None:
        for name in ("rank_rel_threshold", "psd_eig_floor", "verify_abs_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")
        if self.rank_rel_threshold >= 1:
            raise ValueError("rank_rel_threshold must be < 1")


DEFAULT_TOL = ToleranceConfig()


def as_matrix(m, *, square: bool = False) -> np.ndarray:
    """Return ``m`` as a nonempty 2-D float or complex array."""
    arr = np.asarray(m)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2 or arr.size == 0:
        raise DimensionError(f"expected a nonempty 2-D matrix, got shape {arr.shape}")
    if square and arr.shape[0] != arr.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {arr.shape}")
    if np.iscomplexobj(arr):
        return arr.astype(complex)
    return arr.astype(float)


def field_of(m: np.ndarray) -> str:
    """``"real"`` when every imaginary part is exactly zero, else ``"complex"``."""
    if np.iscomplexobj(m) and np.any(np.imag(m) != 0):
        return "complex"
    return "real"


def is_nonnegative(m, atol: float = 0.0) -> bool:
    arr = np.asarray(m)
    if np.iscomplexobj(arr):
        if np.any(np.imag(arr) != 0):
            return False
        arr = arr.real
    return bool(np.all(arr >= -atol))


def is_stochastic(m, atol: float = 1e-12) -> bool:
    arr = as_matrix(m)
    return is_nonnegative(arr) and bool(np.all(np.abs(arr.sum(axis=0) - 1.0) <= atol))


def column_normalize(a) -> np.ndarray:
    """Scale every column to unit sum. Zero columns are rejected."""
    arr = np.real(as_matrix(a))
    sums = arr.sum(axis=0)
    if np.any(sums <= 0):
        bad = int(np.flatnonzero(sums <= 0)[0])
        raise DomainError(f"column {bad} has zero sum and cannot be normalized")
    return arr / sums


def strip_zero_lines(a) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Drop all-zero rows and columns.

    Returns the reduced matrix together with the kept row and column indices.
    """
    arr = as_matrix(a)
    rows = np.flatnonzero(np.any(arr != 0, axis=1))
    cols = np.flatnonzero(np.any(arr != 0, axis=0))
    return arr[np.ix_(rows, cols)], rows, cols


def singular_values(m) -> np.ndarray:
    """Singular values in descending order, ``min(rows, cols)`` of them."""
    return np.linalg.svd(as_matrix(m), compute_uv=False)


def numeric_rank(m, tol: ToleranceConfig = DEFAULT_TOL) -> int:
    s = singular_values(m)
    if s[0] == 0:
        return 0
    return int(np.sum(s > tol.rank_rel_threshold * s[0]))


def trace_norm(m) -> float:
    return float(np.sum(singular_values(m)))


def frobenius_norm(m) -> float:
    return float(np.sqrt(np.sum(singular_values(m) ** 2)))


def trace_norm_rank_bound(m) -> float:
    """``(||m||_tr / ||m||_F)**2``, a lower bound on ``rank(m)``."""
    s = singular_values(m)
    fro2 = float(np.sum(s**2))
    if fro2 == 0:
        raise DomainError("rank bound is undefined for the zero matrix")
    return float(np.sum(s)) ** 2 / fro2


@dataclass(frozen=True)
class PsdCheck:
    ok: bool
    min_eigenvalue: float
    hermitian_defect: float

    def __bool__(self) -> bool:
        return self.ok


def is_psd(m, tol: ToleranceConfig = DEFAULT_TOL) -> PsdCheck:
    """Test whether ``m`` is Hermitian PSD; the minimal eigenvalue is the witness."""
    arr = as_matrix(m, square=True)
    defect = float(np.max(np.abs(arr - arr.conj().T)))
    herm = (arr + arr.conj().T) / 2
    lam = float(np.linalg.eigvalsh(herm)[0])
    ok = defect <= tol.verify_abs_tol and lam >= -tol.psd_eig_floor
    return PsdCheck(ok, lam, defect)


def psd_sqrt(m, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Principal square root of a PSD matrix via eigendecomposition.

    Eigenvalues in ``[-psd_eig_floor, 0)`` are clipped to zero; anything more
    negative is a domain error.
    """
    arr = as_matrix(m, square=True)
    herm = (arr + arr.conj().T) / 2
    lam, vec = np.linalg.eigh(herm)
    if lam[0] < -tol.psd_eig_floor:
        raise DomainError(f"matrix is not PSD (min eigenvalue {lam[0]:.3e})")
    root = (vec * np.sqrt(np.clip(lam, 0.0, None))) @ vec.conj().T
    return root if np.iscomplexobj(arr) else root.real


def hadamard_product(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch {a.shape} vs {b.shape}")
    return a * b


def kronecker(a, b) -> np.ndarray:
    return np.kron(as_matrix(a), as_matrix(b))


def _check_distribution(p, name: str) -> np.ndarray:
    arr = np.asarray(p, dtype=float).ravel()
    if np.any(arr < 0):
        raise DomainError(f"{name} has a negative entry")
    if abs(arr.sum() - 1.0) > 1e-10:
        raise DomainError(f"{name} sums to {arr.sum():.12g}, not 1")
    return arr


def classical_fidelity(p, q) -> float:
    """Bhattacharyya coefficient ``sum_k sqrt(p_k q_k)`` of two distributions."""
    p = _check_distribution(p, "p")
    q = _check_distribution(q, "q")
    if p.shape != q.shape:
        raise DimensionError("distributions have different lengths")
    return float(np.sum(np.sqrt(p * q)))


def fidelity_matrix(p: np.ndarray) -> np.ndarray:
    """Pairwise fidelities ``F(P_i, P_j)`` between the columns of stochastic ``p``."""
    root = np.sqrt(np.asarray(p, dtype=float))
    return root.T @ root


def check_density_matrix(rho, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    arr = as_matrix(rho, square=True)
    if np.max(np.abs(arr - arr.conj().T)) > 1e-12 * max(1.0, np.max(np.abs(arr))):
        raise DomainError("density matrix is not Hermitian")
    if abs(np.trace(arr).real - 1.0) > 1e-10:
        raise DomainError("density matrix does not have unit trace")
    if np.linalg.eigvalsh((arr + arr.conj().T) / 2)[0] < -1e-10:
        raise DomainError("density matrix is not PSD")
    return arr


def quantum_fidelity(rho, sigma, tol: ToleranceConfig = DEFAULT_TOL) -> float:
    """``|| sqrt(sigma) sqrt(rho) ||_tr`` for two density matrices."""
    rho = check_density_matrix(rho, tol)
    sigma = check_density_matrix(sigma, tol)
    if rho.shape != sigma.shape:
        raise DimensionError("states have different dimensions")
    return trace_norm(psd_sqrt(sigma, tol) @ psd_sqrt(rho, tol))


def mutual_information_bits(p) -> float:
    """Mutual information (base 2) of the joint distribution proportional to ``p``."""
    arr = np.real(as_matrix(p))
    if np.any(arr < 0):
        raise DomainError("joint weights must be nonnegative")
    total = arr.sum()
    if total <= 0:
        raise DomainError("mutual information is undefined for the zero matrix")
    joint = arr / total
    prod = np.outer(joint.sum(axis=1), joint.sum(axis=0))
    mask = joint > 0
    info = float(np.sum(joint[mask] * np.log2(joint[mask] / prod[mask])))
    return max(info, 0.0)
