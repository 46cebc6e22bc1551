"""Explicit PSD factorizations: constructions, transformations and verification.

A factorization of size ``r`` of an ``m x n`` matrix ``A`` is a pair of
stacks ``E`` (``m x r x r``) and ``F`` (``n x r x r``) of PSD matrices with
``A[i, j] = Tr(E[i] @ F[j])``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import generators
from .exceptions import DimensionError, DomainError, PreconditionError
from .linalg import DEFAULT_TOL, ToleranceConfig, as_matrix, is_psd, numeric_rank

log = logging.getLogger(__name__)

__all__ = [
    "PsdFactorization",
    "VerifyReport",
    "PhaseAssignment",
    "verify",
    "rescale",
    "normalize_to_povm_form",
    "phase_balance",
    "hadamard_root_factorization",
    "not_full_factorization",
    "tensor_factorization",
    "ne_generators_odd",
    "ne_generators_even",
    "ne_factorization_odd",
    "ne_factorization_even",
    "diagonal_factorization",
    "disjointness_factorization",
    "smallest_prime_at_least",
    "line_design",
    "mc_factorization",
    "ip_sign_matrix",
    "ip_factorization",
    "realify",
    "random_code_nonneg_factorization",
]


@dataclass
class PsdFactorization:
    e_factors: np.ndarray
    f_factors: np.ndarray

    def __post_init__(self) -> None:
        self.e_factors = np.asarray(self.e_factors)
        self.f_factors = np.asarray(self.f_factors)
        if self.e_factors.ndim != 3 or self.f_factors.ndim != 3:
            raise DimensionError("factor stacks must be 3-D (count x r x r)")
        r = self.e_factors.shape[1]
        if self.e_factors.shape[1:] != (r, r) or self.f_factors.shape[1:] != (r, r):
            raise DimensionError("all factors must be square of one common size")

    @property
    def size(self) -> int:
        return self.e_factors.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.e_factors.shape[0], self.f_factors.shape[0]

    @property
    def field(self) -> str:
        for stack in (self.e_factors, self.f_factors):
            if np.iscomplexobj(stack) and np.any(stack.imag != 0):
                return "complex"
        return "real"

    def realized(self) -> np.ndarray:
        """The matrix ``Tr(E_i F_j)`` (real part)."""
        return np.einsum("iab,jba->ij", self.e_factors, self.f_factors).real


@dataclass
class VerifyReport:
    max_abs_error: float
    min_eigenvalue_e: float
    min_eigenvalue_f: float
    non_psd_e: list[int]
    non_psd_f: list[int]
    ok: bool

    def __bool__(self) -> bool:
        return self.ok


def verify(fact: PsdFactorization, target, tol: ToleranceConfig = DEFAULT_TOL) -> VerifyReport:
    """Compare ``Tr(E_i F_j)`` with ``target`` and check every factor is PSD."""
    target = as_matrix(target)
    if fact.shape != target.shape:
        raise DimensionError(f"factorization has shape {fact.shape}, target {target.shape}")
    traces = np.einsum("iab,jba->ij", fact.e_factors, fact.f_factors)
    err = float(np.max(np.abs(traces - target)))
    e_checks = [is_psd(e, tol) for e in fact.e_factors]
    f_checks = [is_psd(f, tol) for f in fact.f_factors]
    bad_e = [i for i, c in enumerate(e_checks) if not c]
    bad_f = [j for j, c in enumerate(f_checks) if not c]
    return VerifyReport(
        max_abs_error=err,
        min_eigenvalue_e=min(c.min_eigenvalue for c in e_checks),
        min_eigenvalue_f=min(c.min_eigenvalue for c in f_checks),
        non_psd_e=bad_e,
        non_psd_f=bad_f,
        ok=err <= tol.verify_abs_tol and not bad_e and not bad_f,
    )


def rescale(fact: PsdFactorization, row_scale=None, col_scale=None) -> PsdFactorization:
    """Factorization of ``diag(row_scale) @ A @ diag(col_scale)``."""
    e, f = fact.e_factors, fact.f_factors
    if row_scale is not None:
        e = e * np.asarray(row_scale, dtype=float)[:, None, None]
    if col_scale is not None:
        f = f * np.asarray(col_scale, dtype=float)[:, None, None]
    return PsdFactorization(e, f)


def normalize_to_povm_form(
    fact: PsdFactorization, target=None, tol: ToleranceConfig = DEFAULT_TOL
) -> PsdFactorization:
    """Rewrite a factorization so that ``sum_i E_i = I`` and ``Tr(F_j) = 1``.

    The target must have unit column sums. A singular ``sum_i E_i`` means some
    direction is unused; the factors are then compressed onto its support and
    the returned factorization is smaller.
    """
    if target is not None:
        target = as_matrix(target)
        sums = target.sum(axis=0)
        if np.any(np.abs(sums - 1.0) > 1e-9):
            raise DomainError("target columns must sum to 1")
        report = verify(fact, target, tol)
        if not report.ok:
            raise PreconditionError(f"factorization does not verify (error {report.max_abs_error:.3e})")
    e, f = fact.e_factors, fact.f_factors
    total = e.sum(axis=0)
    lam, u = np.linalg.eigh((total + total.conj().T) / 2)
    keep = lam > tol.rank_rel_threshold * max(lam[-1], 0.0)
    if not np.all(keep):
        log.info("sum of E factors is singular; compressing size %d -> %d", fact.size, int(keep.sum()))
    w = u[:, keep] / np.sqrt(lam[keep])
    w_inv = u[:, keep] * np.sqrt(lam[keep])
    e_new = np.einsum("ba,ibc,cd->iad", w.conj(), e, w)
    f_new = np.einsum("ba,ibc,cd->iad", w_inv.conj(), f, w_inv)
    if not (np.iscomplexobj(e) or np.iscomplexobj(f)):
        e_new, f_new = e_new.real, f_new.real
    return PsdFactorization(e_new, f_new)


@dataclass
class PhaseAssignment:
    thetas: np.ndarray

    def residual(self, v) -> float:
        return float(abs(np.sum(np.asarray(v, dtype=float) * np.exp(1j * self.thetas))))


def phase_balance(v) -> PhaseAssignment:
    """Angles ``theta`` with ``sum_j v_j exp(i theta_j) = 0`` for ``v`` without a dominant entry.

    The largest entry forms one group; the others are dealt in decreasing
    order to whichever of two further groups is lighter, so those two sums
    differ by at most the largest entry. The three sums then satisfy every
    triangle inequality and each group takes the direction of its side.
    """
    v = np.asarray(v, dtype=float).ravel()
    if v.size == 0 or np.any(v < 0):
        raise DomainError("phase balancing needs a nonempty nonnegative vector")
    thetas = np.zeros(v.size)
    if not np.any(v > 0):
        return PhaseAssignment(thetas)
    top = int(np.argmax(v))
    if v[top] > v.sum() - v[top] + 1e-12 * v[top]:
        raise PreconditionError(f"entry {top} is dominant ({v[top]:.6g} > sum of the rest)")
    order = np.argsort(-v, kind="stable")
    group_b, group_c = [], []
    b = c = 0.0
    for idx in order[1:]:
        if b <= c:
            group_b.append(idx)
            b += v[idx]
        else:
            group_c.append(idx)
            c += v[idx]
    a = v[order[0]]
    x = (a * a + c * c - b * b) / (2 * a)
    y = math.sqrt(max(c * c - x * x, 0.0))
    p1, p2 = complex(a, 0.0), complex(x, y)
    ang_b = float(np.angle(p2 - p1)) if b > 0 else 0.0
    ang_c = float(np.angle(-p2)) if c > 0 else 0.0
    thetas[group_b] = ang_b
    thetas[group_c] = ang_c
    thetas = np.mod(thetas, 2 * np.pi)
    thetas[np.isclose(thetas, 2 * np.pi)] = 0.0
    return PhaseAssignment(thetas)


def hadamard_root_factorization(m, tol: ToleranceConfig = DEFAULT_TOL) -> PsdFactorization:
    """Rank-one factorization of ``m * conj(m)`` of size ``rank(m)``.

    With ``m = U V`` a rank factorization, ``E_i = conj(u_i) u_i^T`` and
    ``F_j = v_j v_j^H`` give ``Tr(E_i F_j) = |m[i, j]|**2``.
    """
    m = as_matrix(m)
    r = numeric_rank(m, tol)
    if r == 0:
        raise DomainError("matrix is zero")
    w, s, xh = np.linalg.svd(m, full_matrices=False)
    root = np.sqrt(s[:r])
    u = w[:, :r] * root
    v = root[:, None] * xh[:r]
    a = u.conj()
    e = np.einsum("ia,ib->iab", a, a.conj())
    f = np.einsum("aj,bj->jab", v, v.conj())
    return PsdFactorization(e, f)


def not_full_factorization(a, tol: ToleranceConfig = DEFAULT_TOL) -> PsdFactorization:
    """Factorization of size ``< rows`` when no column of ``sqrt(a)`` has a dominant entry."""
    a = np.real(as_matrix(a))
    if np.any(a < 0):
        raise DomainError("matrix must be nonnegative")
    ok = generators.has_no_dominant_entry_columns(a)
    if not np.all(ok):
        raise PreconditionError(f"column {int(np.flatnonzero(~ok)[0])} of the entrywise root has a dominant entry")
    root = np.sqrt(a)
    phases = np.column_stack([np.exp(1j * phase_balance(root[:, j]).thetas) for j in range(a.shape[1])])
    return hadamard_root_factorization(root * phases, tol)


def tensor_factorization(f1: PsdFactorization, f2: PsdFactorization) -> PsdFactorization:
    """Factorization of ``A1 (x) A2`` from factorizations of ``A1`` and ``A2``."""
    e = np.einsum("iab,kcd->ikacbd", f1.e_factors, f2.e_factors)
    f = np.einsum("jab,lcd->jlacbd", f1.f_factors, f2.f_factors)
    r = f1.size * f2.size
    return PsdFactorization(e.reshape(-1, r, r), f.reshape(-1, r, r))


def diagonal_factorization(a) -> PsdFactorization:
    """Size-``m`` diagonal factorization ``E_i = e_i e_i^T``, ``F_j = diag(A[:, j])``."""
    a = np.real(as_matrix(a))
    m = a.shape[0]
    e = np.einsum("ia,ib->iab", np.eye(m), np.eye(m))
    f = np.stack([np.diag(a[:, j]) for j in range(a.shape[1])])
    return PsdFactorization(e, f)


def disjointness_factorization(n: int) -> PsdFactorization:
    """Size ``2**n`` factorization of ``DISJ_n`` by tensoring the one for ``DISJ_1``."""
    base = diagonal_factorization(generators.disjointness(1))
    fact = base
    for _ in range(n - 1):
        fact = tensor_factorization(fact, base)
    return fact


# ---------------------------------------------------------------------------
# nonequality


def _vandermonde(n: int) -> np.ndarray:
    k = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(k, k) / n)


def ne_generators_odd(n: int) -> np.ndarray:
    """``n**2`` Hermitian unitaries ``G[i*n + j]`` of size ``n``, each with trace one.

    ``G_ij`` is supported on the cells where ``(k + l) mod n == i`` and carries
    row ``j`` of the Vandermonde matrix, conjugate pairs placed symmetrically.
    """
    if n < 1 or n % 2 == 0:
        raise PreconditionError(f"n must be odd, got {n}")
    vdm = _vandermonde(n)
    gens = np.zeros((n * n, n, n), dtype=complex)
    for i in range(n):
        diag = (i * (n + 1) // 2) % n
        pairs = sorted((k, (i - k) % n) for k in range(n) if k < (i - k) % n)
        for j in range(n):
            g = gens[i * n + j]
            g[diag, diag] = vdm[j, 0]
            for t, (k, l) in enumerate(pairs, start=1):
                g[k, l] = vdm[j, t]
                g[l, k] = vdm[j, n - t]
    return gens


def _round_robin_latin_square(n: int) -> np.ndarray:
    # symmetric Latin square on {0..n-1} with an all-zero diagonal (n even)
    sq = np.zeros((n, n), dtype=int)
    for k in range(n - 1):
        for l in range(n - 1):
            if k != l:
                sq[k, l] = (k + l) % (n - 1) + 1
        sq[k, n - 1] = sq[n - 1, k] = (2 * k) % (n - 1) + 1
    return sq


def ne_generators_even(n: int) -> np.ndarray:
    """``n**2 - 1`` traceless Hermitian unitaries of size ``n`` with ``Tr(G G'^*) = n delta``.

    Symbols ``i > 0`` of a zero-diagonal symmetric Latin square each get ``n``
    matrices built from Vandermonde rows; for odd rows the real pair
    ``(1, -1)`` is replaced by ``(1j, -1j)`` to keep the matrix Hermitian.
    The diagonal symbol needs real +-1 diagonals, so it takes the non-constant
    rows of a Sylvester Hadamard matrix; ``n`` must be a power of two.
    """
    if n < 2 or n % 2:
        raise PreconditionError(f"n must be even and >= 2, got {n}")
    if n & (n - 1):
        raise PreconditionError(f"the diagonal block needs a real Hadamard matrix; n={n} is not a power of two")
    vdm = _vandermonde(n)
    sq = _round_robin_latin_square(n)
    half = n // 2
    gens = []
    hadamard = scipy.linalg.hadamard(n).astype(complex)
    for j in range(1, n):
        gens.append(np.diag(hadamard[j]))
    for i in range(1, n):
        cells = sorted((k, l) for k in range(n) for l in range(n) if k < l and sq[k, l] == i)
        for j in range(n):
            g = np.zeros((n, n), dtype=complex)
            k, l = cells[0]
            if j % 2:
                g[k, l], g[l, k] = 1j, -1j
            else:
                g[k, l], g[l, k] = vdm[j, 0], vdm[j, half]
            for t, (k, l) in enumerate(cells[1:], start=1):
                g[k, l] = vdm[j, t]
                g[l, k] = vdm[j, n - t]
            gens.append(g)
    return np.array(gens)


def _ne_from_generators(gens: np.ndarray) -> PsdFactorization:
    n = gens.shape[1]
    eye = np.eye(n)
    x = (eye + gens) / math.sqrt(n)
    y = (eye - np.conj(np.transpose(gens, (0, 2, 1)))) / math.sqrt(n)
    return PsdFactorization(x, y)


def ne_factorization_odd(n: int) -> PsdFactorization:
    """Size-``n`` factorization of the ``n**2``-square derangement matrix, ``n`` odd."""
    return _ne_from_generators(ne_generators_odd(n))


def ne_factorization_even(n: int) -> PsdFactorization:
    """Size-``n`` factorization of the ``(n**2 - 1)``-square derangement matrix, ``n`` even."""
    return _ne_from_generators(ne_generators_even(n))


# ---------------------------------------------------------------------------
# M_c


def smallest_prime_at_least(k: int) -> int:
    q = max(int(k), 2)
    while any(q % p == 0 for p in range(2, int(math.isqrt(q)) + 1)):
        q += 1
    return q


def line_design(c: int, q: int) -> list[list[int]]:
    """``q**2`` sets of size ``c`` over ``[c] x F_q`` meeting pairwise in at most one point.

    Point ``(x, y)`` is encoded as ``x * q + y``. Requires ``c <= q``.
    """
    if c > q:
        raise PreconditionError(f"need c <= q, got c={c}, q={q}")
    return [[x * q + (a * x + b) % q for x in range(c)] for a in range(q) for b in range(q)]


def mc_factorization(n: int, c: float) -> PsdFactorization:
    """Real factorization of ``M_c`` (diagonal ``c``, ones elsewhere).

    ``c > 2`` uses the line design over ``F_q`` with ``q`` the smallest prime
    ``>= max(ceil(sqrt n), ceil c)``; ``c`` in ``[0, 2]`` uses all 2-subsets of
    ``[ceil(sqrt(2n)) + 1]``. ``c == 1`` gives the rank-one factorization.
    """
    if n < 2 or int(n) != n:
        raise DomainError(f"n must be an integer >= 2, got {n}")
    if not c >= 0:
        raise DomainError(f"c must be nonnegative, got {c}")
    n = int(n)
    if c == 1:
        return PsdFactorization(np.ones((n, 1, 1)), np.ones((n, 1, 1)))
    if c > 2:
        size = math.ceil(c)
        q = smallest_prime_at_least(max(math.isqrt(n - 1) + 1, size))
        sets = line_design(size, q)
        r = size * q
        off = (c - 1) / (size - 1)
    else:
        size = 2
        r = math.isqrt(2 * n - 1) + 1 + 1  # ceil(sqrt(2n)) + 1
        sets = [[u, v] for u in range(r) for v in range(u + 1, r)]
        off = c - 1
    assert len(sets) >= n, "set family too small"
    e = np.zeros((n, r, r))
    f = np.zeros((n, r, r))
    for idx, s in enumerate(sets[:n]):
        block = np.full((size, size), off) + (1 - off) * np.eye(size)
        e[idx][np.ix_(s, s)] = block / size
        f[idx][np.ix_(s, s)] = 1.0
        f[idx][np.diag_indices(r)] = 1.0
    return PsdFactorization(e, f)


# ---------------------------------------------------------------------------
# inner product


def ip_sign_matrix(n: int, k: int | None = None) -> np.ndarray:
    """Real ``{0, +-1}`` matrix ``M`` with ``M * M == IP_n`` and rank ``<= 2**k - 1 + 2**(n-k)``.

    Rows and columns split as (high ``n-k`` bits, low ``k`` bits). Block
    ``(X, Y)`` of ``IP_n`` is ``IP_k`` or ``J - IP_k`` according to
    ``IP(X, Y)``; outside the first block row, ``IP_k`` blocks are negated.
    """
    if k is None:
        k = n // 2 if n % 2 == 0 else (n + 1) // 2
    if not 1 <= k < n:
        raise DomainError(f"block parameter must satisfy 1 <= k < n, got k={k}, n={n}")
    ip = generators.inner_product(n)
    size = 2**k
    hi_ip = generators.inner_product(n - k)
    sign = np.where((hi_ip == 0) & (np.arange(2 ** (n - k))[:, None] > 0), -1.0, 1.0)
    return ip * np.kron(sign, np.ones((size, size)))


def ip_factorization(n: int, k: int | None = None, tol: ToleranceConfig = DEFAULT_TOL) -> PsdFactorization:
    return hadamard_root_factorization(ip_sign_matrix(n, k), tol)


# ---------------------------------------------------------------------------
# real vs complex


def realify(fact: PsdFactorization) -> PsdFactorization:
    """Real factorization of size ``2r`` from a complex one of size ``r``.

    ``X = C + iD`` (``C`` symmetric, ``D`` skew) becomes
    ``[[C, D], [-D, C]] / sqrt(2)``.
    """

    def lift(stack: np.ndarray) -> np.ndarray:
        c, d = stack.real, stack.imag
        top = np.concatenate([c, d], axis=2)
        bottom = np.concatenate([-d, c], axis=2)
        return np.concatenate([top, bottom], axis=1) / math.sqrt(2)

    return PsdFactorization(lift(np.asarray(fact.e_factors)), lift(np.asarray(fact.f_factors)))


def random_code_nonneg_factorization(
    n: int, ell: int, seed: int | None = None
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Random binary codewords as an ``ell``-dimensional nonnegative factorization.

    Row ``i`` and column ``i`` both get ``sqrt(2/ell) * C_i``; the realized
    matrix ``(2/ell) C C^T`` has diagonal near 1 and off-diagonal near 1/2.
    Returns ``(row_vectors, col_vectors, matrix)``.
    """
    if ell < 1 or n < 1:
        raise DomainError("n and ell must be positive")
    rng = np.random.default_rng(seed)
    words = rng.integers(0, 2, size=(n, ell)).astype(float)
    vecs = math.sqrt(2.0 / ell) * words
    return vecs, vecs.copy(), vecs @ vecs.T
