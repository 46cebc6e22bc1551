"""Matrix families used throughout the package.

Every generator returns a fresh float array. Families indexed by n-bit
strings (``inner_product``, ``disjointness``) list strings in lexicographic
order with the least significant bit last, so row ``x`` corresponds to the
binary expansion of the integer ``x``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .exceptions import DomainError

__all__ = [
    "FAMILIES",
    "MatrixFamilySpec",
    "generate",
    "derangement",
    "eps_identity",
    "m_c",
    "inner_product",
    "disjointness",
    "hexagon_slack",
    "example_4_4",
    "example_4_10",
    "example_5_1",
    "example_5_2",
    "example_5_3",
    "tensor_pair",
    "has_no_dominant_entry_columns",
]


def _check_size(n: int, minimum: int = 1) -> int:
    if int(n) != n or n < minimum:
        raise DomainError(f"size parameter n must be an integer >= {minimum}, got {n}")
    return int(n)


def _check_eps(eps: float) -> float:
    if not eps >= 0:
        raise DomainError(f"eps must be nonnegative, got {eps}")
    return float(eps)


def derangement(n: int) -> np.ndarray:
    """``J_n - I_n``: the nonequality matrix."""
    n = _check_size(n)
    return np.ones((n, n)) - np.eye(n)


def eps_identity(n: int, eps: float) -> np.ndarray:
    """Unit diagonal, constant ``eps`` off the diagonal."""
    n = _check_size(n)
    eps = _check_eps(eps)
    return np.full((n, n), eps) + (1.0 - eps) * np.eye(n)


def m_c(n: int, c: float) -> np.ndarray:
    """Diagonal ``c``, ones elsewhere."""
    n = _check_size(n)
    if not c >= 0:
        raise DomainError(f"c must be nonnegative, got {c}")
    return np.ones((n, n)) + (float(c) - 1.0) * np.eye(n)


def _bit_popcount_parity(v: np.ndarray) -> np.ndarray:
    parity = np.zeros_like(v)
    while np.any(v):
        parity ^= v & 1
        v = v >> 1
    return parity


def inner_product(n: int) -> np.ndarray:
    """``IP_n(x, y) = <x, y> mod 2`` over n-bit strings, a ``2^n`` square matrix."""
    n = _check_size(n)
    idx = np.arange(2**n)
    return _bit_popcount_parity(np.bitwise_and.outer(idx, idx)).astype(float)


def disjointness(n: int) -> np.ndarray:
    """``DISJ_n(x, y) = 1`` iff the subsets encoded by ``x`` and ``y`` are disjoint."""
    n = _check_size(n)
    idx = np.arange(2**n)
    return (np.bitwise_and.outer(idx, idx) == 0).astype(float)


def hexagon_slack() -> np.ndarray:
    """Slack matrix of the regular hexagon (rows: facets, columns: vertices)."""
    first = np.array([0, 0, 1, 2, 2, 1], dtype=float)
    return np.array([np.roll(first, k) for k in range(6)])


def example_4_4(n: int = 10, eps: float = 0.01) -> np.ndarray:
    """First row all ones, remaining rows ``eps`` except a unit diagonal."""
    a = eps_identity(n, eps)
    a[0, :] = 1.0
    return a


def example_4_10(n: int = 10, eps: float = 0.01) -> np.ndarray:
    """Row ``i`` has ones at columns ``i`` and ``i+1`` (cyclically), ``eps`` elsewhere."""
    n = _check_size(n, 2)
    eps = _check_eps(eps)
    a = np.full((n, n), eps)
    for i in range(n):
        a[i, i] = 1.0
        a[i, (i + 1) % n] = 1.0
    return a


def example_5_1(n: int = 10, eps: float | None = None) -> np.ndarray:
    """``(n+1)``-square approximate identity with off-diagonal ``1/n`` by default."""
    n = _check_size(n)
    return eps_identity(n + 1, 1.0 / n if eps is None else eps)


def example_5_2(n: int = 10, eps: float = 0.001) -> np.ndarray:
    """``(1-eps) * tridiag(1,1,1) + eps * J``."""
    n = _check_size(n)
    eps = _check_eps(eps)
    tri = np.eye(n) + np.eye(n, k=1) + np.eye(n, k=-1)
    return (1.0 - eps) * tri + eps * np.ones((n, n))


def example_5_3(n: int = 10, eps: float = 0.9) -> np.ndarray:
    return eps_identity(n, eps)


def tensor_pair(a: float) -> np.ndarray:
    """``[[1, a], [a, 1]]`` tensored with itself."""
    if not a >= 0:
        raise DomainError(f"a must be nonnegative, got {a}")
    base = np.array([[1.0, a], [a, 1.0]])
    return np.kron(base, base)


# family name -> (builder, accepted parameter names)
FAMILIES: dict[str, tuple[Any, tuple[str, ...]]] = {
    "derangement": (derangement, ("n",)),
    "eps_identity": (eps_identity, ("n", "eps")),
    "m_c": (m_c, ("n", "c")),
    "inner_product": (inner_product, ("n",)),
    "disjointness": (disjointness, ("n",)),
    "hexagon_slack": (hexagon_slack, ()),
    "example4.4": (example_4_4, ("n", "eps")),
    "example4.10": (example_4_10, ("n", "eps")),
    "example5.1": (example_5_1, ("n", "eps")),
    "example5.2": (example_5_2, ("n", "eps")),
    "example5.3": (example_5_3, ("n", "eps")),
    "tensor_pair": (tensor_pair, ("a",)),
}


@dataclass(frozen=True)
class MatrixFamilySpec:
    family: str
    params: dict[str, float] = field(default_factory=dict)


def generate(spec: MatrixFamilySpec | str, **params: float) -> np.ndarray:
    """Build a family member from a :class:`MatrixFamilySpec` or a family name plus keyword params."""
    if isinstance(spec, str):
        spec = MatrixFamilySpec(spec, dict(params))
    elif params:
        raise TypeError("pass parameters either in the MatrixFamilySpec or as keywords, not both")
    try:
        builder, allowed = FAMILIES[spec.family]
    except KeyError:
        raise DomainError(
            f"unknown family {spec.family!r}; choose from {sorted(FAMILIES)}"
        ) from None
    given = {k: v for k, v in spec.params.items() if v is not None}
    extra = set(given) - set(allowed)
    if extra:
        raise DomainError(f"family {spec.family!r} does not take {sorted(extra)}")
    if "n" in given:
        if float(given["n"]) != math.floor(float(given["n"])):
            raise DomainError(f"n must be an integer, got {given['n']}")
        given["n"] = int(given["n"])
    missing = [k for k in ("n", "c", "a") if k in allowed and k not in given]
    required = {"derangement", "eps_identity", "m_c", "inner_product", "disjointness", "tensor_pair"}
    if spec.family in required and missing:
        raise DomainError(f"family {spec.family!r} requires {missing}")
    if spec.family == "eps_identity" and "eps" not in given:
        raise DomainError("family 'eps_identity' requires ['eps']")
    return builder(**given)


def has_no_dominant_entry_columns(a) -> np.ndarray:
    """Per column of the entrywise square root: is the largest entry <= the sum of the rest?"""
    root = np.sqrt(np.asarray(a, dtype=float))
    if root.ndim != 2:
        raise DomainError("expected a 2-D matrix")
    if np.any(np.isnan(root)):
        raise DomainError("matrix has negative entries")
    top = root.max(axis=0)
    rest = root.sum(axis=0) - top
    return top <= rest + 1e-12 * np.maximum(1.0, top)
