"""One-way quantum protocols that compute a matrix in expectation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .exceptions import DomainError, PreconditionError
from .factorizations import PsdFactorization

__all__ = ["ProtocolOutcome", "evaluate_protocol", "ip_protocol", "ip_bits"]

BoolFn = Callable[[Sequence[int], Sequence[int]], int]


@dataclass
class ProtocolOutcome:
    outcome_probs: np.ndarray
    output_values: np.ndarray
    expectation: float

    def to_dict(self) -> dict:
        return {
            "outcome_probs": self.outcome_probs.tolist(),
            "output_values": self.output_values.tolist(),
            "expectation": self.expectation,
        }


def evaluate_protocol(fact: PsdFactorization, column: int, values, atol: float = 1e-9) -> ProtocolOutcome:
    """Measure state ``F_column`` with the POVM ``{E_i}`` and pay ``values[i]`` on outcome ``i``."""
    e, f = fact.e_factors, fact.f_factors
    r = fact.size
    if np.max(np.abs(e.sum(axis=0) - np.eye(r))) > atol:
        raise PreconditionError("E factors do not sum to the identity; normalize first")
    if not 0 <= column < f.shape[0]:
        raise DomainError(f"column {column} out of range")
    if abs(np.trace(f[column]).real - 1.0) > atol:
        raise PreconditionError(f"F_{column} does not have unit trace")
    values = np.asarray(values, dtype=float).ravel()
    if values.shape != (e.shape[0],):
        raise DomainError(f"need {e.shape[0]} output values")
    if np.any(values < 0):
        raise DomainError("output values must be nonnegative")
    probs = np.einsum("iab,ba->i", e, f[column]).real
    probs = np.clip(probs, 0.0, None)
    return ProtocolOutcome(probs, values, float(probs @ values))


def ip_bits(bits: Sequence[int], other: Sequence[int]) -> int:
    return int(sum(int(a) & int(b) for a, b in zip(bits, other)) % 2)


def _parse_bits(x, n: int, name: str) -> list[int]:
    if isinstance(x, str):
        if len(x) != n or set(x) - {"0", "1"}:
            raise DomainError(f"{name} must be a string of {n} bits")
        return [int(ch) for ch in x]
    bits = [int(b) for b in x]
    if len(bits) != n or set(bits) - {0, 1}:
        raise DomainError(f"{name} must have {n} bits")
    return bits


def _hadamard_layer(k: int) -> np.ndarray:
    # unnormalized: entries are +-1, the 2**(-k/2) factor is applied by the caller
    h = np.array([[1, 1], [1, -1]], dtype=np.int64)
    out = np.ones((1, 1), dtype=np.int64)
    for _ in range(k):
        out = np.kron(out, h)
    return out


def ip_protocol(
    n: int,
    x,
    y,
    mode: str = "exact",
    samples: int = 100_000,
    seed: int | None = None,
    f: BoolFn | None = None,
    g: BoolFn | None = None,
) -> ProtocolOutcome:
    """Simulate the ``(n/2 + 1)``-qubit protocol for ``W(x, y) = f(x0, y) xor g(x1, y)``.

    Alice sends ``(|0, x0> + |1, x1>) / sqrt 2``. Bob applies the phases
    ``(-1)^f`` and ``(-1)^g`` to the two branches, Hadamards on the data
    register and the flag, and measures. He outputs ``2**(n/2)`` times the flag
    bit when the data register reads all zeros, else 0. With the defaults
    ``f = IP(x0, y0)`` and ``g = IP(x1, y1)`` the expectation is ``IP_n(x, y)``.

    ``mode="exact"`` returns the outcome distribution; ``mode="sample"``
    returns empirical frequencies and the sample mean of the output.
    """
    if n < 2 or n % 2:
        raise DomainError(f"n must be even and >= 2, got {n}")
    if n > 20:
        raise DomainError(f"n={n} too large to simulate (state dimension 2^{n // 2 + 1})")
    xb, yb = _parse_bits(x, n, "x"), _parse_bits(y, n, "y")
    half = n // 2
    x0, x1 = xb[:half], xb[half:]
    if f is None:
        f = lambda xs, ys: ip_bits(xs, ys[:half])  # noqa: E731
    if g is None:
        g = lambda xs, ys: ip_bits(xs, ys[half:])  # noqa: E731

    dim_data = 2**half
    idx0 = int("".join(map(str, x0)), 2)
    idx1 = int("".join(map(str, x1)), 2)
    # qubit order: flag first, data register last. Amplitudes are kept as
    # integers times 2**(-(half + 2) / 2) so probabilities are exact dyadics.
    state = np.zeros(2 * dim_data, dtype=np.int64)
    state[idx0] += (-1) ** f(x0, yb)
    state[dim_data + idx1] += (-1) ** g(x1, yb)
    state = np.kron(_hadamard_layer(1), _hadamard_layer(half)) @ state
    probs = state.astype(float) ** 2 / 2.0 ** (half + 2)
    values = np.zeros(2 * dim_data)
    values[dim_data] = float(2**half)  # flag = 1, data = 0...0

    if mode == "exact":
        return ProtocolOutcome(probs, values, float(probs @ values))
    if mode == "sample":
        rng = np.random.default_rng(seed)
        draws = rng.choice(probs.size, size=samples, p=probs / probs.sum())
        freq = np.bincount(draws, minlength=probs.size) / samples
        return ProtocolOutcome(freq, values, float(values[draws].mean()))
    raise DomainError(f"unknown mode {mode!r}")
