import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from psdrank import generators as G
from psdrank.exceptions import DimensionError, DomainError
from psdrank.linalg import (
    ToleranceConfig,
    as_matrix,
    classical_fidelity,
    column_normalize,
    frobenius_norm,
    hadamard_product,
    is_psd,
    kronecker,
    mutual_information_bits,
    numeric_rank,
    psd_sqrt,
    quantum_fidelity,
    singular_values,
    strip_zero_lines,
    trace_norm,
    trace_norm_rank_bound,
)

from conftest import random_density


def test_singular_values_examples():
    assert np.allclose(singular_values(np.eye(3)), [1, 1, 1])
    assert np.allclose(singular_values(np.diag([3.0, 4.0])), [4, 3])
    assert np.allclose(singular_values(np.ones((2, 2))), [2, 0])


def test_empty_matrix_is_dimension_error():
    with pytest.raises(DimensionError):
        singular_values(np.zeros((0, 3)))
    with pytest.raises(DimensionError):
        as_matrix(np.zeros((2, 3)), square=True)


def test_numeric_rank_examples():
    assert numeric_rank(np.ones((4, 4))) == 1
    assert numeric_rank(G.derangement(4)) == 4
    assert numeric_rank(G.hexagon_slack()) == 3


def test_rank_threshold_is_relative():
    m = np.diag([1.0, 1e-8])
    assert numeric_rank(m) == 2
    assert numeric_rank(m, ToleranceConfig(rank_rel_threshold=1e-6)) == 1
    assert numeric_rank(1e-20 * m) == 2


def test_tolerance_config_validation():
    with pytest.raises(ValueError):
        ToleranceConfig(rank_rel_threshold=-1.0)


def test_norms():
    assert trace_norm(np.eye(3)) == pytest.approx(3)
    assert frobenius_norm(np.eye(3)) == pytest.approx(math.sqrt(3))
    assert trace_norm(np.diag([1.0, 2.0])) == pytest.approx(3)
    assert frobenius_norm(np.diag([1.0, 2.0])) == pytest.approx(math.sqrt(5))


def test_frobenius_matches_entrywise(rng):
    m = rng.normal(size=(5, 5))
    assert frobenius_norm(m) == pytest.approx(math.sqrt((m**2).sum()))


def test_trace_norm_rank_bound():
    assert trace_norm_rank_bound(np.eye(5)) == pytest.approx(5)
    assert trace_norm_rank_bound(np.outer([1, 2], [3, 4, 5])) == pytest.approx(1)
    assert trace_norm_rank_bound(np.diag([2.0, 1, 1])) == pytest.approx(8 / 3)
    with pytest.raises(DomainError):
        trace_norm_rank_bound(np.zeros((2, 2)))


def test_norm_properties(rng):
    for _ in range(50):
        m = rng.normal(size=tuple(rng.integers(1, 6, size=2)))
        assert frobenius_norm(m) <= trace_norm(m) + 1e-12
        assert trace_norm_rank_bound(m) <= numeric_rank(m) + 1e-8


def test_is_psd_examples():
    c = is_psd(np.eye(2))
    assert c.ok and c.min_eigenvalue == pytest.approx(1)
    c = is_psd(np.array([[1.0, 2.0], [2.0, 1.0]]))
    assert not c.ok and c.min_eigenvalue == pytest.approx(-1)
    c = is_psd(np.array([[1, 1j], [-1j, 1]]))
    assert c.ok and abs(c.min_eigenvalue) < 1e-12
    with pytest.raises(DimensionError):
        is_psd(np.ones((2, 3)))


def test_non_hermitian_is_not_psd():
    assert not is_psd(np.array([[1.0, 1.0], [0.0, 1.0]])).ok


def test_psd_sqrt_squares_back(rng):
    rho = random_density(rng, 4)
    r = psd_sqrt(rho)
    assert np.allclose(r @ r, rho)


def test_hadamard_and_kronecker():
    m = np.array([[1, 1j], [-1j, 1]])
    assert np.allclose(hadamard_product(m, m.conj()), np.ones((2, 2)))
    assert np.allclose(kronecker(np.eye(2), np.eye(2)), np.eye(4))
    a = 0.5
    expected = np.array([[1, a, a, a * a], [a, 1, a * a, a], [a, a * a, 1, a], [a * a, a, a, 1]])
    assert np.allclose(kronecker([[1, a], [a, 1]], [[1, a], [a, 1]]), expected)
    with pytest.raises(DimensionError):
        hadamard_product(np.ones((2, 2)), np.ones((2, 3)))


def test_numeric_rank_is_multiplicative_under_kronecker(rng):
    for _ in range(30):
        a = rng.normal(size=(3, 2)) @ rng.normal(size=(2, 4))
        b = rng.normal(size=(2, 1)) @ rng.normal(size=(1, 3))
        assert numeric_rank(kronecker(a, b)) == numeric_rank(a) * numeric_rank(b)


def test_classical_fidelity_examples():
    p = np.array([0.2, 0.3, 0.5])
    assert classical_fidelity(p, p) == pytest.approx(1)
    assert classical_fidelity([1, 0], [0, 1]) == 0
    with pytest.raises(DomainError):
        classical_fidelity([0.5, 0.6], [0.5, 0.5])
    with pytest.raises(DomainError):
        classical_fidelity([1.5, -0.5], [0.5, 0.5])


def test_classical_fidelity_on_example_4_4_columns():
    n, eps = 10, 0.01
    p = column_normalize(G.example_4_4(n, eps))
    f1 = (1 + math.sqrt(eps) + (n - 2) * eps) / (math.sqrt(1 + (n - 1) * eps) * math.sqrt(2 + (n - 2) * eps))
    assert classical_fidelity(p[:, 0], p[:, 1]) == pytest.approx(f1, abs=1e-12)


probability = st.lists(st.floats(0.0, 1.0), min_size=1, max_size=6).filter(lambda v: sum(v) > 1e-3)


@settings(max_examples=200, deadline=None)
@given(probability, st.randoms(use_true_random=False))
def test_classical_fidelity_symmetric_and_permutation_invariant(raw, rnd):
    p = np.array(raw) / sum(raw)
    q = np.roll(p, 1)
    perm = list(range(len(p)))
    rnd.shuffle(perm)
    f = classical_fidelity(p, q)
    assert f == pytest.approx(classical_fidelity(q, p), abs=1e-12)
    assert f == pytest.approx(classical_fidelity(p[perm], q[perm]), abs=1e-12)
    assert -1e-12 <= f <= 1 + 1e-12


def test_quantum_fidelity_examples(rng):
    rho = random_density(rng, 3)
    assert quantum_fidelity(rho, rho) == pytest.approx(1)
    assert quantum_fidelity(np.diag([1.0, 0]), np.diag([0.0, 1])) == pytest.approx(0, abs=1e-12)
    p, q = np.array([0.1, 0.6, 0.3]), np.array([0.5, 0.25, 0.25])
    assert quantum_fidelity(np.diag(p), np.diag(q)) == pytest.approx(classical_fidelity(p, q))
    with pytest.raises(DomainError):
        quantum_fidelity(np.diag([1.5, -0.5]), rho[:2, :2] / np.trace(rho[:2, :2]))


def test_fidelity_upper_bounds_overlap(rng):
    for _ in range(300):
        d = int(rng.integers(1, 9))
        rho, sigma = random_density(rng, d), random_density(rng, d)
        assert np.trace(sigma @ rho).real <= quantum_fidelity(sigma, rho) ** 2 + 1e-10


def test_mutual_information_examples():
    assert mutual_information_bits(np.ones((3, 4))) == pytest.approx(0, abs=1e-12)
    assert mutual_information_bits(np.eye(4)) == pytest.approx(2)
    assert 2 ** mutual_information_bits(G.example_5_3()) == pytest.approx(1.0005, abs=1e-3)
    with pytest.raises(DomainError):
        mutual_information_bits(np.zeros((2, 2)))


def test_strip_zero_lines():
    a = np.array([[0, 0, 0], [1, 0, 2.0]])
    sub, rows, cols = strip_zero_lines(a)
    assert sub.tolist() == [[1, 2]]
    assert rows.tolist() == [1] and cols.tolist() == [0, 2]
