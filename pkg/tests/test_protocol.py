import itertools

import numpy as np
import pytest

from psdrank import factorizations as F
from psdrank import generators as G
from psdrank.exceptions import DomainError, PreconditionError
from psdrank.linalg import column_normalize
from psdrank.protocol import evaluate_protocol, ip_bits, ip_protocol


def bit_strings(n):
    return ["".join(b) for b in itertools.product("01", repeat=n)]


def normalized_ne(n=3):
    target = column_normalize(G.derangement(n * n))
    fact = F.rescale(F.ne_factorization_odd(n), col_scale=np.full(n * n, 1.0 / (n * n - 1)))
    return F.normalize_to_povm_form(fact, target), target


def test_identity_protocol():
    n = 4
    e = np.einsum("ia,ib->iab", np.eye(n), np.eye(n))
    fact = F.PsdFactorization(e, e.copy())
    for i in range(n):
        for j in range(n):
            assert evaluate_protocol(fact, j, np.eye(n)[i]).expectation == pytest.approx(float(i == j))


def test_ne_protocol_reproduces_columns():
    fact, target = normalized_ne()
    m = target.shape[0]
    for j in range(m):
        out = evaluate_protocol(fact, j, np.ones(m))
        assert out.outcome_probs.sum() == pytest.approx(1)
        assert np.allclose(out.outcome_probs, target[:, j], atol=1e-9)
        # output 1/P(i, j) on a fixed outcome i recovers the indicator of i != j
        i = (j + 1) % m
        v = np.zeros(m)
        v[i] = 1.0 / target[i, j]
        assert evaluate_protocol(fact, j, v).expectation == pytest.approx(1.0)


def test_normalized_random_factorizations_give_column_distributions(rng):
    for _ in range(20):
        e = rng.random((4, 3, 3))
        e = np.einsum("iab,icb->iac", e, e)
        f = rng.random((5, 3, 3))
        f = np.einsum("iab,icb->iac", f, f)
        fact = F.PsdFactorization(e, f)
        target = fact.realized().real
        scale = target.sum(axis=0)
        fact = F.normalize_to_povm_form(F.rescale(fact, col_scale=1 / scale), target / scale)
        for j in range(5):
            out = evaluate_protocol(fact, j, np.ones(4))
            assert np.allclose(out.outcome_probs, (target / scale)[:, j], atol=1e-9)


def test_evaluate_protocol_errors():
    fact = F.ne_factorization_odd(3)
    with pytest.raises(PreconditionError):
        evaluate_protocol(fact, 0, np.ones(9))
    nf, _ = normalized_ne()
    with pytest.raises(DomainError):
        evaluate_protocol(nf, 99, np.ones(9))
    with pytest.raises(DomainError):
        evaluate_protocol(nf, 0, np.ones(3))
    with pytest.raises(DomainError):
        evaluate_protocol(nf, 0, -np.ones(9))


def test_ip_protocol_small_cases():
    assert ip_protocol(2, "11", "11").expectation == 0
    out = ip_protocol(2, "10", "10")
    assert out.expectation == 1
    # post-selection on flag=1, data=0 happens with probability 1/2 and pays 2
    k = int(np.flatnonzero(out.output_values)[0])
    assert out.outcome_probs[k] == 0.5 and out.output_values[k] == 2


@pytest.mark.parametrize("n", [2, 4, 6, 8])
def test_ip_protocol_exact(n):
    ip = G.inner_product(n)
    strings = bit_strings(n)
    step = 1 if n <= 4 else 7
    for a in range(0, len(strings), step):
        for b in range(0, len(strings), step):
            out = ip_protocol(n, strings[a], strings[b])
            assert out.expectation == ip[a, b]
            assert out.outcome_probs.sum() == 1.0
            assert out.outcome_probs.size == 2 ** (n // 2 + 1)


def test_ip_protocol_sampling_within_five_standard_errors():
    n, samples = 4, 100_000
    for x, y in [("1010", "0110"), ("1111", "1110"), ("0000", "1111")]:
        out = ip_protocol(n, x, y, mode="sample", samples=samples, seed=11)
        values = ip_protocol(n, x, y).output_values
        probs = ip_protocol(n, x, y).outcome_probs
        sd = np.sqrt(probs @ values**2 - (probs @ values) ** 2)
        target = ip_bits(x, y)
        assert abs(out.expectation - target) <= 5 * sd / np.sqrt(samples) + 1e-12


def test_ip_protocol_custom_functions():
    # W(x, y) = f(x0, y) xor g(x1, y) with f = 1, g = 0 is identically 1
    out = ip_protocol(2, "01", "10", f=lambda xs, ys: 1, g=lambda xs, ys: 0)
    assert out.expectation == 1


def test_ip_protocol_errors():
    with pytest.raises(DomainError):
        ip_protocol(3, "101", "011")
    with pytest.raises(DomainError):
        ip_protocol(22, "0" * 22, "0" * 22)
    with pytest.raises(DomainError):
        ip_protocol(2, "1", "11")
    with pytest.raises(DomainError):
        ip_protocol(2, "12", "11")
    with pytest.raises(DomainError):
        ip_protocol(2, "10", "11", mode="other")


def test_ip_protocol_seeded_sampling_reproducible():
    a = ip_protocol(4, "1100", "1010", mode="sample", samples=1000, seed=5)
    b = ip_protocol(4, "1100", "1010", mode="sample", samples=1000, seed=5)
    assert a.expectation == b.expectation
    assert np.array_equal(a.outcome_probs, b.outcome_probs)
