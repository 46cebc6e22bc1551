import numpy as np
import pytest

from psdrank import generators as G
from psdrank.exceptions import DomainError


def test_derangement_small():
    assert G.generate("derangement", n=2).tolist() == [[0, 1], [1, 0]]


def test_hexagon_first_row():
    h = G.hexagon_slack()
    assert h.shape == (6, 6)
    assert h[0].tolist() == [0, 0, 1, 2, 2, 1]
    # circulant
    for i in range(6):
        assert np.array_equal(h[i], np.roll(h[0], i))


def test_disjointness_is_kronecker_power():
    d1 = np.array([[1, 1], [1, 0]])
    assert np.array_equal(G.disjointness(1), d1)
    assert np.array_equal(G.disjointness(2), np.kron(d1, d1))
    for n in range(1, 5):
        expected = np.ones((1, 1))
        for _ in range(n):
            expected = np.kron(expected, d1)
        assert np.array_equal(G.disjointness(n), expected)


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_inner_product_block_recursion(k):
    ip = G.inner_product(k)
    nxt = G.inner_product(k + 1)
    assert np.array_equal(ip, ip.T)
    # the new bit is the leading bit of both x and y
    expected = np.block([[ip, ip], [ip, 1 - ip]])
    assert np.array_equal(nxt, expected)


def test_every_family_is_nonnegative():
    mats = [
        G.derangement(5), G.eps_identity(4, 0.3), G.m_c(9, 3), G.m_c(10, 0.5), G.inner_product(3),
        G.disjointness(3), G.hexagon_slack(), G.example_4_4(), G.example_4_10(), G.example_5_1(),
        G.example_5_2(), G.example_5_3(), G.tensor_pair(0.5),
    ]
    for m in mats:
        assert np.all(m >= 0)
    assert np.all(np.diag(G.derangement(7)) == 0)


def test_m_c_shape_and_entries():
    m = G.m_c(4, 2.5)
    assert np.allclose(np.diag(m), 2.5)
    assert np.allclose(m[~np.eye(4, dtype=bool)], 1.0)


def test_example_shapes():
    assert G.example_4_4().shape == (10, 10)
    assert G.example_5_1(10).shape == (11, 11)
    assert np.allclose(G.example_4_4()[0], 1.0)


def test_dominant_entry_columns():
    assert G.has_no_dominant_entry_columns(np.eye(2)).tolist() == [False, False]
    assert G.has_no_dominant_entry_columns(G.tensor_pair(0.5)).all()
    assert not G.has_no_dominant_entry_columns(G.tensor_pair(0.1)).all()


def test_generate_spec_and_errors():
    spec = G.MatrixFamilySpec("eps_identity", {"n": 3, "eps": 0.2})
    assert np.allclose(G.generate(spec), G.eps_identity(3, 0.2))
    with pytest.raises(DomainError):
        G.generate("nope")
    with pytest.raises(DomainError):
        G.generate("derangement")
    with pytest.raises(DomainError):
        G.generate("derangement", n=3, eps=0.1)
    with pytest.raises(DomainError):
        G.generate("eps_identity", n=3, eps=-0.1)
    with pytest.raises(DomainError):
        G.generate("m_c", n=3, c=-1)
    with pytest.raises(DomainError):
        G.tensor_pair(-1)
