import math

import numpy as np
import pytest

from psdrank import bounds as B
from psdrank import generators as G
from psdrank.exceptions import DomainError, PreconditionError
from psdrank.linalg import fidelity_matrix

FAST = B.SimplexOptConfig(restarts=4)


def test_project_to_simplex():
    x = B.project_to_simplex(np.array([0.5, 2.0, -1.0]))
    assert np.allclose(x, [0, 1, 0])
    y = B.project_to_simplex(np.array([0.2, 0.3, 0.5]))
    assert np.allclose(y, [0.2, 0.3, 0.5])


@pytest.mark.parametrize("rule", ["frank_wolfe", "projected_gradient"])
def test_simplex_qp_matches_closed_form(rule):
    # min x^T diag(w) x on the simplex: x_i proportional to 1/w_i, value 1/sum(1/w)
    w = np.array([1.0, 2.0, 4.0, 8.0])
    x, val, stats = B.minimize_quadratic_on_simplex(np.diag(w), B.SimplexOptConfig(step_rule=rule, restarts=3))
    assert val == pytest.approx(1 / np.sum(1 / w), rel=1e-9)
    assert np.allclose(x, (1 / w) / np.sum(1 / w), atol=1e-6)
    assert stats["restarts"] == 3 and stats["step_rule"] == rule


def test_simplex_qp_solvers_agree(rng):
    for _ in range(20):
        k = int(rng.integers(2, 7))
        p = rng.random((k + 1, k))
        g = fidelity_matrix(p / p.sum(axis=0)) ** 2
        _, v1, _ = B.minimize_quadratic_on_simplex(g, B.SimplexOptConfig(restarts=2))
        _, v2, _ = B.minimize_quadratic_on_simplex(g, B.SimplexOptConfig(restarts=2, step_rule="projected_gradient",
                                                                          max_iters=200000))
        assert v1 == pytest.approx(v2, rel=1e-6)


def test_b1_examples():
    assert B.bound_b1(G.hexagon_slack()).value == pytest.approx(1.73, abs=0.01)
    assert B.bound_b1(G.example_5_3()).value == pytest.approx(3.16, abs=0.01)
    assert B.bound_b1(np.eye(7)).value == pytest.approx(math.sqrt(7))
    assert B.bound_b1_real(np.eye(6)).value == pytest.approx(3)
    with pytest.raises(DomainError):
        B.bound_b1(np.zeros((2, 2)))


def test_b2_examples():
    assert B.bound_b2(np.eye(5)).value == pytest.approx(5)
    n = 10
    assert B.bound_b2(G.example_5_1(n)).value == pytest.approx((n + 1) / (2 * math.sqrt(n)), abs=0.01)
    assert B.bound_b2(G.example_5_2()).value == pytest.approx(3.42, abs=0.01)


def test_b3_examples():
    assert B.bound_b3(np.eye(5), q_override=np.full(5, 0.2)).value == pytest.approx(5)
    uniform = np.full(10, 0.1)
    assert B.bound_b3(G.example_4_4(), q_override=uniform).value == pytest.approx(2.09, abs=0.01)
    assert B.bound_b3(G.example_4_4(), FAST).value >= 2.09
    assert B.bound_b3(G.example_5_2(), q_override=uniform).value >= 4.52


def test_b3_rejects_bad_q():
    with pytest.raises(DomainError):
        B.bound_b3(np.eye(3), q_override=[0.5, 0.6, 0])
    a = np.array([[1.0, 0.0], [1.0, 0.0]])
    with pytest.raises(DomainError):
        B.bound_b3(a, q_override=[0.5, 0.5])


def test_b4_examples():
    assert B.bound_b4(G.hexagon_slack()).value == pytest.approx(2)
    n = 10
    assert B.bound_b4(G.example_5_1(n)).value == pytest.approx((n + 1) / 2, abs=1e-12)
    assert B.bound_b4(G.example_4_10()).value == pytest.approx(4.81, abs=0.01)


def test_b5_examples():
    assert B.bound_b5(np.eye(4), q_overrides=np.eye(4)).value == pytest.approx(4)
    a = G.example_4_10()
    n = a.shape[0]
    qs = np.zeros((n, n))
    for i in range(n):
        qs[i, i] = qs[i, (i + 1) % n] = 0.5
    assert B.bound_b5(a, q_overrides=qs).value >= 5.36
    assert B.bound_b5(G.example_5_3(), FAST).value < 1.1


def test_b5_dominates_b4_and_point_masses():
    for a in (G.hexagon_slack(), G.example_4_4(), G.example_5_2(), G.example_5_3()):
        assert B.bound_b5(a, FAST).value >= B.bound_b4(a).value - 1e-9


def test_rescaled_examples():
    a = G.example_4_4()
    d = np.r_[0.0, np.full(9, 10.0)]
    assert B.rescaled_bound(a, "b3", FAST, d_override=d).value >= 4.88
    assert B.rescaled_bound(a, "b4", FAST, d_override=d).value >= 8.33
    for inner in ("b3", "b4", "b5"):
        plain = B.compute_bound(a, inner, FAST).value
        assert B.rescaled_bound(a, inner, FAST, d_override=np.ones(10)).value == pytest.approx(plain, rel=1e-9)


def test_rescaled_search_is_monotone_and_certified():
    a = G.hexagon_slack()
    cfg = B.SimplexOptConfig(restarts=2)
    for inner in ("b3", "b4"):
        rep = B.rescaled_bound(a, inner, cfg)
        assert rep.value >= B.compute_bound(a, inner, cfg).value - 1e-9
        assert B.evaluate_certificate(a, rep) == pytest.approx(rep.value, abs=1e-9)
        # all hexagon bounds stay below the true value's ceiling
        assert rep.value <= 3 + 1e-6


def test_rescaling_that_zeroes_everything():
    with pytest.raises(DomainError):
        B.rescaled_bound(np.eye(2), "b4", d_override=[0.0, 0.0])
    with pytest.raises(DomainError):
        B.rescaled_bound(np.eye(2), "b1")


def test_block_zero_examples():
    assert B.block_zero_bound(G.disjointness(2)).value >= 4
    assert B.block_zero_bound(G.disjointness(3)).value >= 8
    assert B.block_zero_bound(np.array([[1.0, 1.0], [1.0, 0.0]]), 1, 1).value >= 2


def test_block_zero_precondition():
    with pytest.raises(PreconditionError):
        B.block_zero_bound(np.ones((2, 2)), 1, 1)
    with pytest.raises(PreconditionError):
        B.block_zero_bound(np.ones((2, 2)), 0, 1)


def test_b3_uniform_never_beats_optimized(rng):
    for _ in range(30):
        m, n = rng.integers(2, 6, size=2)
        a = rng.random((m, n))
        uniform = np.full(n, 1.0 / n)
        assert B.bound_b3(a, FAST).value >= B.bound_b3(a, q_override=uniform).value - 1e-9


def test_b4_column_scale_invariance(rng):
    for _ in range(30):
        a = rng.random((4, 5))
        scaled = a * rng.uniform(0.1, 10, size=5)
        assert B.bound_b4(scaled).value == pytest.approx(B.bound_b4(a).value, rel=1e-12)


def test_compute_bound_dispatch_and_reports():
    a = G.hexagon_slack()
    for name in B.BOUND_NAMES:
        rep = B.compute_bound(a, name, B.SimplexOptConfig(restarts=1))
        assert rep.bound_name == name
        d = rep.to_dict()
        assert set(d) == {"bound", "value", "certificate", "solver_stats"}
    with pytest.raises(DomainError):
        B.compute_bound(a, "b9")


def test_bounds_reject_negative_and_complex():
    with pytest.raises(DomainError):
        B.bound_b4(np.array([[1.0, -1.0]]))
    with pytest.raises(DomainError):
        B.bound_b4(np.array([[1.0, 1j]]))


def test_seeded_results_are_deterministic():
    a = G.example_5_2()
    r1 = B.bound_b5(a, B.SimplexOptConfig(restarts=3, seed=7))
    r2 = B.bound_b5(a, B.SimplexOptConfig(restarts=3, seed=7))
    assert r1.value == r2.value
    assert np.array_equal(r1.certificate["q"], r2.certificate["q"])
