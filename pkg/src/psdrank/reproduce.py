"""Regenerate the worked examples and compare computed numbers with published ones."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import bounds as B
from . import factorizations as F
from . import generators as G
from .exceptions import DomainError
from .linalg import fidelity_matrix, numeric_rank
from .protocol import ip_protocol

__all__ = ["EXAMPLE_IDS", "Row", "ReproductionReport", "reproduce"]

EXAMPLE_IDS = ("ex3.6", "ex4.4", "ex4.7", "ex4.10", "ex5.1", "ex5.2", "ex5.3", "ex5.4",
               "ne", "mc", "ip", "disj")


@dataclass
class Row:
    quantity: str
    published_value: float
    computed_value: float
    relation: str
    tol: float = 0.0

    @property
    def passed(self) -> bool:
        c, p = self.computed_value, self.published_value
        if self.relation == ">=":
            return c >= p - self.tol
        if self.relation == ">":
            return c > p
        if self.relation == "<=":
            return c <= p + self.tol
        if self.relation == "<":
            return c < p
        if self.relation in ("~", "="):
            return abs(c - p) <= self.tol
        raise ValueError(f"unknown relation {self.relation!r}")

    def to_dict(self) -> dict[str, Any]:
        return {"quantity": self.quantity, "published_value": self.published_value,
                "computed_value": self.computed_value, "relation": self.relation,
                "tol": self.tol, "pass": self.passed}


@dataclass
class ReproductionReport:
    example_id: str
    params: dict[str, Any] = field(default_factory=dict)
    rows: list[Row] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def add(self, quantity: str, published: float, computed: float, relation: str, tol: float = 0.0) -> None:
        self.rows.append(Row(quantity, float(published), float(computed), relation, tol))

    def to_dict(self) -> dict[str, Any]:
        return {"example_id": self.example_id, "params": dict(self.params),
                "rows": [r.to_dict() for r in self.rows], "pass": self.passed}

    def lines(self) -> list[str]:
        out = []
        for r in self.rows:
            mark = "PASS" if r.passed else "FAIL"
            out.append(f"[{mark}] {self.example_id} {r.quantity}: computed {r.computed_value:.6g} "
                       f"{r.relation} published {r.published_value:.6g}")
        return out


APPROX = 0.01
EXACT = 1e-9


def _ex3_6(rep: ReproductionReport, a: float | None, **_: Any) -> None:
    values = [math.sqrt(2) - 1, 0.5, 1.5, math.sqrt(2) + 1] if a is None else [a]
    for val in values:
        target = G.tensor_pair(val)
        fact = F.not_full_factorization(target)
        rep.add(f"size of A(x)A factorization, a={val:.6g}", 4, fact.size, "<")
        rep.add(f"verify error, a={val:.6g}", 1e-9, F.verify(fact, target).max_abs_error, "<=")


def _ex4_4(rep: ReproductionReport, n: int, eps: float, cfg: B.SimplexOptConfig, **_: Any) -> None:
    a = G.example_4_4(n, eps)
    fid = fidelity_matrix(a / a.sum(axis=0))
    f1 = (1 + math.sqrt(eps) + (n - 2) * eps) / (math.sqrt(1 + (n - 1) * eps) * math.sqrt(2 + (n - 2) * eps))
    f2 = (1 + 2 * math.sqrt(eps) + (n - 3) * eps) / (2 + (n - 2) * eps)
    rep.add("f1 = F(P_1, P_i)", f1, fid[0, 1], "=", EXACT)
    rep.add("f2 = F(P_i, P_j)", f2, fid[1, 2], "=", EXACT)
    closed = n**2 / (n + 2 * (n - 1) * f1**2 + (n - 2) * (n - 1) * f2**2)
    uniform = np.full(n, 1.0 / n)
    b3u = B.bound_b3(a, q_override=uniform).value
    rep.add("B3 uniform q (closed form)", closed, b3u, "=", EXACT)
    rep.add("B3 uniform q", 2.09, b3u, "~", APPROX)
    rep.add("B3 optimized", 2.09, B.bound_b3(a, cfg).value, ">=")
    d = np.r_[0.0, np.full(n - 1, 10.0)]
    rep.add("B3(DA) uniform q", 4.88, B.bound_b3(a, q_override=uniform, d=d).value, "~", APPROX)
    rep.add("B3'(A) with published D, optimized q", 4.88, B.rescaled_bound(a, "b3", cfg, d_override=d).value, ">=")


def _ex4_7(rep: ReproductionReport, n: int, eps: float, cfg: B.SimplexOptConfig, **_: Any) -> None:
    a = G.example_4_4(n, eps)
    d = np.r_[0.0, np.full(n - 1, 10.0)]
    b4 = B.bound_b4(a).value
    b4r = B.rescaled_bound(a, "b4", cfg, d_override=d).value
    rep.add("B4", 5.24, b4, "~", APPROX)
    rep.add("B4' with published D", 8.33, b4r, ">=")
    rep.add("ceil B4' (prank >=)", 9, math.ceil(b4r - 1e-9), "=")
    rep.add("ceil B1", 4, math.ceil(B.bound_b1(a).value - 1e-9), "=")
    rep.add("ceil B2 of DA", 6, math.ceil(B.bound_b2(d[:, None] * a).value - 1e-9), "=")


def _ex4_10(rep: ReproductionReport, n: int, eps: float, cfg: B.SimplexOptConfig, **_: Any) -> None:
    a = G.example_4_10(n, eps)
    qs = np.zeros((n, n))
    for i in range(n):
        qs[i, i] = qs[i, (i + 1) % n] = 0.5
    rep.add("B4", 4.81, B.bound_b4(a).value, "~", APPROX)
    rep.add("B5 half/half q", 5.36, B.bound_b5(a, q_overrides=qs).value, ">=")
    rep.add("B5 optimized", 5.36, B.bound_b5(a, cfg).value, ">=")


def _ex5_1(rep: ReproductionReport, n: int, cfg: B.SimplexOptConfig, **_: Any) -> None:
    a = G.example_5_1(n)
    rep.add("B4 = (n+1)/2", (n + 1) / 2, B.bound_b4(a).value, "=", EXACT)
    rep.add("B2 = (n+1)/(2 sqrt n)", (n + 1) / (2 * math.sqrt(n)), B.bound_b2(a).value, "~", APPROX)


def _ex5_2(rep: ReproductionReport, n: int, eps: float, cfg: B.SimplexOptConfig, **_: Any) -> None:
    a = G.example_5_2(n, eps)
    b3u = B.bound_b3(a, q_override=np.full(n, 1.0 / n)).value
    rep.add("B1", 3.16, B.bound_b1(a).value, "~", APPROX)
    rep.add("B2", 3.42, B.bound_b2(a).value, "~", APPROX)
    rep.add("B4", 3.99, B.bound_b4(a).value, "~", APPROX)
    rep.add("B3 uniform q", 4.52, b3u, ">=")
    rep.add("ceil B3 (prank >=)", 5, math.ceil(b3u - 1e-9), "=")


def _ex5_3(rep: ReproductionReport, n: int, eps: float, cfg: B.SimplexOptConfig, **_: Any) -> None:
    a = G.example_5_3(n, eps)
    rep.add("B1", 3.16, B.bound_b1(a).value, "~", APPROX)
    rep.add("B2", 1.0005, B.bound_b2(a).value, "~", 0.001)
    rep.add("B4", 1.099, B.bound_b4(a).value, "~", 0.001)
    rep.add("B3 optimized (around 1)", 1.0, B.bound_b3(a, cfg).value, "~", 0.1)
    rep.add("B5 optimized", 1.1, B.bound_b5(a, cfg).value, "<")


def _ex5_4(rep: ReproductionReport, cfg: B.SimplexOptConfig, **_: Any) -> None:
    a = G.hexagon_slack()
    rep.add("B1 = sqrt 3 (published 1.73)", math.sqrt(3), B.bound_b1(a).value, "=", EXACT)
    rep.add("B2", 1.59, B.bound_b2(a).value, "~", APPROX)
    rep.add("B4", 2.0, B.bound_b4(a).value, "=", EXACT)
    rep.add("B3 uniform q", 2.1, B.bound_b3(a, q_override=np.full(6, 1 / 6)).value, ">")
    rep.add("B3 optimized stays below 3", 3.0, B.bound_b3(a, cfg).value, "<")
    rep.add("B5 optimized stays below 3", 3.0, B.bound_b5(a, cfg).value, "<")


def _ne(rep: ReproductionReport, n: int, **_: Any) -> None:
    if n % 2:
        target = G.derangement(n * n)
        fact = F.ne_factorization_odd(n)
        rep.add("B1 of target (tightness)", n, B.bound_b1(target).value, "=", EXACT)
    else:
        target = G.derangement(n * n - 1)
        fact = F.ne_factorization_even(n)
    rep.add("factorization size", n, fact.size, "=")
    rep.add("verify error", 1e-12, F.verify(fact, target).max_abs_error, "<=")
    real = F.realify(fact)
    rep.add("realified size", 2 * n, real.size, "=")
    rep.add("realified verify error", 1e-12, F.verify(real, target).max_abs_error, "<=")


def _mc(rep: ReproductionReport, n: int, c: float, **_: Any) -> None:
    fact = F.mc_factorization(n, c)
    if c > 2:
        ceiling = 2 * math.ceil(c) * math.ceil(math.sqrt(n))
    else:
        ceiling = math.ceil(math.sqrt(2 * n)) + 1
    rep.add("factorization size", ceiling, fact.size, "<=")
    rep.add("verify error", 1e-10, F.verify(fact, G.m_c(n, c)).max_abs_error, "<=")


def _ip(rep: ReproductionReport, n: int, **_: Any) -> None:
    N = 2**n
    m = F.ip_sign_matrix(n)
    target = G.inner_product(n)
    ceiling = 2 * math.sqrt(N) - 1 if n % 2 == 0 else 1.5 * math.sqrt(2) * math.sqrt(N) - 1
    rep.add("M o conj(M) = IP_n", 0, float(np.max(np.abs(m * m - target))), "=")
    rep.add("rank of sign matrix", ceiling, numeric_rank(m), "<=", 1e-9)
    rep.add("verify error", 1e-9, F.verify(F.ip_factorization(n), target).max_abs_error, "<=")
    if n % 2 == 0 and n <= 8:
        worst = 0.0
        for x in range(N):
            for y in range(N):
                out = ip_protocol(n, format(x, f"0{n}b"), format(y, f"0{n}b"))
                worst = max(worst, abs(out.expectation - target[x, y]))
        rep.add("protocol expectation error (all inputs)", 0, worst, "=")


def _disj(rep: ReproductionReport, n: int, **_: Any) -> None:
    target = G.disjointness(n)
    fact = F.disjointness_factorization(n)
    rep.add("tensor factorization size", 2**n, fact.size, "=")
    rep.add("verify error", 1e-12, F.verify(fact, target).max_abs_error, "<=")
    rep.add("block-zero lower bound", 2**n, B.block_zero_bound(target).value, ">=", 1e-9)


_RUNNERS = {
    "ex3.6": (_ex3_6, {"a": None}),
    "ex4.4": (_ex4_4, {"n": 10, "eps": 0.01}),
    "ex4.7": (_ex4_7, {"n": 10, "eps": 0.01}),
    "ex4.10": (_ex4_10, {"n": 10, "eps": 0.01}),
    "ex5.1": (_ex5_1, {"n": 10}),
    "ex5.2": (_ex5_2, {"n": 10, "eps": 0.001}),
    "ex5.3": (_ex5_3, {"n": 10, "eps": 0.9}),
    "ex5.4": (_ex5_4, {}),
    "ne": (_ne, {"n": 3}),
    "mc": (_mc, {"n": 9, "c": 3}),
    "ip": (_ip, {"n": 4}),
    "disj": (_disj, {"n": 3}),
}


def reproduce(example_id: str, cfg: B.SimplexOptConfig | None = None, **params: Any) -> ReproductionReport:
    """Run one worked example. ``params`` override the published defaults (``n``, ``eps``, ``c``, ``a``)."""
    if example_id not in _RUNNERS:
        raise DomainError(f"unknown example {example_id!r}; choose from {EXAMPLE_IDS}")
    runner, defaults = _RUNNERS[example_id]
    unknown = {k for k, v in params.items() if v is not None} - set(defaults)
    if unknown:
        raise DomainError(f"example {example_id!r} does not take {sorted(unknown)}")
    merged = dict(defaults)
    merged.update({k: v for k, v in params.items() if v is not None})
    if "n" in merged and merged["n"] is not None:
        merged["n"] = int(merged["n"])
    rep = ReproductionReport(example_id, merged)
    runner(rep, cfg=cfg or B.SimplexOptConfig(), **merged)
    return rep
