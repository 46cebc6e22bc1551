"""Lower bounds on PSD-rank.

All bounds act on a nonnegative matrix. All-zero rows and columns are dropped
first, and the fidelity-based bounds (``b3``, ``b4``, ``b5``) normalize the
columns to probability distributions.

The optimizing bounds return a certificate (the distributions ``q`` and, for
rescaled variants, the row scaling ``d``). Any feasible certificate yields a
valid lower bound, so a report's value can always be recomputed with
:func:`evaluate_certificate`, independently of the optimizer that found it.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from .exceptions import DomainError, PreconditionError
from .linalg import (
    DEFAULT_TOL,
    ToleranceConfig,
    as_matrix,
    fidelity_matrix,
    mutual_information_bits,
    numeric_rank,
)

log = logging.getLogger(__name__)

__all__ = [
    "BOUND_NAMES",
    "BoundReport",
    "SimplexOptConfig",
    "project_to_simplex",
    "minimize_quadratic_on_simplex",
    "bound_b1",
    "bound_b1_real",
    "bound_b2",
    "bound_b3",
    "bound_b4",
    "bound_b5",
    "rescaled_bound",
    "block_zero_bound",
    "compute_bound",
    "evaluate_b3",
    "evaluate_b4",
    "evaluate_b5",
    "evaluate_certificate",
]

BOUND_NAMES = ("b1", "b1r", "b2", "b3", "b4", "b5", "b3r", "b4r", "b5r", "block_zero")


@dataclass
class SimplexOptConfig:
    max_iters: int = 20000
    restarts: int = 16
    step_rule: str = "frank_wolfe"
    convergence_tol: float = 1e-12
    seed: int = 0
    # coordinate-descent sweeps for the rescaling search
    rescale_sweeps: int = 4

    def __post_init__(self) -> None:
        if self.max_iters < 1 or self.restarts < 1 or self.rescale_sweeps < 1:
            raise ValueError("iteration and restart counts must be positive")
        if self.step_rule not in ("frank_wolfe", "projected_gradient"):
            raise ValueError(f"unknown step rule {self.step_rule!r}")


@dataclass
class BoundReport:
    bound_name: str
    value: float
    certificate: dict[str, Any] = field(default_factory=dict)
    solver_stats: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        cert = {k: np.asarray(v).tolist() if isinstance(v, np.ndarray) else v
                for k, v in self.certificate.items()}
        return {
            "bound": self.bound_name,
            "value": self.value,
            "certificate": cert,
            "solver_stats": dict(self.solver_stats),
        }


# ---------------------------------------------------------------------------
# helpers


def _nonnegative(a) -> np.ndarray:
    arr = as_matrix(a)
    if np.iscomplexobj(arr):
        if np.any(arr.imag != 0):
            raise DomainError("bounds require a real nonnegative matrix")
        arr = arr.real
    if np.any(arr < 0):
        raise DomainError("bounds require a nonnegative matrix")
    if not np.any(arr > 0):
        raise DomainError("bounds are undefined for the zero matrix")
    return arr


def _normalized_support(a, d=None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Apply row scaling ``d``, drop zero lines, normalize columns.

    Returns ``(P, kept_rows, kept_cols)``.
    """
    arr = _nonnegative(a)
    if d is not None:
        d = np.asarray(d, dtype=float).ravel()
        if d.shape != (arr.shape[0],):
            raise DomainError(f"rescaling vector must have length {arr.shape[0]}")
        if np.any(d < 0):
            raise DomainError("rescaling entries must be nonnegative")
        arr = d[:, None] * arr
        if not np.any(arr > 0):
            raise DomainError("rescaling zeroes the whole matrix")
    rows = np.flatnonzero(np.any(arr > 0, axis=1))
    cols = np.flatnonzero(np.any(arr > 0, axis=0))
    sub = arr[np.ix_(rows, cols)]
    return sub / sub.sum(axis=0), rows, cols


def _expand(values: np.ndarray, kept: np.ndarray, size: int) -> np.ndarray:
    out = np.zeros(size)
    out[kept] = values
    return out


def project_to_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    ind = np.arange(1, len(v) + 1)
    rho = np.flatnonzero(u - css / ind > 0)[-1]
    return np.maximum(v - css[rho] / (rho + 1), 0.0)


def _frank_wolfe(g: np.ndarray, x: np.ndarray, cfg: SimplexOptConfig) -> tuple[np.ndarray, int]:
    # Fully corrective Frank-Wolfe (Wolfe's minimum-norm-point method): add the
    # linear-minimization vertex, then minimize exactly over the affine hull of
    # the active vertices, backtracking into the simplex when that leaves it.
    k = g.shape[0]
    scale = max(float(np.max(np.diag(g))), 1e-300)
    active = [int(np.argmax(x))]
    lam = np.array([1.0])
    best = float(g[active[0], active[0]])
    it = 0
    while it < cfg.max_iters:
        it += 1
        full = np.zeros(k)
        full[active] = lam
        grad = g @ full
        j = int(np.argmin(grad))
        if full @ grad - grad[j] <= cfg.convergence_tol * scale or j in active:
            break
        prev_active, prev_lam = list(active), lam.copy()
        active.append(j)
        lam = np.append(lam, 0.0)
        while it < cfg.max_iters:
            it += 1
            s = len(active)
            sub = g[np.ix_(active, active)]
            c = max(float(np.mean(np.diag(sub))), 1e-300)  # balances the border
            kkt = np.full((s + 1, s + 1), c)
            kkt[:s, :s] = sub
            kkt[s, s] = 0.0
            rhs = np.zeros(s + 1)
            rhs[s] = c
            alpha = np.linalg.lstsq(kkt, rhs, rcond=None)[0][:s]
            if not np.all(np.isfinite(alpha)):
                break
            if np.all(alpha > 1e-14):
                lam = alpha
                break
            neg = (alpha <= 1e-14) & (lam - alpha > 0)
            theta = min(1.0, float(np.min(lam[neg] / (lam[neg] - alpha[neg])))) if np.any(neg) else 0.0
            lam = lam + theta * (alpha - lam)
            keep = lam > 1e-14
            if not np.any(keep):
                keep[int(np.argmax(lam))] = True
            active = [a for a, kp in zip(active, keep) if kp]
            lam = np.maximum(lam[keep], 0.0)
            lam = lam / lam.sum() if lam.sum() > 0 else np.full(len(active), 1.0 / len(active))
        cur = float(lam @ g[np.ix_(active, active)] @ lam)
        if cur >= best - 1e-15 * scale:
            if cur > best:
                active, lam = prev_active, prev_lam
            break  # numerically stalled
        best = cur
    out = np.zeros(k)
    out[active] = lam
    return out, it


def _projected_gradient(g: np.ndarray, x: np.ndarray, cfg: SimplexOptConfig) -> tuple[np.ndarray, int]:
    lip = 2.0 * max(float(np.linalg.eigvalsh(g)[-1]), 1e-300)
    x = x.copy()
    it = 0
    for it in range(1, cfg.max_iters + 1):
        nxt = project_to_simplex(x - (2.0 * g @ x) / lip)
        if np.max(np.abs(nxt - x)) <= cfg.convergence_tol:
            x = nxt
            break
        x = nxt
    return x, it


def minimize_quadratic_on_simplex(
    g: np.ndarray, cfg: SimplexOptConfig | None = None, starts: list[np.ndarray] | None = None
) -> tuple[np.ndarray, float, dict[str, Any]]:
    """Minimize ``x^T g x`` over the probability simplex for PSD ``g``.

    Starts from the uniform point and ``cfg.restarts - 1`` Dirichlet draws
    unless explicit ``starts`` are given. Ties keep the lowest restart index.
    """
    cfg = cfg or SimplexOptConfig()
    g = np.asarray(g, dtype=float)
    k = g.shape[0]
    if starts is None:
        rng = np.random.default_rng(cfg.seed)
        starts = [np.full(k, 1.0 / k)]
        starts += [rng.dirichlet(np.ones(k)) for _ in range(cfg.restarts - 1)]
    solver = _frank_wolfe if cfg.step_rule == "frank_wolfe" else _projected_gradient
    best_x, best_val, best_idx, total = None, np.inf, -1, 0
    for idx, x0 in enumerate(starts):
        x, its = solver(g, np.asarray(x0, dtype=float), cfg)
        total += its
        val = float(x @ g @ x)
        if val < best_val - 1e-15:
            best_x, best_val, best_idx = x, val, idx
    stats = {"iterations": total, "restarts": len(starts), "best_restart": best_idx,
             "seed": cfg.seed, "step_rule": cfg.step_rule}
    return best_x, best_val, stats


# ---------------------------------------------------------------------------
# certificate evaluation (closed forms)


def evaluate_b3(a, q, d=None) -> float:
    """``1 / sum_ij q_i q_j F(P_i, P_j)^2`` for the given ``q`` (and row scaling)."""
    p, _, cols = _normalized_support(a, d)
    q = np.asarray(q, dtype=float).ravel()
    n = _nonnegative(a).shape[1]
    if q.shape != (n,) or np.any(q < 0) or abs(q.sum() - 1.0) > 1e-9:
        raise DomainError("q must be a probability distribution over the columns")
    dropped = np.setdiff1d(np.arange(n), cols)
    if np.any(q[dropped] > 0):
        raise DomainError("q puts mass on an all-zero column")
    qs = q[cols]
    g = fidelity_matrix(p) ** 2
    return 1.0 / float(qs @ g @ qs)


def evaluate_b4(a, d=None) -> float:
    p, _, _ = _normalized_support(a, d)
    return float(p.max(axis=1).sum())


def evaluate_b5(a, qs, d=None) -> float:
    """Sum over rows of ``(q^(i) . P_i) / sqrt(q^(i)^T F^2 q^(i))``.

    ``qs`` is an ``m x n`` array (one distribution per original row). Rows that
    are zero after scaling contribute nothing and their distributions are
    ignored.
    """
    arr = _nonnegative(a)
    p, rows, cols = _normalized_support(arr, d)
    qs = np.asarray(qs, dtype=float)
    if qs.shape != arr.shape:
        raise DomainError(f"need one distribution per row, shape {arr.shape}")
    g = fidelity_matrix(p) ** 2
    total = 0.0
    for r_local, r in enumerate(rows):
        q = qs[r]
        if np.any(q < 0) or abs(q.sum() - 1.0) > 1e-9:
            raise DomainError(f"q for row {r} is not a probability distribution")
        dropped = np.setdiff1d(np.arange(arr.shape[1]), cols)
        if np.any(q[dropped] > 0):
            raise DomainError(f"q for row {r} puts mass on an all-zero column")
        qc = q[cols]
        total += float(qc @ p[r_local]) / math.sqrt(float(qc @ g @ qc))
    return total


def evaluate_certificate(a, report: BoundReport) -> float:
    """Recompute a report's value from its certificate alone."""
    name, cert = report.bound_name, report.certificate
    d = cert.get("d")
    if name in ("b1", "b1r", "b2"):
        return compute_bound(a, name).value
    if name in ("b3", "b3r"):
        return evaluate_b3(a, cert["q"], d)
    if name in ("b4", "b4r"):
        return evaluate_b4(a, d)
    if name in ("b5", "b5r"):
        return evaluate_b5(a, cert["q"], d)
    if name == "block_zero":
        arr = _nonnegative(a)
        total = 0.0
        for leaf in cert["leaves"]:
            (r0, r1), (c0, c1) = leaf["rows"], leaf["cols"]
            block = arr[r0:r1, c0:c1]
            if "bound" not in leaf:  # custom leaf function, nothing to recheck
                total += float(leaf["value"])
            elif np.any(block > 0):
                total += evaluate_certificate(block, BoundReport(leaf["bound"], leaf["value"], leaf["certificate"]))
        return total
    raise DomainError(f"unknown bound {name!r}")


# ---------------------------------------------------------------------------
# bounds


def bound_b1(a, tol: ToleranceConfig = DEFAULT_TOL) -> BoundReport:
    """``sqrt(rank)``."""
    r = numeric_rank(_nonnegative(a), tol)
    return BoundReport("b1", math.sqrt(r), {"rank": r})


def bound_b1_real(a, tol: ToleranceConfig = DEFAULT_TOL) -> BoundReport:
    """Real-factor analogue of ``b1``: ``(sqrt(1 + 8 rank) - 1) / 2``."""
    r = numeric_rank(_nonnegative(a), tol)
    return BoundReport("b1r", (math.sqrt(1 + 8 * r) - 1) / 2, {"rank": r})


def bound_b2(a) -> BoundReport:
    """``2**I`` with ``I`` the mutual information (bits) of the normalized matrix."""
    info = mutual_information_bits(_nonnegative(a))
    return BoundReport("b2", 2.0**info, {"mutual_information_bits": info})


def bound_b3(a, cfg: SimplexOptConfig | None = None, q_override=None, d=None) -> BoundReport:
    cfg = cfg or SimplexOptConfig()
    n = _nonnegative(a).shape[1]
    name = "b3" if d is None else "b3r"
    cert: dict[str, Any] = {} if d is None else {"d": np.asarray(d, dtype=float)}
    if q_override is not None:
        q = np.asarray(q_override, dtype=float).ravel()
        cert["q"] = q
        return BoundReport(name, evaluate_b3(a, q, d), cert, {"override": True})
    p, _, cols = _normalized_support(a, d)
    g = fidelity_matrix(p) ** 2
    qs, val, stats = minimize_quadratic_on_simplex(g, cfg)
    q = _expand(qs, cols, n)
    cert["q"] = q
    return BoundReport(name, evaluate_b3(a, q, d), cert, stats)


def bound_b4(a, d=None) -> BoundReport:
    """Sum of the row maxima of the column-normalized matrix."""
    name = "b4" if d is None else "b4r"
    cert = {} if d is None else {"d": np.asarray(d, dtype=float)}
    return BoundReport(name, evaluate_b4(a, d), cert)


def _b5_row(p_row: np.ndarray, g: np.ndarray, cfg: SimplexOptConfig) -> tuple[np.ndarray, dict]:
    # max (q.p)/sqrt(q^T G q) is scale invariant; with w = p*q on the support of
    # p it becomes min w^T (G / p p^T) w over the simplex, a convex problem.
    support = np.flatnonzero(p_row > 0)
    ps = p_row[support]
    h = g[np.ix_(support, support)] / np.outer(ps, ps)
    starts = [np.full(len(support), 1.0 / len(support))]
    starts.append(np.eye(len(support))[int(np.argmax(ps))])
    rng = np.random.default_rng(cfg.seed)
    starts += [rng.dirichlet(np.ones(len(support))) for _ in range(max(cfg.restarts - 2, 0))]
    w, _, stats = minimize_quadratic_on_simplex(h, cfg, starts)
    q = np.zeros_like(p_row)
    q[support] = w / ps
    q /= q.sum()
    # guard against the optimizer losing to the best point mass
    k = int(np.argmax(p_row))
    mass = np.zeros_like(p_row)
    mass[k] = 1.0
    if (q @ p_row) / math.sqrt(q @ g @ q) < p_row[k] / math.sqrt(g[k, k]):
        q = mass
    return q, stats


def bound_b5(a, cfg: SimplexOptConfig | None = None, q_overrides=None, d=None) -> BoundReport:
    cfg = cfg or SimplexOptConfig()
    arr = _nonnegative(a)
    m, n = arr.shape
    name = "b5" if d is None else "b5r"
    cert: dict[str, Any] = {} if d is None else {"d": np.asarray(d, dtype=float)}
    if q_overrides is not None:
        qs = np.asarray(q_overrides, dtype=float)
        cert["q"] = qs
        return BoundReport(name, evaluate_b5(arr, qs, d), cert, {"override": True})
    p, rows, cols = _normalized_support(arr, d)
    g = fidelity_matrix(p) ** 2
    qs = np.zeros((m, n))
    qs[:, cols[0]] = 1.0  # placeholder for rows dropped by the scaling
    iterations = 0
    for r_local, r in enumerate(rows):
        q, stats = _b5_row(p[r_local], g, cfg)
        iterations += stats["iterations"]
        qs[r] = _expand(q, cols, n)
    cert["q"] = qs
    stats = {"iterations": iterations, "restarts": cfg.restarts, "seed": cfg.seed,
             "step_rule": cfg.step_rule}
    return BoundReport(name, evaluate_b5(arr, qs, d), cert, stats)


def _inner(inner: str, a, d, cfg: SimplexOptConfig) -> BoundReport:
    if inner == "b3":
        return bound_b3(a, cfg, d=d)
    if inner == "b4":
        return bound_b4(a, d=d)
    if inner == "b5":
        return bound_b5(a, cfg, d=d)
    raise DomainError(f"rescaling applies to b3, b4 or b5, not {inner!r}")


def rescaled_bound(a, inner: str, cfg: SimplexOptConfig | None = None, d_override=None) -> BoundReport:
    """Best inner bound over nonnegative diagonal row scalings ``D``.

    With ``d_override`` the given scaling is evaluated directly. Otherwise a
    coordinate search over log-scales (plus zeroing a row) is run from the
    identity and ``cfg.restarts - 1`` log-uniform perturbations of it.
    """
    cfg = cfg or SimplexOptConfig()
    arr = _nonnegative(a)
    if inner not in ("b3", "b4", "b5"):
        raise DomainError(f"rescaling applies to b3, b4 or b5, not {inner!r}")
    if d_override is not None:
        return _inner(inner, arr, np.asarray(d_override, dtype=float), cfg)

    m = arr.shape[0]
    rng = np.random.default_rng(cfg.seed)
    # the inner solve for b3/b5 is convex; one start is enough inside the search
    inner_cfg = SimplexOptConfig(max_iters=cfg.max_iters, restarts=1, step_rule=cfg.step_rule,
                                 convergence_tol=max(cfg.convergence_tol, 1e-10), seed=cfg.seed)
    factors = (0.0, 0.01, 0.1, 10**-0.5, 10**-0.25, 10**0.25, 10**0.5, 10.0, 100.0)

    def value(d: np.ndarray) -> float:
        try:
            return _inner(inner, arr, d, inner_cfg).value
        except DomainError:
            return -np.inf

    seeds = [np.ones(m)]
    if inner == "b5":
        # b5 dominates b4 at every scaling, so the cheap b4 optimum is a good seed
        seeds.append(np.asarray(rescaled_bound(arr, "b4", cfg).certificate["d"], dtype=float))
    best_d, best_val, best_idx, evals = None, -np.inf, -1, 0
    for restart in range(max(cfg.restarts, len(seeds))):
        d = seeds[restart] if restart < len(seeds) else 10.0 ** rng.uniform(-2, 2, size=m)
        cur = value(d)
        evals += 1
        for _ in range(cfg.rescale_sweeps):
            improved = False
            for r in range(m):
                for f in factors:
                    trial = d.copy()
                    trial[r] *= f
                    if f > 0 and trial[r] == 0:
                        trial[r] = 1.0
                    val = value(trial)
                    evals += 1
                    if val > cur + 1e-12:
                        d, cur, improved = trial, val, True
            if not improved:
                break
        if cur > best_val + 1e-12:
            best_d, best_val, best_idx = d, cur, restart
    # final report with the full-strength solver at the chosen scaling
    report = _inner(inner, arr, best_d / best_d.max(), cfg)
    if report.value < best_val - 1e-9:
        report = _inner(inner, arr, best_d / best_d.max(), inner_cfg)
    report.solver_stats = dict(report.solver_stats, restarts=cfg.restarts,
                               best_restart=best_idx, evaluations=evals, seed=cfg.seed)
    return report


LeafBound = Callable[[np.ndarray], "float | BoundReport"]


def _leaf_function(leaf: str | LeafBound, cfg: SimplexOptConfig, tol: ToleranceConfig) -> LeafBound:
    if callable(leaf):
        return leaf

    def fn(block: np.ndarray) -> BoundReport:
        if not np.any(block > 0):
            return BoundReport(leaf, 0.0)
        return compute_bound(block, leaf, cfg, tol)

    return fn


def _leaf_entry(fn: LeafBound, arr: np.ndarray, r0: int, r1: int, c0: int, c1: int) -> dict[str, Any]:
    out = fn(arr[r0:r1, c0:c1])
    entry: dict[str, Any] = {"rows": [r0, r1], "cols": [c0, c1]}
    if isinstance(out, BoundReport):
        entry.update(value=float(out.value), bound=out.bound_name, certificate=out.certificate)
    else:
        entry["value"] = float(out)
    return entry


def block_zero_bound(
    a,
    k: int | None = None,
    l: int | None = None,
    leaf: str | LeafBound = "b1",
    cfg: SimplexOptConfig | None = None,
    tol: ToleranceConfig = DEFAULT_TOL,
    zero_tol: float = 1e-12,
) -> BoundReport:
    """Lower bound from a zero lower-right block.

    For ``A = [[B, C], [D, 0]]`` with ``B`` of shape ``k x l`` the PSD-rank is
    at least ``prank(C) + prank(D)``. Sub-blocks are split again whenever they
    have the same pattern; the best of splitting and the leaf bound is kept
    at every level. When ``k``/``l`` are omitted the top level is searched too.
    """
    cfg = cfg or SimplexOptConfig(restarts=1)
    arr = _nonnegative(a)
    zero = arr <= zero_tol
    leaf_fn = _leaf_function(leaf, cfg, tol)
    memo: dict[tuple[int, int, int, int], tuple[float, list]] = {}

    def splits(r0: int, r1: int, c0: int, c1: int):
        # for each row split, the widest zero block anchored at the lower-right corner
        for kk in range(1, r1 - r0):
            sub = zero[r0 + kk:r1, c0:c1]
            cols_all_zero = np.all(sub, axis=0)
            ll = c1 - c0
            while ll > 0 and cols_all_zero[ll - 1]:
                ll -= 1
            if 0 < ll < c1 - c0:
                yield kk, ll

    def solve(r0: int, r1: int, c0: int, c1: int) -> tuple[float, list]:
        key = (r0, r1, c0, c1)
        if key in memo:
            return memo[key]
        entry = _leaf_entry(leaf_fn, arr, r0, r1, c0, c1)
        best = (entry["value"], [entry])
        for kk, ll in splits(r0, r1, c0, c1):
            c_val, c_leaves = solve(r0, r0 + kk, c0 + ll, c1)
            d_val, d_leaves = solve(r0 + kk, r1, c0, c0 + ll)
            if c_val + d_val > best[0] + 1e-12:
                best = (c_val + d_val, c_leaves + d_leaves)
        memo[key] = best
        return best

    m, n = arr.shape
    if k is None and l is None:
        value, leaves = solve(0, m, 0, n)
    else:
        if k is None or l is None or not (0 < k < m and 0 < l < n):
            raise PreconditionError(f"invalid partition k={k}, l={l} for shape {arr.shape}")
        if not np.all(zero[k:, l:]):
            raise PreconditionError(f"lower-right block rows {k}: cols {l}: is not zero")
        c_val, c_leaves = solve(0, k, l, n)
        d_val, d_leaves = solve(k, m, 0, l)
        value, leaves = c_val + d_val, c_leaves + d_leaves
    leaf_name = leaf if isinstance(leaf, str) else getattr(leaf, "__name__", "custom")
    return BoundReport("block_zero", float(value), {"leaves": leaves, "leaf_bound": leaf_name},
                       {"subproblems": len(memo)})


def compute_bound(
    a,
    name: str,
    cfg: SimplexOptConfig | None = None,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> BoundReport:
    """Dispatch on a bound name from :data:`BOUND_NAMES`."""
    if name == "b1":
        return bound_b1(a, tol)
    if name == "b1r":
        return bound_b1_real(a, tol)
    if name == "b2":
        return bound_b2(a)
    if name == "b3":
        return bound_b3(a, cfg)
    if name == "b4":
        return bound_b4(a)
    if name == "b5":
        return bound_b5(a, cfg)
    if name in ("b3r", "b4r", "b5r"):
        return rescaled_bound(a, name[:2], cfg)
    if name == "block_zero":
        return block_zero_bound(a, cfg=cfg, tol=tol)
    raise DomainError(f"unknown bound {name!r}; choose from {BOUND_NAMES}")
