"""Command-line entry point: ``psdrank <subcommand> ...``.

Exit codes: 0 success, 1 a verification or reproduction check failed,
2 usage error or malformed input.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import bounds as B
from . import factorizations as F
from . import generators as G
from . import io
from .exceptions import PsdRankError
from .linalg import DEFAULT_TOL, ToleranceConfig
from .protocol import evaluate_protocol, ip_protocol
from .reproduce import EXAMPLE_IDS, reproduce

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
SEED_ENV = "PSDRANK_SEED"
DEFAULT_BOUNDS = "b1,b1r,b2,b3,b4,b5"


class UsageError(PsdRankError, ValueError):
    pass


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw == "":
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _emit(report: dict[str, Any], path: str | None) -> None:
    text = io.dumps_report(report)
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _tol(args) -> ToleranceConfig:
    rank = getattr(args, "rank_tol", None)
    verify_tol = getattr(args, "tol", None)
    return ToleranceConfig(
        rank_rel_threshold=DEFAULT_TOL.rank_rel_threshold if rank is None else rank,
        psd_eig_floor=DEFAULT_TOL.psd_eig_floor,
        verify_abs_tol=DEFAULT_TOL.verify_abs_tol if verify_tol is None else verify_tol,
    )


def _read_json(path: str) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise io.MalformedInputError(f"{path}: invalid JSON ({exc})") from None


# ---------------------------------------------------------------------------
# gen


def cmd_gen(args) -> int:
    params = {"n": args.n, "eps": args.eps, "c": args.c, "a": args.a}
    allowed = G.FAMILIES.get(args.family, (None, ()))[1]
    stray = [k for k, v in params.items() if v is not None and k not in allowed]
    if args.family in G.FAMILIES and stray:
        raise UsageError(f"family {args.family!r} does not take --{', --'.join(stray)}")
    m = G.generate(args.family, **{k: v for k, v in params.items() if v is not None})
    io.save_matrix(m, args.out)
    print(f"{args.family}: {m.shape[0]}x{m.shape[1]} -> {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# bounds


def _parse_bound_list(text: str) -> list[str]:
    names = [s.strip() for s in text.split(",") if s.strip()]
    bad = [s for s in names if s not in B.BOUND_NAMES]
    if bad or not names:
        raise UsageError(f"--bounds: unknown bound(s) {bad}; choose from {list(B.BOUND_NAMES)}")
    return names


def _load_q_file(path: str, shape: tuple[int, int]) -> dict[str, np.ndarray]:
    obj = _read_json(path)
    if not isinstance(obj, dict):
        raise io.MalformedInputError(f"{path}: expected a JSON object with keys 'b3', 'b5' and/or 'd'")
    extra = set(obj) - {"b3", "b5", "d"}
    if extra:
        raise io.MalformedInputError(f"{path}: unexpected field(s) {sorted(extra)}")
    out = {}
    expected = {"b3": (shape[1],), "b5": shape, "d": (shape[0],)}
    for key, want in expected.items():
        if key not in obj:
            continue
        try:
            arr = np.asarray(obj[key], dtype=float)
        except (TypeError, ValueError):
            raise io.MalformedInputError(f"{path}: field {key!r} must be numeric") from None
        if arr.shape != want:
            raise io.MalformedInputError(f"{path}: field {key!r} must have shape {list(want)}, got {list(arr.shape)}")
        out[key] = arr
    return out


def _bounds_for(a: np.ndarray, names: list[str], cfg: B.SimplexOptConfig,
                tol: ToleranceConfig, overrides: dict[str, np.ndarray]) -> list[dict[str, Any]]:
    d = overrides.get("d")
    results = []
    for name in names:
        if name in ("b3r", "b4r", "b5r"):
            rep = B.rescaled_bound(a, name[:-1], cfg, d_override=d)
        elif name == "b3" and "b3" in overrides:
            rep = B.bound_b3(a, cfg, q_override=overrides["b3"])
        elif name == "b5" and "b5" in overrides:
            rep = B.bound_b5(a, cfg, q_overrides=overrides["b5"])
        else:
            rep = B.compute_bound(a, name, cfg, tol)
        results.append(rep.to_dict())
    return results


def cmd_bounds(args) -> int:
    a = io.load_matrix(args.matrix)
    names = _parse_bound_list(args.bounds)
    if args.rescale:
        names += [n + "r" for n in ("b3", "b4", "b5") if n in names and n + "r" not in names]
    cfg = B.SimplexOptConfig(max_iters=args.max_iters, restarts=args.restarts,
                             step_rule=args.step_rule, seed=args.seed)
    tol = _tol(args)
    overrides = _load_q_file(args.q_file, a.shape) if args.q_file else {}
    report: dict[str, Any] = {
        "command": "bounds",
        "shape": list(a.shape),
        "seed": args.seed,
        "bounds": _bounds_for(a, names, cfg, tol, overrides),
    }
    if args.also_transpose:
        if overrides:
            raise UsageError("--q-file cannot be combined with --also-transpose")
        report["transpose"] = _bounds_for(a.T.copy(), names, cfg, tol, {})
        report["best"] = {
            b["bound"]: max(b["value"], t["value"]) for b, t in zip(report["bounds"], report["transpose"])
        }
    for entry in report["bounds"]:
        print(f"{entry['bound']:>10}  {entry['value']:.10g}")
    for entry in report.get("transpose", []):
        print(f"{entry['bound'] + '^T':>10}  {entry['value']:.10g}")
    if args.report:
        _emit(report, args.report)
    return EXIT_OK


# ---------------------------------------------------------------------------
# factorize / verify


def _factorize(args) -> tuple[F.PsdFactorization, np.ndarray]:
    fam = args.family
    if fam == "ne":
        if args.n is None:
            raise UsageError("factorize ne requires --n")
        if args.n % 2:
            return F.ne_factorization_odd(args.n), G.derangement(args.n**2)
        return F.ne_factorization_even(args.n), G.derangement(args.n**2 - 1)
    if fam == "mc":
        if args.n is None or args.c is None:
            raise UsageError("factorize mc requires --n and --c")
        return F.mc_factorization(args.n, args.c), G.m_c(args.n, args.c)
    if fam == "ip":
        if args.n is None:
            raise UsageError("factorize ip requires --n")
        return F.ip_factorization(args.n, args.k, _tol(args)), G.inner_product(args.n)
    if fam == "disj":
        if args.n is None:
            raise UsageError("factorize disj requires --n")
        return F.disjointness_factorization(args.n), G.disjointness(args.n)
    # not-full
    if (args.matrix is None) == (args.a is None):
        raise UsageError("factorize not-full requires exactly one of --matrix or --a")
    target = io.load_matrix(args.matrix) if args.matrix else G.tensor_pair(args.a)
    return F.not_full_factorization(target, _tol(args)), target


def cmd_factorize(args) -> int:
    fact, target = _factorize(args)
    if args.realify:
        fact = F.realify(fact)
    io.save_factorization(fact, args.out)
    rep = F.verify(fact, target, _tol(args))
    print(f"{args.family}: size {fact.size} ({fact.field}), {fact.shape[0]}x{fact.shape[1]}, "
          f"max error {rep.max_abs_error:.3g} -> {args.out}")
    return EXIT_OK


def cmd_verify(args) -> int:
    target = io.load_matrix(args.matrix)
    fact = io.load_factorization(args.factorization)
    rep = F.verify(fact, target, _tol(args))
    report = {
        "command": "verify",
        "size": fact.size,
        "field": fact.field,
        "tol": args.tol,
        "max_abs_error": rep.max_abs_error,
        "min_eigenvalue_e": rep.min_eigenvalue_e,
        "min_eigenvalue_f": rep.min_eigenvalue_f,
        "non_psd_e": list(rep.non_psd_e),
        "non_psd_f": list(rep.non_psd_f),
        "ok": rep.ok,
    }
    print(f"{'OK' if rep.ok else 'FAILED'}: size {fact.size}, max error {rep.max_abs_error:.3g}")
    if args.report:
        _emit(report, args.report)
    return EXIT_OK if rep.ok else EXIT_FAIL


# ---------------------------------------------------------------------------
# protocol


def cmd_protocol_ip(args) -> int:
    mode = "sample" if args.samples is not None else "exact"
    out = ip_protocol(args.n, args.x, args.y, mode=mode,
                      samples=args.samples if args.samples is not None else 1, seed=args.seed)
    report = {"command": "protocol ip", "n": args.n, "x": args.x, "y": args.y, "mode": mode,
              **out.to_dict()}
    if mode == "sample":
        report.update(samples=args.samples, seed=args.seed)
    print(f"expectation {out.expectation:.10g}")
    if args.report:
        _emit(report, args.report)
    return EXIT_OK


def _load_values(text: str) -> np.ndarray:
    if Path(text).suffix.lower() == ".json" or Path(text).exists():
        obj = _read_json(text)
        if isinstance(obj, dict):
            if "values" not in obj:
                raise io.MalformedInputError(f"{text}: missing field 'values'")
            obj = obj["values"]
        try:
            return np.asarray(obj, dtype=float).ravel()
        except (TypeError, ValueError):
            raise io.MalformedInputError(f"{text}: field 'values' must be a list of numbers") from None
    try:
        return np.array([float(s) for s in text.split(",")])
    except ValueError:
        raise UsageError("--values must be a JSON file or a comma-separated list") from None


def cmd_protocol_eval(args) -> int:
    fact = io.load_factorization(args.factorization)
    out = evaluate_protocol(fact, args.column, _load_values(args.values))
    report = {"command": "protocol eval", "column": args.column, **out.to_dict()}
    print(f"expectation {out.expectation:.10g}")
    if args.report:
        _emit(report, args.report)
    return EXIT_OK


# ---------------------------------------------------------------------------
# reproduce


def cmd_reproduce(args) -> int:
    ids = list(EXAMPLE_IDS) if args.example == "all" else [args.example]
    cfg = B.SimplexOptConfig(restarts=args.restarts, seed=args.seed)
    reports = []
    for ex in ids:
        rep = reproduce(ex, cfg)
        reports.append(rep)
        for line in rep.lines():
            print(line)
    ok = all(r.passed for r in reports)
    if args.report:
        _emit({"command": "reproduce", "seed": args.seed, "pass": ok,
               "examples": [r.to_dict() for r in reports]}, args.report)
    print(f"{sum(r.passed for r in reports)}/{len(reports)} examples passed")
    return EXIT_OK if ok else EXIT_FAIL


# ---------------------------------------------------------------------------
# parser


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def build_parser(seed_default: int) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="psdrank", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a matrix family member")
    g.add_argument("--family", required=True, choices=sorted(G.FAMILIES))
    g.add_argument("--n", type=int)
    g.add_argument("--eps", type=float)
    g.add_argument("--c", type=float)
    g.add_argument("--a", type=float)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen)

    b = sub.add_parser("bounds", help="compute PSD-rank lower bounds")
    b.add_argument("--matrix", required=True)
    b.add_argument("--bounds", default=DEFAULT_BOUNDS,
                   help=f"comma-separated subset of {','.join(B.BOUND_NAMES)}")
    b.add_argument("--rescale", action="store_true", help="also report rescaled b3/b4/b5")
    b.add_argument("--restarts", type=_positive_int, default=16)
    b.add_argument("--max-iters", type=_positive_int, default=20000)
    b.add_argument("--step-rule", choices=("frank_wolfe", "projected_gradient"), default="frank_wolfe")
    b.add_argument("--seed", type=int, default=seed_default)
    b.add_argument("--rank-tol", type=float, help="relative singular value threshold")
    b.add_argument("--q-file", help="JSON with fixed 'b3' q, 'b5' per-row q's and/or rescaling 'd'")
    b.add_argument("--also-transpose", action="store_true")
    b.add_argument("--report")
    b.set_defaults(func=cmd_bounds)

    f = sub.add_parser("factorize", help="build an explicit PSD factorization")
    f.add_argument("--family", required=True, choices=("ne", "mc", "ip", "not-full", "disj"))
    f.add_argument("--n", type=int)
    f.add_argument("--c", type=float)
    f.add_argument("--k", type=int)
    f.add_argument("--a", type=float)
    f.add_argument("--matrix")
    f.add_argument("--realify", action="store_true")
    f.add_argument("--rank-tol", type=float)
    f.add_argument("--out", required=True)
    f.set_defaults(func=cmd_factorize)

    v = sub.add_parser("verify", help="check a factorization against a matrix")
    v.add_argument("--matrix", required=True)
    v.add_argument("--factorization", required=True)
    v.add_argument("--tol", type=float, default=DEFAULT_TOL.verify_abs_tol)
    v.add_argument("--report")
    v.set_defaults(func=cmd_verify)

    pr = sub.add_parser("protocol", help="simulate one-way protocols")
    psub = pr.add_subparsers(dest="protocol", required=True)
    pi = psub.add_parser("ip", help="inner-product protocol")
    pi.add_argument("--n", type=int, required=True)
    pi.add_argument("--x", required=True)
    pi.add_argument("--y", required=True)
    pi.add_argument("--samples", type=_positive_int)
    pi.add_argument("--seed", type=int, default=seed_default)
    pi.add_argument("--report")
    pi.set_defaults(func=cmd_protocol_ip)
    pe = psub.add_parser("eval", help="protocol from a normalized factorization")
    pe.add_argument("--factorization", required=True)
    pe.add_argument("--column", type=int, required=True)
    pe.add_argument("--values", required=True, help="JSON file or comma-separated list")
    pe.add_argument("--report")
    pe.set_defaults(func=cmd_protocol_eval)

    r = sub.add_parser("reproduce", help="rerun the worked examples")
    r.add_argument("--example", required=True, choices=(*EXAMPLE_IDS, "all"))
    r.add_argument("--restarts", type=_positive_int, default=16)
    r.add_argument("--seed", type=int, default=seed_default)
    r.add_argument("--report")
    r.set_defaults(func=cmd_reproduce)
    return p


def run(argv: Sequence[str] | None = None) -> int:
    try:
        parser = build_parser(_default_seed())
    except UsageError as exc:
        print(f"psdrank: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors this way
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except (PsdRankError, ValueError, OSError) as exc:
        print(f"psdrank: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
