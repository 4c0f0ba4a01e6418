"""Batch front-end: subcommands, JSON/CSV reports, deterministic output.

Subcommands: lemma-checks, honest-check, bounds, verify-isometry, game,
sweep-noise.  Reports are JSON on stdout (optionally a file), floats are
rounded to 15 significant digits, and every report embeds the SHA-256 of
its canonical config so identical runs are byte-identical.  Exit status is
0 iff every assertion in the run passed; usage errors exit 2.  The env var
SELFTEST_LAB_THREADS caps the worker count for distance evaluations.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Optional, Sequence

from . import bitstrings as bs
from . import bounds as bnd
from .bitstrings import AdjacencyMatrix, BitString, PhaseFunction
from .game import (
    MAX_GAME_EXPECTATION,
    delta_and_epsilon,
    game_expectation_exact,
    sample_game,
)
from .isometry import verify_bound
from .protocols import epsilon_my, epsilon_spp, my_test_spec, spp_test_spec
from .strategies import (
    EpsilonBundle,
    NoiseSpec,
    Strategy,
    honest_my_strategy,
    honest_spp_strategy,
    load_strategy,
    perturb_strategy,
)

HONEST_CHECK_TOL = 1e-12


class UsageError(Exception):
    pass


# --- deterministic emission -------------------------------------------------


def round_floats(obj):
    """Round every float to 15 significant digits, recursively."""
    if isinstance(obj, float):
        return float(f"{obj:.15g}")
    if isinstance(obj, dict):
        return {k: round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_floats(v) for v in obj]
    return obj


def config_hash(config: dict) -> str:
    canonical = json.dumps(round_floats(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def emit(report: dict, out: Optional[str], csv_path: Optional[str], csv_rows=None):
    text = json.dumps(round_floats(report), sort_keys=True, indent=2)
    print(text)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    if csv_path and csv_rows is not None:
        with open(csv_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            for row in csv_rows:
                writer.writerow(
                    [f"{v:.15g}" if isinstance(v, float) else v for v in row]
                )


@dataclass(frozen=True)
class RunConfig:
    """Validated parameters of a strategy-driven run."""

    command: str
    flavor: Optional[str] = None
    m: Optional[int] = None
    strategy: Optional[str] = None
    theta: float = 0.0
    w: float = 0.0
    noise_seed: int = 0
    seed: Optional[int] = None
    rounds: int = 0
    pairs: str = "auto"
    sample_count: int = 64

    def __post_init__(self):
        if self.m is not None and self.m < 1:
            raise UsageError(f"m must be >= 1, got {self.m}")
        if self.strategy and self.strategy not in ("honest-my", "honest-spp"):
            if not os.path.exists(self.strategy):
                raise UsageError(f"strategy file not found: {self.strategy}")
        needs_seed = self.rounds > 0 or self.pairs.startswith("sample")
        if needs_seed and self.seed is None:
            raise UsageError("sampling requested but no --seed given")

    def to_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}


def _resolve_strategy(cfg: RunConfig) -> Strategy:
    if cfg.strategy in ("honest-my", "honest-spp"):
        if cfg.m is None:
            raise UsageError("named strategies need --m")
        build = honest_my_strategy if cfg.strategy == "honest-my" else honest_spp_strategy
        s = build(cfg.m)
        if cfg.theta or cfg.w:
            s = perturb_strategy(
                s, NoiseSpec(theta=cfg.theta, w=cfg.w), seed=cfg.noise_seed
            )
        return s
    with open(cfg.strategy) as fh:
        return load_strategy(json.load(fh))


# --- lemma-checks -----------------------------------------------------------


def run_lemma_checks(
    max_n: int,
    even_ns: Sequence[int],
    phase: Optional[PhaseFunction] = None,
) -> tuple[bool, list[dict]]:
    """All exhaustive bit-string checks; the phase override is a test hook."""
    checks = []

    def add(name, n, ok, detail=None):
        entry = {"name": name, "n": n, "passed": bool(ok)}
        if detail:
            entry["detail"] = detail
        checks.append(entry)

    for n in range(1, max_n + 1):
        ok = all(
            bs.average_dot(t) == Fraction(bs.hamming_weight(t), 2)
            for t in BitString.all_strings(n)
        )
        add("string-sum-average", n, ok)
        add("string-sum-double-average", n, bs.double_average_dot(n) == Fraction(n, 4))
        ok = all(
            bs.parity_average(t) == (1 if t.value == 0 else 0)
            for t in BitString.all_strings(n)
        )
        add("string-sum-parity", n, ok)
    for n in even_ns:
        add("half-swap-identity", n, bs.check_half_swap_identity(n))
    for n in even_ns:
        adj = AdjacencyMatrix.half_swap(n)
        witness = bs.find_phase_violation(adj, phase=phase)
        add(
            "phase-consistency",
            n,
            witness is None,
            None if witness is None else f"violated at s={witness[0]} t={witness[1]}",
        )
    return all(c["passed"] for c in checks), checks


def cmd_lemma_checks(args) -> tuple[int, dict, None]:
    even_ns = _parse_int_list(args.even_n)
    if any(n % 2 for n in even_ns):
        raise UsageError(f"half-swap checks need even n, got {even_ns}")
    if args.max_n > bs.EXHAUSTIVE_LIMIT or any(
        n > bs.EXHAUSTIVE_LIMIT for n in even_ns
    ):
        raise UsageError(f"range exceeds exhaustive limit {bs.EXHAUSTIVE_LIMIT}")
    ok, checks = run_lemma_checks(args.max_n, even_ns, phase=args.phase_override)
    config = {"command": "lemma-checks", "max_n": args.max_n, "even_n": even_ns}
    report = {
        "command": "lemma-checks",
        "config": config,
        "config_sha256": config_hash(config),
        "checks": checks,
        "passed": ok,
    }
    return (0 if ok else 1), report, None


# --- honest-check -----------------------------------------------------------


def cmd_honest_check(args) -> tuple[int, dict, list]:
    if args.m > 3:
        raise UsageError(f"honest-check is capped at m=3, got {args.m}")
    config = {"command": "honest-check", "flavor": args.flavor, "m": args.m}
    if args.flavor == "my":
        strategy = honest_my_strategy(args.m)
        rep = epsilon_my(strategy)
        game = None
        ok = rep.eps <= HONEST_CHECK_TOL
    elif args.flavor == "spp":
        strategy = honest_spp_strategy(args.m)
        rep = epsilon_spp(strategy)
        exact = game_expectation_exact(strategy)
        delta, game_eps = delta_and_epsilon(strategy)
        game_ok = abs(exact - MAX_GAME_EXPECTATION) <= HONEST_CHECK_TOL
        game = {
            "E": exact,
            "delta": delta,
            "eps": game_eps,
            "ideal": MAX_GAME_EXPECTATION,
            "passed": game_ok,
        }
        ok = rep.eps <= HONEST_CHECK_TOL and game_ok
    else:
        raise UsageError(f"unknown flavor {args.flavor!r}")
    report = {
        "command": "honest-check",
        "config": config,
        "config_sha256": config_hash(config),
        "test": args.flavor,
        "m": args.m,
        "eps": rep.eps,
        "entries": [vars(e) for e in rep.entries],
        "worst_entry": vars(rep.argmax()),
        "game": game,
        "passed": ok,
    }
    return (0 if ok else 1), report, list(rep.csv_rows())


# --- bounds -----------------------------------------------------------------


def cmd_bounds(args) -> tuple[int, dict, None]:
    bundle = EpsilonBundle(
        eps=args.eps,
        eps1=args.eps1,
        eps2=args.eps2,
        eps3=args.eps3,
        eps4=args.eps4,
        delta=args.delta,
    )
    names = bnd.bound_names() if args.bound == "all" else (args.bound,)
    reports = [
        bnd.evaluate_bound(name, args.n, args.weight_p, bundle).to_dict()
        for name in names
    ]
    config = {
        "command": "bounds",
        "bound": args.bound,
        "n": args.n,
        "weight_p": args.weight_p,
        "eps": args.eps,
        "eps1": args.eps1,
        "eps2": args.eps2,
        "eps3": args.eps3,
        "eps4": args.eps4,
        "delta": args.delta,
    }
    report = {
        "command": "bounds",
        "config": config,
        "config_sha256": config_hash(config),
        "bounds": reports,
        "passed": True,
    }
    return 0, report, None


# --- verify-isometry --------------------------------------------------------


def cmd_verify_isometry(args) -> tuple[int, dict, list]:
    pairs, sample_count = _parse_pairs(args.pairs)
    cfg = RunConfig(
        command="verify-isometry",
        flavor=args.test,
        m=args.m,
        strategy=args.strategy,
        theta=args.theta,
        w=args.w,
        noise_seed=args.noise_seed,
        seed=args.seed,
        pairs=pairs,
        sample_count=sample_count,
    )
    strategy = _resolve_strategy(cfg)
    spec = my_test_spec(strategy.m) if args.test == "my" else spp_test_spec(strategy.m)
    eps_report = epsilon_my(strategy) if args.test == "my" else epsilon_spp(strategy)
    reports = verify_bound(
        strategy,
        spec,
        pairs=pairs,
        seed=cfg.seed or 0,
        sample_count=sample_count,
        eps=eps_report.eps,
    )
    ok = all(r.passed for r in reports)
    max_distance = max(r.distance for r in reports)
    summary = (
        f"verify-isometry[{args.test}] m={strategy.m}: {len(reports)} pairs, "
        f"eps={eps_report.eps:.6g}, max distance={max_distance:.6g}, "
        f"{'all bounds hold' if ok else 'BOUND VIOLATED'}"
    )
    print(summary, file=sys.stderr)
    config = cfg.to_dict()
    report = {
        "command": "verify-isometry",
        "config": config,
        "config_sha256": config_hash(config),
        "test": args.test,
        "m": strategy.m,
        "eps": eps_report.eps,
        "pairs": len(reports),
        "max_distance": max_distance,
        "summary": summary,
        "reports": [r.to_dict() for r in reports],
        "passed": ok,
    }
    rows = [("p", "q", "distance", "max_bound", "vacuous", "passed")]
    for r in reports:
        top = max(r.bounds.values())
        rows.append(
            (r.p, r.q, r.distance, top, top > bnd.VACUOUS_THRESHOLD, r.passed)
        )
    return (0 if ok else 1), report, rows


# --- game -------------------------------------------------------------------


def cmd_game(args) -> tuple[int, dict, None]:
    cfg = RunConfig(
        command="game",
        m=args.m,
        strategy=args.strategy,
        theta=args.theta,
        w=args.w,
        noise_seed=args.noise_seed,
        seed=args.seed,
        rounds=args.rounds,
    )
    strategy = _resolve_strategy(cfg)
    exact = game_expectation_exact(strategy)
    delta, eps = delta_and_epsilon(strategy)
    bound = bnd.game_robustness_bound(2 * strategy.m, 0, delta)
    ok = True
    mc = None
    if args.rounds:
        mc = sample_game(strategy, args.rounds, seed=cfg.seed, referee=args.referee)
        band = 4.0 * mc["stderr"]
        mc["within_4_sigma"] = abs(mc["mean"] - exact) <= band
        ok = bool(mc["within_4_sigma"])
    config = cfg.to_dict()
    report = {
        "command": "game",
        "config": config,
        "config_sha256": config_hash(config),
        "m": strategy.m,
        "exact": exact,
        "ideal": MAX_GAME_EXPECTATION,
        "delta": delta,
        "eps": eps,
        "bound": {
            "game": bound,
            "vacuous": bound > bnd.VACUOUS_THRESHOLD,
        },
        "monte_carlo": mc,
        "passed": ok,
    }
    return (0 if ok else 1), report, None


# --- sweep-noise ------------------------------------------------------------


def cmd_sweep_noise(args) -> tuple[int, dict, list]:
    pairs, sample_count = _parse_pairs(args.pairs)
    thetas = _parse_float_list(args.thetas)
    ws = _parse_float_list(args.ws)
    cfg = RunConfig(
        command="sweep-noise",
        flavor=args.flavor,
        m=args.m,
        strategy=f"honest-{args.flavor}",
        seed=args.seed,
        pairs=pairs,
        sample_count=sample_count,
    )
    build = honest_my_strategy if args.flavor == "my" else honest_spp_strategy
    honest = build(args.m)
    spec = my_test_spec(args.m) if args.flavor == "my" else spp_test_spec(args.m)
    measure = epsilon_my if args.flavor == "my" else epsilon_spp
    points = []
    ok = True
    for i, (theta, w) in enumerate((t, w) for t in thetas for w in ws):
        noisy = perturb_strategy(
            honest, NoiseSpec(theta=theta, w=w), seed=(cfg.seed or 0) + i
        )
        eps = measure(noisy).eps
        reports = verify_bound(
            noisy, spec, pairs=pairs, seed=cfg.seed or 0,
            sample_count=sample_count, eps=eps,
        )
        max_dist = max(r.distance for r in reports)
        bounds = reports[0].bounds if reports else {}
        names = sorted(bounds)
        printed = max(bounds[n] for n in names if "recomputed" not in n)
        recomputed = max(bounds[n] for n in names if "recomputed" in n)
        point_ok = all(r.passed for r in reports)
        ok = ok and point_ok
        points.append(
            {
                "theta": theta,
                "w": w,
                "eps": eps,
                "max_distance": max_dist,
                "printed_bound": printed,
                "recomputed_bound": recomputed,
                "vacuous": max(printed, recomputed) > bnd.VACUOUS_THRESHOLD,
                "passed": point_ok,
            }
        )
    config = cfg.to_dict()
    config.update({"thetas": thetas, "ws": ws})
    report = {
        "command": "sweep-noise",
        "config": config,
        "config_sha256": config_hash(config),
        "points": points,
        "passed": ok,
    }
    rows = [
        (
            "theta", "w", "eps", "max_distance",
            "printed_bound", "recomputed_bound", "vacuous", "passed",
        )
    ]
    rows += [
        (
            p["theta"], p["w"], p["eps"], p["max_distance"],
            p["printed_bound"], p["recomputed_bound"], p["vacuous"], p["passed"],
        )
        for p in points
    ]
    return (0 if ok else 1), report, rows


# --- parsing ----------------------------------------------------------------


def _parse_int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"bad integer list {text!r}") from exc


def _parse_float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"bad float list {text!r}") from exc


def _parse_pairs(text: str) -> tuple[str, int]:
    if text in ("auto", "exhaustive"):
        return text, 64
    if text.startswith("sample:"):
        try:
            return "sample", int(text.split(":", 1)[1])
        except ValueError as exc:
            raise UsageError(f"bad pair policy {text!r}") from exc
    raise UsageError(f"pair policy {text!r} must be auto, exhaustive or sample:<count>")


def _add_strategy_flags(sub):
    sub.add_argument("--strategy", default="honest-my",
                     help="honest-my, honest-spp, or a strategy JSON path")
    sub.add_argument("--m", type=int, default=1, help="sub-test count for named strategies")
    sub.add_argument("--theta", type=float, default=0.0, help="rotation noise angle")
    sub.add_argument("--w", type=float, default=0.0, help="state mixing weight")
    sub.add_argument("--noise-seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="selftest-lab",
        description="Exact-simulation laboratory for two-player e-bit self-tests",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="also write the JSON report to this path")
    common.add_argument("--csv", help="write a CSV of per-entry rows to this path")
    subs = parser.add_subparsers(dest="command", required=True, parser_class=(
        lambda **kw: argparse.ArgumentParser(parents=[common], **kw)
    ))

    p = subs.add_parser("lemma-checks", help="exhaustive bit-string identity checks")
    p.add_argument("--max-n", type=int, default=10, help="string-sum checks run for n=1..max")
    p.add_argument("--even-n", default="2,4,6", help="even lengths for the half-swap checks")
    p.set_defaults(fn=cmd_lemma_checks, phase_override=None)

    p = subs.add_parser("honest-check", help="ideal correlations of an honest strategy")
    p.add_argument("--flavor", choices=("my", "spp"), required=True)
    p.add_argument("--m", type=int, default=1)
    p.set_defaults(fn=cmd_honest_check)

    p = subs.add_parser("bounds", help="evaluate robustness bound formulas")
    p.add_argument("--bound", default="all",
                   help=f"one of {', '.join(bnd.bound_names())}, or all")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--weight-p", type=int, default=0)
    p.add_argument("--eps", type=float, default=0.0)
    p.add_argument("--eps1", type=float, default=0.0)
    p.add_argument("--eps2", type=float, default=0.0)
    p.add_argument("--eps3", type=float, default=0.0)
    p.add_argument("--eps4", type=float, default=0.0)
    p.add_argument("--delta", type=float, default=0.0)
    p.set_defaults(fn=cmd_bounds)

    p = subs.add_parser("verify-isometry", help="distance vs bound over (p,q) pairs")
    _add_strategy_flags(p)
    p.add_argument("--test", choices=("my", "spp"), required=True)
    p.add_argument("--pairs", default="auto", help="auto, exhaustive, or sample:<count>")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(fn=cmd_verify_isometry)

    p = subs.add_parser("game", help="exact and sampled value of the non-local game")
    _add_strategy_flags(p)
    p.set_defaults(strategy="honest-spp")
    p.add_argument("--rounds", type=int, default=0, help="Monte Carlo rounds (0: exact only)")
    p.add_argument("--referee", choices=("threshold", "subtest"), default="threshold")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(fn=cmd_game)

    p = subs.add_parser("sweep-noise", help="noise grid: eps, distances, bounds")
    p.add_argument("--flavor", choices=("my", "spp"), default="my")
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--thetas", default="0,0.01,0.02,0.03,0.04,0.05")
    p.add_argument("--ws", default="0")
    p.add_argument("--pairs", default="auto")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_sweep_noise)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        code, report, csv_rows = args.fn(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (KeyError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    emit(report, args.out, args.csv, csv_rows)
    return code


if __name__ == "__main__":
    sys.exit(main())
