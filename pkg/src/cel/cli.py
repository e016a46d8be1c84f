"""Command-line entry point: curves, ball queries, codes, pruning, experiments.

Exit codes are a stable contract: 0 success, 1 check failure, 2 usage
error, 3 IO failure.  Data goes to stdout (or --out); summaries and
progress go to stderr, so pipelines stay clean.  All floating-point output
is fixed at 9 decimals.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from pathlib import Path

from . import bounds, channels, codes, forbidden, plotting, sim
from .core import Codeword, ReceivedWord

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_IO = 3


def _write_text(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _resolve_jobs(value: int | None) -> int:
    if value is not None:
        return value
    env = os.environ.get("CEL_JOBS")
    return int(env) if env else 1


def cmd_bounds(args: argparse.Namespace) -> int:
    de = bounds.DeltaEta(args.delta, args.eta)
    curves = bounds.emit_curves(args.p_min, args.p_max, args.step, de)
    print(
        f"p1={bounds.P1:.9f} phi={bounds.phi_intersection():.9f}",
        file=sys.stderr,
    )
    _write_text(args.out, bounds.curves_to_csv(curves))
    if args.plot:
        plotting.plot_rate_curves(curves, args.plot)
    return EXIT_OK


def _canonical_ball_spec(n: int, k: int, budget: int, q: int) -> forbidden.BallSpec:
    # Size is center-independent; use the all-zero center with the first q
    # prefix positions erased.
    erased = ((1 << q) - 1) << (k - q) if q else 0
    prefix = ReceivedWord(k, 0, erased)
    suffix = Codeword(n - k, 0)
    return forbidden.BallSpec(n, k, budget, q, prefix, suffix)


def cmd_ball(args: argparse.Namespace) -> int:
    spec = _canonical_ball_spec(args.n, args.k, args.budget, args.q)
    size = forbidden.ball_size_exact(spec)
    record: dict = {
        "n": args.n,
        "k": args.k,
        "budget": args.budget,
        "q": args.q,
        "size": str(size),
        "bound": None,
        "pass": None,
    }
    if args.p is not None:
        de = bounds.DeltaEta(args.delta, args.eta)
        threshold = forbidden.lemma3_threshold(args.p, de, args.n)
        record["bound"] = str(threshold)
        record["pass"] = size <= threshold
    failed = False
    if args.enumerate:
        oracle = len(forbidden.ball_enumerate(spec))
        record["oracle_size"] = str(oracle)
        record["oracle"] = "pass" if oracle == size else "fail"
        failed = oracle != size
    _write_text(args.out, json.dumps(record, sort_keys=True, indent=2) + "\n")
    return EXIT_CHECK_FAILED if failed else EXIT_OK


def cmd_code(args: argparse.Namespace) -> int:
    table = codes.sample_systematic_code(args.n, args.k, args.d, args.seed)
    obj = table.to_json_obj()
    obj["systematic"] = table.systematic
    obj["entries"] = table.entry_count
    if args.stats:
        dist = codes.min_same_prefix_distance(table)
        obj["min_same_prefix_distance"] = None if dist == float("inf") else int(dist)
    _write_text(args.out, json.dumps(obj, sort_keys=True, indent=2) + "\n")
    return EXIT_OK


def cmd_prune(args: argparse.Namespace) -> int:
    table = codes.sample_systematic_code(args.n, args.k, args.d, args.seed)
    try:
        pruned = codes.prune(table, args.budget)
    except codes.PruningError as exc:
        print(f"pruning failed: {exc}", file=sys.stderr)
        return EXIT_CHECK_FAILED
    obj = pruned.to_json_obj()
    obj["kept_message_count"] = len(pruned.kept_messages)
    dist = codes.min_same_prefix_distance(pruned)
    obj["min_same_prefix_distance"] = None if dist == float("inf") else int(dist)
    _write_text(args.out, json.dumps(obj, sort_keys=True, indent=2) + "\n")
    return EXIT_OK


def _load_simulation_config(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ValueError(f"cannot read config {path}: {exc}") from exc
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise ValueError("config root must be a JSON object")
    version = obj.get("schema_version", 1)
    if version != 1:
        raise ValueError(f"unsupported schema_version {version!r}")
    experiments = obj.get("experiments")
    if not isinstance(experiments, list) or not experiments:
        raise ValueError("config needs a nonempty 'experiments' list")
    if any(not isinstance(e, dict) for e in experiments):
        raise ValueError("every experiment must be a JSON object")
    master_seed = obj.get("master_seed")
    if master_seed is not None and not isinstance(master_seed, int):
        raise ValueError("master_seed must be an integer")
    return experiments, master_seed


def cmd_simulate(args: argparse.Namespace) -> int:
    experiments, master_seed = _load_simulation_config(args.config)
    if args.seed is not None:
        master_seed = args.seed
    if master_seed is None:
        raise ValueError("no master_seed: set it in the config or pass --seed")
    jobs = _resolve_jobs(args.jobs)
    report = sim.run_matrix(experiments, master_seed=master_seed, jobs=jobs)
    n_errors = sum(1 for row in report.rows if row.get("error"))
    print(
        f"ran {len(report.rows)} experiments, {n_errors} errored, "
        f"master_seed={master_seed}, jobs={jobs}",
        file=sys.stderr,
    )
    if args.out:
        Path(f"{args.out}.csv").write_text(report.to_csv(), encoding="utf-8")
        Path(f"{args.out}.json").write_text(report.to_json(), encoding="utf-8")
    else:
        sys.stdout.write(report.to_csv())
    if args.plot:
        plotting.plot_report(report.rows, args.plot)
    return EXIT_OK


def _selftest_bounds_identities() -> list[str]:
    fails = []
    for i in range(0, 101):
        p = i / 100.0
        if bounds.rate_upper(p) != max(1.0 - 2.0 * p, 0.0):
            fails.append(f"rate_upper({p}) mismatch")
    if abs(bounds.rate_lower(0.0) - 1.0) > 0.0:
        fails.append("rate_lower(0) != 1")
    if bounds.rate_lower(0.75) != 0.0:
        fails.append("rate_lower(0.75) != 0")
    if not 0.3835 <= bounds.P1 <= 0.3839:
        fails.append(f"p1={bounds.P1} outside [0.3835, 0.3839]")
    for p in (bounds.P1, 0.40, 0.45, 0.49):
        x = bounds.root_r(p)
        if abs(bounds.g_p(p, x)) > 1e-9:
            fails.append(f"|G_{p}(root)| > 1e-9")
    gap = abs((1.0 - bounds.P1 / bounds.LOG2_4_3) - bounds.root_r(bounds.P1))
    if gap > 1e-6:
        fails.append(f"branch gap at p1 = {gap}")
    phi = bounds.phi_intersection()
    if not 0.343 <= phi <= 0.353:
        fails.append(f"phi={phi} outside [0.343, 0.353]")
    return fails


def _selftest_ball_oracle() -> list[str]:
    fails = []
    rng = random.Random(20240901)
    for n in (6, 8, 10):
        for k in range(1, n):
            for budget in range(0, n + 1):
                for q in range(0, min(k, budget) + 1):
                    u_bits = rng.getrandbits(k)
                    erased_positions = rng.sample(range(k), q)
                    mask = 0
                    for pos in erased_positions:
                        mask |= 1 << (k - 1 - pos)
                    prefix = ReceivedWord(k, u_bits & ~mask, mask)
                    suffix = Codeword(n - k, rng.getrandbits(n - k))
                    spec = forbidden.BallSpec(n, k, budget, q, prefix, suffix)
                    formula = forbidden.ball_size_exact(spec)
                    oracle = len(forbidden.ball_enumerate(spec))
                    if formula != oracle:
                        fails.append(
                            f"ball size mismatch at n={n} k={k} b={budget} q={q}: "
                            f"formula {formula} != oracle {oracle}"
                        )
                        return fails
    return fails


def _selftest_causality_fuzz() -> list[str]:
    fails = []
    table = codes.sample_systematic_code(12, 4, 2, seed=3)
    strategies = [
        channels.uniform_random_eraser(12, 4),
        channels.burst_eraser(12, start=2, length=3, budget=4),
        channels.wait_push_adversary(channels.WaitPushConfig(table), budget=4),
    ]
    rng = random.Random(77)
    for trial in range(1000):
        strat = strategies[trial % len(strategies)]
        x_bits = rng.getrandbits(12)
        i = rng.randrange(0, 13)
        tail = 12 - i
        alt_bits = (x_bits >> tail << tail) | (rng.getrandbits(tail) if tail else 0)
        seed = rng.getrandbits(32)
        run_a, run_b = strat.start(seed), strat.start(seed)
        for j in range(i):
            bit = (x_bits >> (11 - j)) & 1
            if run_a.step(j, bit) != run_b.step(j, bit):
                fails.append(f"causality violation: {strat.name} trial {trial} step {j}")
                return fails
        y = channels.transmit(strat, Codeword(12, x_bits), seed=seed)
        if y.erasure_count > strat.budget:
            fails.append(f"budget overrun: {strat.name} trial {trial}")
            return fails
        if (x_bits & y.known_mask) != y.bits:
            fails.append(f"symbol corruption: {strat.name} trial {trial}")
            return fails
    return fails


def _selftest_round_trip() -> list[str]:
    fails = []
    table = codes.sample_systematic_code(10, 3, 2, seed=5)
    for u, s, word in table.entries():
        y = ReceivedWord(table.n, word.bits, 0)
        result = codes.decode(table, y, tie_break="lexicographic")
        if result.outcome != "unique" or result.message != u or result.coin != s:
            fails.append(f"round trip failed for entry ({u}, {s})")
    return fails


SELFTEST_GROUPS = (
    ("bounds-identities", _selftest_bounds_identities),
    ("ball-oracle", _selftest_ball_oracle),
    ("causality-fuzz", _selftest_causality_fuzz),
    ("round-trip-decode", _selftest_round_trip),
)


def cmd_selftest(args: argparse.Namespace) -> int:
    failed = False
    for name, check in SELFTEST_GROUPS:
        fails = check()
        if fails:
            failed = True
            print(f"FAIL {name}: {fails[0]}")
        else:
            print(f"PASS {name}")
    return EXIT_CHECK_FAILED if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cel",
        description="Desk-scale laboratory for causal adversarial erasure channels.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_bounds = sub.add_parser("bounds", help="emit rate-bound curves as CSV")
    p_bounds.add_argument("--p-min", type=float, default=0.0)
    p_bounds.add_argument("--p-max", type=float, default=0.5)
    p_bounds.add_argument("--step", type=float, default=0.01)
    p_bounds.add_argument("--delta", type=float, default=0.01)
    p_bounds.add_argument("--eta", type=float, default=0.01)
    p_bounds.add_argument("--out", default=None, help="CSV path (default stdout)")
    p_bounds.add_argument("--plot", default=None, help="also render curves to this image file")
    p_bounds.set_defaults(func=cmd_bounds)

    p_ball = sub.add_parser("ball", help="forbidden-ball size (exact integer)")
    p_ball.add_argument("--n", type=int, required=True)
    p_ball.add_argument("--k", type=int, required=True)
    p_ball.add_argument("--budget", type=int, required=True)
    p_ball.add_argument("--q", type=int, required=True)
    p_ball.add_argument("--enumerate", action="store_true", help="cross-check by enumeration")
    p_ball.add_argument("--p", type=float, default=None, help="compare against the size threshold at this p")
    p_ball.add_argument("--delta", type=float, default=0.01)
    p_ball.add_argument("--eta", type=float, default=0.01)
    p_ball.add_argument("--out", default=None)
    p_ball.set_defaults(func=cmd_ball)

    p_code = sub.add_parser("code", help="sample a systematic code table")
    p_code.add_argument("--n", type=int, required=True)
    p_code.add_argument("--k", type=int, required=True)
    p_code.add_argument("--d", type=int, default=0)
    p_code.add_argument("--seed", type=int, required=True)
    p_code.add_argument("--stats", action="store_true")
    p_code.add_argument("--out", default=None)
    p_code.set_defaults(func=cmd_code)

    p_prune = sub.add_parser("prune", help="prune a sampled code against a budget")
    p_prune.add_argument("--n", type=int, required=True)
    p_prune.add_argument("--k", type=int, required=True)
    p_prune.add_argument("--d", type=int, required=True)
    p_prune.add_argument("--seed", type=int, required=True)
    p_prune.add_argument("--budget", type=int, required=True)
    p_prune.add_argument("--out", default=None)
    p_prune.set_defaults(func=cmd_prune)

    p_sim = sub.add_parser("simulate", help="run a JSON experiment file")
    p_sim.add_argument("--config", required=True)
    p_sim.add_argument("--seed", type=int, default=None, help="override the file's master_seed")
    p_sim.add_argument("--out", default=None, help="prefix: writes <out>.csv and <out>.json")
    p_sim.add_argument("--jobs", type=int, default=None, help="workers (env CEL_JOBS, default 1)")
    p_sim.add_argument("--plot", default=None, help="render estimates to this image file")
    p_sim.set_defaults(func=cmd_simulate)

    p_self = sub.add_parser("selftest", help="fast built-in acceptance subset")
    p_self.set_defaults(func=cmd_selftest)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO


def entry() -> None:
    sys.exit(main(sys.argv[1:]))
