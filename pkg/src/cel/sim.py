"""Monte Carlo estimation of decoding error rates with deterministic seeding.

Every trial's randomness derives from a documented 64-bit mixing chain
(splitmix64): trial i of a given experiment uses

    trial_seed = mix64(master_seed, int(config_hash, 16), i)

with substreams mix64(trial_seed, 0 | 1 | 2) for the (message, coin) draw,
the channel run, and the decoder tie-break.  Reports are therefore pure
functions of (config list, master_seed), bit-identical across runs and
worker counts.

Two error criteria are exposed: the uniform-message average (errors counted
on the decoded message only, by default) and the per-message maximum
(strict by default: an error is any mismatch of the decoded (message,
coin) pair).
"""

from __future__ import annotations

import hashlib
import json
import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

from .channels import Strategy, strategy_from_spec, transmit
from .codes import CodeTable, PrunedCode, decode, prune, sample_systematic_code
from .core import Codeword

_M64 = (1 << 64) - 1

WILSON_Z_95 = 1.959963984540054

CRITERIA = ("avg", "max")


def _splitmix64(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & _M64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M64
    return z ^ (z >> 31)


def mix64(*parts: int) -> int:
    """Fold integers into one 64-bit seed via a splitmix64 chain."""
    acc = 0
    for part in parts:
        acc = _splitmix64(acc ^ (int(part) & _M64))
    return acc


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def config_hash(obj: dict) -> str:
    """First 16 hex digits of the sha256 of the canonical config JSON."""
    return hashlib.sha256(canonical_json(obj).encode()).hexdigest()[:16]


def wilson_interval(errors: int, trials: int, z: float = WILSON_Z_95) -> tuple[float, float]:
    """Wilson score interval; well behaved at estimates of exactly 0 or 1."""
    if trials < 1:
        raise ValueError(f"trials must be positive, got {trials}")
    if not 0 <= errors <= trials:
        raise ValueError(f"errors {errors} out of range [0, {trials}]")
    phat = errors / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (phat + z2 / (2.0 * trials)) / denom
    half = z * math.sqrt(phat * (1.0 - phat) / trials + z2 / (4.0 * trials * trials)) / denom
    # clamp away float dust so the interval always contains phat
    return (min(max(center - half, 0.0), phat), max(min(center + half, 1.0), phat))


@dataclass(frozen=True)
class CodeSpec:
    """How to build the code under test: sampled from seed, or explicit."""

    n: int
    k: int
    d: int = 0
    seed: int | None = None
    pruned: bool = False
    codewords: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        if self.codewords is None and self.seed is None:
            raise ValueError("code spec needs either a seed or explicit codewords")
        if self.codewords is not None:
            for w in self.codewords:
                if len(w) != self.n:
                    raise ValueError(f"codeword {w!r} does not have length n={self.n}")

    @classmethod
    def from_dict(cls, obj: dict) -> "CodeSpec":
        known = {"n", "k", "d", "seed", "pruned", "codewords"}
        unknown = set(obj) - known
        if unknown:
            raise ValueError(f"unknown code spec keys: {sorted(unknown)}")
        try:
            n, k = obj["n"], obj["k"]
        except KeyError as exc:
            raise ValueError(f"code spec needs {exc.args[0]!r}") from exc
        codewords = obj.get("codewords")
        return cls(
            n=n,
            k=k,
            d=obj.get("d", 0),
            seed=obj.get("seed"),
            pruned=bool(obj.get("pruned", False)),
            codewords=tuple(codewords) if codewords is not None else None,
        )

    def to_dict(self) -> dict:
        out: dict = {"n": self.n, "k": self.k, "d": self.d, "pruned": self.pruned}
        if self.codewords is not None:
            out["codewords"] = list(self.codewords)
        if self.seed is not None:
            out["seed"] = self.seed
        return out

    def build(self, budget: int) -> CodeTable | PrunedCode:
        if self.codewords is not None:
            table = CodeTable.from_codewords(self.codewords, k=self.k, d=self.d)
        else:
            table = sample_systematic_code(self.n, self.k, self.d, self.seed)
        return prune(table, budget) if self.pruned else table


@dataclass(frozen=True)
class ExperimentConfig:
    """One (code, strategy) estimation task."""

    code: CodeSpec
    strategy: dict
    budget: int
    trials: int
    criterion: str = "avg"
    tie_break: str = "uniform"
    strict: bool | None = None
    messages: int | tuple[int, ...] | None = None
    master_seed: int | None = None

    def __post_init__(self) -> None:
        if self.criterion not in CRITERIA:
            raise ValueError(f"criterion must be one of {CRITERIA}, got {self.criterion!r}")
        if self.trials < 1:
            raise ValueError(f"trials must be positive, got {self.trials}")
        if not 0 <= self.budget <= self.code.n:
            raise ValueError(f"budget {self.budget} out of range [0, {self.code.n}]")
        if self.messages is not None and self.criterion != "max":
            raise ValueError("a message subset only applies to the max criterion")

    @property
    def effective_strict(self) -> bool:
        """avg counts message errors only; max counts (message, coin) errors."""
        if self.strict is None:
            return self.criterion == "max"
        return self.strict

    @classmethod
    def from_dict(cls, obj: dict, default_master_seed: int | None = None) -> "ExperimentConfig":
        known = {
            "code",
            "strategy",
            "budget",
            "trials",
            "criterion",
            "tie_break",
            "strict",
            "messages",
            "master_seed",
        }
        unknown = set(obj) - known
        if unknown:
            raise ValueError(f"unknown experiment keys: {sorted(unknown)}")
        for key in ("code", "strategy", "budget", "trials"):
            if key not in obj:
                raise ValueError(f"experiment needs {key!r}")
        if not isinstance(obj["strategy"], dict):
            raise ValueError("strategy must be a JSON object")
        messages = obj.get("messages")
        if isinstance(messages, list):
            messages = tuple(messages)
        master_seed = obj.get("master_seed", default_master_seed)
        return cls(
            code=CodeSpec.from_dict(obj["code"]),
            strategy=dict(obj["strategy"]),
            budget=obj["budget"],
            trials=obj["trials"],
            criterion=obj.get("criterion", "avg"),
            tie_break=obj.get("tie_break", "uniform"),
            strict=obj.get("strict"),
            messages=messages,
            master_seed=master_seed,
        )

    def to_dict(self) -> dict:
        """Normalized dict; defines the config hash and round-trips."""
        out: dict = {
            "code": self.code.to_dict(),
            "strategy": dict(self.strategy),
            "budget": self.budget,
            "trials": self.trials,
            "criterion": self.criterion,
            "tie_break": self.tie_break,
            "strict": self.effective_strict,
        }
        if self.messages is not None:
            out["messages"] = (
                list(self.messages) if isinstance(self.messages, tuple) else self.messages
            )
        if self.master_seed is not None:
            out["master_seed"] = self.master_seed
        return out

    @property
    def hash(self) -> str:
        return config_hash(self.to_dict())


@dataclass(frozen=True)
class ErrorEstimate:
    """Point estimate with a 95% Wilson interval and error-type accounting."""

    criterion: str
    point_estimate: float
    trials: int
    errors: int
    type1_count: int
    type2_count: int
    wilson: tuple[float, float]
    per_message: dict[int, dict] | None = None


def _available_messages(code: CodeTable | PrunedCode) -> list[int]:
    if isinstance(code, PrunedCode):
        return list(code.kept_messages)
    return list(range(code.message_count))


def _coin_space(code: CodeTable | PrunedCode) -> int:
    return code.coin_count


def _encode_and_coin(code, u: int, t: int) -> tuple[Codeword, int]:
    """Codeword plus the actual (base) coin index behind draw t."""
    if isinstance(code, PrunedCode):
        return code.encode(u, t), code.coin_of(u, t)
    return code.encode(u, t), t


def _run_trial(
    code,
    strategy: Strategy,
    tie_break: str,
    trial_seed: int,
    u: int | None,
    messages: Sequence[int],
) -> tuple[int, bool, bool]:
    draw = random.Random(mix64(trial_seed, 0))
    if u is None:
        u = messages[draw.randrange(len(messages))]
    t = draw.randrange(_coin_space(code))
    x, actual_coin = _encode_and_coin(code, u, t)
    y = transmit(strategy, x, seed=mix64(trial_seed, 1))
    result = decode(code, y, tie_break, seed=mix64(trial_seed, 2))
    type1 = result.message != u
    type2 = (not type1) and (result.coin != actual_coin)
    return u, type1, type2


def _build(config: ExperimentConfig) -> tuple[CodeTable | PrunedCode, Strategy]:
    code = config.code.build(config.budget)
    strategy = strategy_from_spec(config.strategy, code, code.n, config.budget)
    return code, strategy


def _require_master_seed(config: ExperimentConfig) -> int:
    if config.master_seed is None:
        raise ValueError("experiment has no master_seed (set it or pass one to run_matrix)")
    return config.master_seed


def estimate_p_avg(config: ExperimentConfig) -> ErrorEstimate:
    """Average error rate over uniform (message, coin) draws.

    By default an error is a wrong decoded message; set strict=True to also
    count coin mismatches.
    """
    if config.criterion != "avg":
        raise ValueError(f"config criterion is {config.criterion!r}, expected 'avg'")
    master = _require_master_seed(config)
    code, strategy = _build(config)
    messages = _available_messages(code)
    hash_int = int(config.hash, 16)
    strict = config.effective_strict
    errors = type1_total = type2_total = 0
    for i in range(config.trials):
        trial_seed = mix64(master, hash_int, i)
        _, type1, type2 = _run_trial(code, strategy, config.tie_break, trial_seed, None, messages)
        type1_total += type1
        type2_total += type2
        errors += (type1 or type2) if strict else type1
    return ErrorEstimate(
        criterion="avg",
        point_estimate=errors / config.trials,
        trials=config.trials,
        errors=errors,
        type1_count=type1_total,
        type2_count=type2_total,
        wilson=wilson_interval(errors, config.trials),
    )


def _resolve_message_subset(config: ExperimentConfig, available: list[int]) -> list[int]:
    if config.messages is None:
        return available
    if isinstance(config.messages, int):
        if not 1 <= config.messages <= len(available):
            raise ValueError(
                f"message subset size {config.messages} out of range [1, {len(available)}]"
            )
        return available[: config.messages]
    subset = list(config.messages)
    if len(set(subset)) != len(subset):
        raise ValueError("message subset has duplicates")
    pool = set(available)
    for u in subset:
        if u not in pool:
            raise ValueError(f"message {u} is not available in this code")
    return subset


def estimate_p_max(config: ExperimentConfig) -> ErrorEstimate:
    """Worst per-message error rate over a message subset.

    Trials are split round-robin across the subset (all available messages
    by default); strict (message, coin) errors are counted unless strict is
    explicitly False.
    """
    if config.criterion != "max":
        raise ValueError(f"config criterion is {config.criterion!r}, expected 'max'")
    master = _require_master_seed(config)
    code, strategy = _build(config)
    subset = _resolve_message_subset(config, _available_messages(code))
    if config.trials < len(subset):
        raise ValueError(
            f"trials {config.trials} < messages {len(subset)}: need at least one trial per message"
        )
    hash_int = int(config.hash, 16)
    strict = config.effective_strict
    per: dict[int, dict] = {u: {"trials": 0, "errors": 0} for u in subset}
    type1_total = type2_total = errors_total = 0
    for i in range(config.trials):
        u = subset[i % len(subset)]
        trial_seed = mix64(master, hash_int, i)
        _, type1, type2 = _run_trial(code, strategy, config.tie_break, trial_seed, u, subset)
        err = (type1 or type2) if strict else type1
        per[u]["trials"] += 1
        per[u]["errors"] += err
        type1_total += type1
        type2_total += type2
        errors_total += err
    for stats in per.values():
        stats["estimate"] = stats["errors"] / stats["trials"]
    worst = max(subset, key=lambda u: (per[u]["estimate"], -u))
    worst_stats = per[worst]
    return ErrorEstimate(
        criterion="max",
        point_estimate=worst_stats["estimate"],
        trials=config.trials,
        errors=errors_total,
        type1_count=type1_total,
        type2_count=type2_total,
        wilson=wilson_interval(worst_stats["errors"], worst_stats["trials"]),
        per_message=per,
    )


def run_experiment(config: ExperimentConfig) -> ErrorEstimate:
    return estimate_p_avg(config) if config.criterion == "avg" else estimate_p_max(config)


def experiment_row(config: ExperimentConfig) -> dict:
    """Run one experiment and assemble the full report row."""
    row: dict = {
        "config_hash": config.hash,
        "config": config.to_dict(),
        "criterion": config.criterion,
        "error": None,
    }
    code, strategy = _build(config)
    row["causal"] = strategy.causal
    row["strategy_name"] = strategy.name
    est = run_experiment(config)
    row.update(
        {
            "estimate": est.point_estimate,
            "lo": est.wilson[0],
            "hi": est.wilson[1],
            "trials": est.trials,
            "errors": est.errors,
            "type1": est.type1_count,
            "type2": est.type2_count,
            "per_message": (
                {str(u): stats for u, stats in est.per_message.items()}
                if est.per_message is not None
                else None
            ),
        }
    )
    return row


def _matrix_entry(payload: tuple[int, dict]) -> tuple[int, dict]:
    index, conf_dict = payload
    try:
        config = ExperimentConfig.from_dict(conf_dict)
        row = experiment_row(config)
    except Exception as exc:
        row = {
            "config_hash": config_hash(conf_dict),
            "config": conf_dict,
            "criterion": conf_dict.get("criterion", "avg"),
            "error": f"{type(exc).__name__}: {exc}",
        }
    return index, row


@dataclass
class MatrixReport:
    """Deterministic report over a list of experiments."""

    master_seed: int | None
    rows: list[dict] = field(default_factory=list)

    def to_csv(self) -> str:
        lines = ["config_hash,criterion,estimate,lo,hi,trials"]
        for row in self.rows:
            if row.get("error"):
                lines.append(f"{row['config_hash']},{row['criterion']},,,,0")
            else:
                lines.append(
                    f"{row['config_hash']},{row['criterion']},"
                    f"{row['estimate']:.9f},{row['lo']:.9f},{row['hi']:.9f},{row['trials']}"
                )
        return "\n".join(lines) + "\n"

    def to_json_obj(self) -> dict:
        return {
            "schema_version": 1,
            "master_seed": self.master_seed,
            "results": self.rows,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), sort_keys=True, indent=2) + "\n"


def run_matrix(
    configs: Sequence[ExperimentConfig | dict],
    master_seed: int | None = None,
    jobs: int = 1,
) -> MatrixReport:
    """Run every experiment (configs or raw dicts); rows keep input order.

    Entries without their own master_seed inherit `master_seed`.  Invalid
    entries become error rows; the rest still run.  Identical inputs give
    byte-identical reports for any `jobs`.
    """
    if not configs:
        raise ValueError("experiment list is empty")
    if jobs < 1:
        raise ValueError(f"jobs must be positive, got {jobs}")
    payloads = []
    for i, config in enumerate(configs):
        conf_dict = config.to_dict() if isinstance(config, ExperimentConfig) else dict(config)
        if "master_seed" not in conf_dict and master_seed is not None:
            conf_dict["master_seed"] = master_seed
        payloads.append((i, conf_dict))
    if jobs == 1 or len(payloads) == 1:
        results = [_matrix_entry(p) for p in payloads]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_matrix_entry, payloads))
    rows = [row for _, row in sorted(results, key=lambda item: item[0])]
    return MatrixReport(master_seed=master_seed, rows=rows)
