"""Adversary strategies for the p-bounded erasure channel.

A strategy is an immutable factory; each transmission gets a fresh
ChannelRun whose `step(i, x_i)` must be called with consecutive positions
starting at 0 and returns PASS or ERASE.  The run enforces the budget (it
never erases past it) and, for causal strategies, its decision at step i is
a deterministic function of the seed, the strategy's view of the code, and
x_0..x_i only.

The two-step and omniscient strategies are deliberately stronger than the
causal contract (they inspect the whole codeword before deciding) and are
marked `causal = False`; `transmit` feeds them the input up front via
`prepare`.

Seeding: every factory takes an optional default seed; `transmit(strategy,
x, seed)` overrides it per transmission, which is how the simulator derives
independent trials.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Callable

import numpy as np

from . import bounds as _bounds
from .core import Codeword, ReceivedWord

if TYPE_CHECKING:  # pragma: no cover - typing only
    from .codes import CodeTable, PrunedCode

    CodeView = CodeTable | PrunedCode


class ChannelDecision(str, Enum):
    """Per-step channel action."""

    PASS = "pass"
    ERASE = "erase"


class ChannelRun:
    """Mutable per-transmission state; single-threaded use only."""

    def __init__(self, strategy: "Strategy", seed: int | None):
        self.strategy = strategy
        self.n = strategy.n
        self.budget = strategy.budget
        self.used = 0
        self.pos = 0
        self.rng = random.Random(seed)
        self.diagnostics: dict = {}
        self._prepared = False

    @property
    def remaining(self) -> int:
        return self.budget - self.used

    def prepare(self, x: Codeword) -> None:
        """Give non-causal strategies the whole input before stepping."""
        if x.n != self.n:
            raise ValueError(f"input length {x.n} != n={self.n}")
        self._plan(x)
        self._prepared = True

    def step(self, i: int, x_i: int) -> ChannelDecision:
        """Decide PASS or ERASE for position i; positions must be consecutive."""
        if i != self.pos:
            raise ValueError(f"out-of-order step: expected {self.pos}, got {i}")
        if i >= self.n:
            raise ValueError(f"step {i} beyond transmission length {self.n}")
        if x_i not in (0, 1):
            raise ValueError(f"input symbol must be 0 or 1, got {x_i!r}")
        if self.strategy.needs_full_input and not self._prepared:
            raise RuntimeError(f"{self.strategy.name} needs prepare(x) before stepping")
        decision = self._decide(i, x_i)
        if decision is ChannelDecision.ERASE and self.remaining <= 0:
            decision = ChannelDecision.PASS
        if decision is ChannelDecision.ERASE:
            self.used += 1
        self.pos += 1
        return decision

    def _plan(self, x: Codeword) -> None:  # pragma: no cover - overridden
        pass

    def _decide(self, i: int, x_i: int) -> ChannelDecision:
        raise NotImplementedError


class Strategy:
    """Factory of channel runs; immutable once constructed."""

    name = "abstract"
    causal = True
    needs_full_input = False
    run_class = ChannelRun

    def __init__(self, n: int, budget: int, seed: int | None = None):
        if n < 1:
            raise ValueError(f"transmission length must be positive, got {n}")
        if not 0 <= budget <= n:
            raise ValueError(f"budget {budget} out of range [0, {n}]")
        self.n = n
        self.budget = budget
        self.seed = seed

    def start(self, seed: int | None = None) -> ChannelRun:
        """Fresh per-transmission run; `seed` overrides the factory default."""
        return self.run_class(self, seed if seed is not None else self.seed)


def transmit(strategy: Strategy, x: Codeword, seed: int | None = None) -> ReceivedWord:
    """Run one full transmission of x through the strategy."""
    y, _ = transmit_with_run(strategy, x, seed)
    return y


def transmit_with_run(
    strategy: Strategy, x: Codeword, seed: int | None = None
) -> tuple[ReceivedWord, ChannelRun]:
    """Like transmit, but also returns the finished run (for diagnostics)."""
    if x.n != strategy.n:
        raise ValueError(f"input length {x.n} != strategy n={strategy.n}")
    run = strategy.start(seed)
    if strategy.needs_full_input:
        run.prepare(x)
    erased = 0
    for i in range(x.n):
        if run.step(i, x.bit(i)) is ChannelDecision.ERASE:
            erased |= 1 << (x.n - 1 - i)
    return ReceivedWord(x.n, x.bits & ~erased, erased), run


def step_decisions(strategy: Strategy, x: Codeword, seed: int | None = None) -> list[ChannelDecision]:
    """Step-by-step decision trace without any full-input preview.

    Only meaningful for causal strategies; used by the causality fuzz.
    """
    if strategy.needs_full_input:
        raise ValueError(f"{strategy.name} is not causal; no step-only trace exists")
    run = strategy.start(seed)
    return [run.step(i, x.bit(i)) for i in range(x.n)]


class _PatternRun(ChannelRun):
    """Run that replays a precomputed position set."""

    def __init__(self, strategy, seed):
        super().__init__(strategy, seed)
        self._positions: set[int] | None = None

    def _pattern(self) -> set[int]:
        raise NotImplementedError

    def _decide(self, i, x_i):
        if self._positions is None:
            self._positions = self._pattern()
        return ChannelDecision.ERASE if i in self._positions else ChannelDecision.PASS


class _UniformRun(_PatternRun):
    def _pattern(self):
        return set(self.rng.sample(range(self.n), self.budget))


class UniformRandomEraser(Strategy):
    """Erases a uniformly random size-budget subset, emitted causally."""

    name = "uniform_random"
    run_class = _UniformRun


def uniform_random_eraser(n: int, budget: int, seed: int | None = None) -> UniformRandomEraser:
    return UniformRandomEraser(n, budget, seed)


class _BurstRun(ChannelRun):
    def _decide(self, i, x_i):
        s = self.strategy
        if s.start_pos <= i < s.start_pos + s.length:
            return ChannelDecision.ERASE
        return ChannelDecision.PASS


class BurstEraser(Strategy):
    """Erases one contiguous window [start, start + length)."""

    name = "burst"
    run_class = _BurstRun

    def __init__(self, n: int, start: int, length: int, budget: int, seed: int | None = None):
        super().__init__(n, budget, seed)
        if length > budget:
            raise ValueError(f"burst length {length} exceeds budget {budget}")
        if length < 0 or start < 0 or start + length > n:
            raise ValueError(f"burst window [{start}, {start + length}) out of range for n={n}")
        self.start_pos = start
        self.length = length


def burst_eraser(
    n: int, start: int, length: int, budget: int, seed: int | None = None
) -> BurstEraser:
    return BurstEraser(n, start, length, budget, seed)


@dataclass(frozen=True)
class WaitPushConfig:
    """Wait-push parameters: code view plus wait length (or epsilon default).

    When wait_length is None it defaults to round(((1-2p)^+ + epsilon/2) n)
    with p = budget / n, clamped into [0, n].
    """

    code_view: "CodeView"
    epsilon: float = 0.1
    wait_length: int | None = None

    def resolve_wait_length(self, budget: int) -> int:
        n = self.code_view.n
        if self.wait_length is not None:
            if not 0 <= self.wait_length <= n:
                raise ValueError(f"wait_length {self.wait_length} out of range [0, {n}]")
            return self.wait_length
        if self.epsilon <= 0.0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        p = budget / n
        ell = round((_bounds.rate_upper(min(p, 1.0)) + self.epsilon / 2.0) * n)
        return min(max(ell, 0), n)


class _WaitPushRun(ChannelRun):
    def __init__(self, strategy, seed):
        super().__init__(strategy, seed)
        self._observed = 0
        self._decoy_bits: int | None = None
        self._sampled = False

    def _sample_decoy(self) -> None:
        s = self.strategy
        code = s.config.code_view
        ell = s.wait_length
        matches = code.prefix_match_indices(ell, self._observed)
        self.diagnostics["wait_length"] = ell
        self.diagnostics["list_size"] = int(matches.size)
        if matches.size == 0:
            # Observed prefix is not in the code: nothing to push toward.
            self.diagnostics["empty_list_fallback"] = True
            self._decoy_bits = None
        else:
            self.diagnostics["empty_list_fallback"] = False
            pick = int(matches[self.rng.randrange(matches.size)])
            self._decoy_bits = code.word_bits_by_index(pick)
            self.diagnostics["decoy_index"] = pick
            self.diagnostics["decoy_entry"] = code.pair_of(pick)
            d = code.d
            messages = (matches >> d) if d else matches
            counts = np.bincount(messages).astype(np.float64)
            counts = counts[counts > 0]
            self.diagnostics["distinct_messages"] = int(counts.size)
            # entropy (bits) of the message given the observed prefix
            self.diagnostics["prefix_entropy"] = float(
                np.log2(matches.size) - (counts * np.log2(counts)).sum() / matches.size
            )
        self._sampled = True

    def _decide(self, i, x_i):
        ell = self.strategy.wait_length
        if i < ell:
            self._observed = (self._observed << 1) | x_i
            return ChannelDecision.PASS
        if not self._sampled:
            self._sample_decoy()
        if self._decoy_bits is None:
            return ChannelDecision.PASS
        decoy_bit = (self._decoy_bits >> (self.n - 1 - i)) & 1
        if x_i != decoy_bit:
            return ChannelDecision.ERASE
        return ChannelDecision.PASS


class WaitPushAdversary(Strategy):
    """Wait phase observes an ell-prefix, push phase erases toward a decoy.

    The decoy is sampled uniformly over table entries sharing the observed
    prefix (the encoder's conditional distribution under uniform messages
    and coins).  Past the wait phase, disagreements are erased left to right
    until the budget runs out.
    """

    name = "wait_push"
    causal = True
    run_class = _WaitPushRun

    def __init__(self, config: WaitPushConfig, budget: int, seed: int | None = None):
        super().__init__(config.code_view.n, budget, seed)
        self.config = config
        self.wait_length = config.resolve_wait_length(budget)


def wait_push_adversary(
    config: WaitPushConfig, budget: int, seed: int | None = None
) -> WaitPushAdversary:
    return WaitPushAdversary(config, budget, seed)


class FirstStepPlan:
    """First-step erasures: a function of the message (known to the channel)."""

    q_count: int | None = None  # fixed erasure count when known at construction

    def positions(self, message_bits: int, k: int, rng: random.Random) -> set[int]:
        raise NotImplementedError


class FirstStepNone(FirstStepPlan):
    q_count = 0

    def positions(self, message_bits, k, rng):
        return set()


class FirstStepFirstQ(FirstStepPlan):
    """Erase the leading q prefix positions."""

    def __init__(self, q: int):
        if q < 0:
            raise ValueError(f"q must be nonnegative, got {q}")
        self.q_count = q

    def positions(self, message_bits, k, rng):
        if self.q_count > k:
            raise ValueError(f"q={self.q_count} exceeds prefix length {k}")
        return set(range(self.q_count))


class FirstStepRandomQ(FirstStepPlan):
    """Erase q prefix positions chosen uniformly at random."""

    def __init__(self, q: int):
        if q < 0:
            raise ValueError(f"q must be nonnegative, got {q}")
        self.q_count = q

    def positions(self, message_bits, k, rng):
        if self.q_count > k:
            raise ValueError(f"q={self.q_count} exceeds prefix length {k}")
        return set(rng.sample(range(k), self.q_count))


class SecondStepPlan:
    """Second-step erasures: sees the whole codeword plus remaining budget."""

    def positions(
        self, x: Codeword, k: int, remaining: int, code_view, rng: random.Random
    ) -> set[int]:
        raise NotImplementedError


class SecondStepNone(SecondStepPlan):
    def positions(self, x, k, remaining, code_view, rng):
        return set()


class SecondStepPushNearest(SecondStepPlan):
    """Push toward the nearest other codeword sharing the k-prefix.

    Erases the leftmost disagreement positions, never more than the
    remaining budget; no-op when the message has no other codeword.
    """

    def positions(self, x, k, remaining, code_view, rng):
        matches = code_view.prefix_match_indices(k, x.prefix_bits(k))
        best_bits = None
        best_dist = None
        for idx in matches:
            bits = code_view.word_bits_by_index(int(idx))
            if bits == x.bits:
                continue
            dist = (bits ^ x.bits).bit_count()
            if best_dist is None or dist < best_dist or (dist == best_dist and bits < best_bits):
                best_bits, best_dist = bits, dist
        if best_bits is None:
            return set()
        diff = best_bits ^ x.bits
        out: set[int] = set()
        for i in range(k, x.n):
            if len(out) >= remaining:
                break
            if diff & (1 << (x.n - 1 - i)):
                out.add(i)
        return out


class SecondStepRandom(SecondStepPlan):
    """Erase `count` uniformly random suffix positions (capped by budget)."""

    def __init__(self, count: int):
        if count < 0:
            raise ValueError(f"count must be nonnegative, got {count}")
        self.count = count

    def positions(self, x, k, remaining, code_view, rng):
        take = min(self.count, remaining, x.n - k)
        return set(rng.sample(range(k, x.n), take)) if take else set()


class _TwoStepRun(_PatternRun):
    def _plan(self, x: Codeword) -> None:
        s = self.strategy
        message_bits = x.prefix_bits(s.k)
        first = set(s.first_step_plan.positions(message_bits, s.k, self.rng))
        if any(not 0 <= i < s.k for i in first):
            raise ValueError("first-step plan erased outside the prefix")
        if len(first) > min(s.k, s.budget):
            raise ValueError(
                f"first-step plan erases {len(first)} > min(k, budget) = {min(s.k, s.budget)}"
            )
        remaining = s.budget - len(first)
        second = set(
            s.second_step_plan.positions(x, s.k, remaining, s.code_view, self.rng)
        )
        if any(not s.k <= i < s.n for i in second):
            raise ValueError("second-step plan erased outside the suffix")
        if len(second) > remaining:
            raise ValueError(f"second-step plan erases {len(second)} > remaining {remaining}")
        self._positions = first | second
        self.diagnostics["first_step_erasures"] = len(first)
        self.diagnostics["second_step_erasures"] = len(second)

    def _pattern(self):
        raise RuntimeError("two-step run used without prepare()")


class TwoStepAdversary(Strategy):
    """Two-step model: erase prefix bits knowing the message, then suffix
    bits after seeing the whole codeword, under one shared budget.

    Strictly stronger than the causal contract, hence causal = False.
    """

    name = "two_step"
    causal = False
    needs_full_input = True
    run_class = _TwoStepRun

    def __init__(
        self,
        k: int,
        budget: int,
        first_step_plan: FirstStepPlan,
        second_step_plan: SecondStepPlan,
        code_view,
        seed: int | None = None,
    ):
        super().__init__(code_view.n, budget, seed)
        if not 1 <= k < code_view.n:
            raise ValueError(f"require 1 <= k < n, got k={k}, n={code_view.n}")
        fixed_q = getattr(first_step_plan, "q_count", None)
        if fixed_q is not None and fixed_q > min(k, budget):
            raise ValueError(f"first-step q={fixed_q} exceeds min(k, budget)={min(k, budget)}")
        self.k = k
        self.first_step_plan = first_step_plan
        self.second_step_plan = second_step_plan
        self.code_view = code_view


def two_step_adversary(
    k: int,
    budget: int,
    first_step_plan: FirstStepPlan,
    second_step_plan: SecondStepPlan,
    code_view,
    seed: int | None = None,
) -> TwoStepAdversary:
    return TwoStepAdversary(k, budget, first_step_plan, second_step_plan, code_view, seed)


class _OmniscientRun(_PatternRun):
    def _plan(self, x: Codeword) -> None:
        s = self.strategy
        code = s.code_view
        n = self.n
        best_pattern: tuple[int, ...] = ()
        best_score = self._distinct_messages(code, x, ())
        for size in range(1, self.budget + 1):
            for pattern in itertools.combinations(range(n), size):
                score = self._distinct_messages(code, x, pattern)
                if score > best_score:
                    best_score, best_pattern = score, pattern
        self._positions = set(best_pattern)
        self.diagnostics["max_distinct_messages"] = best_score

    @staticmethod
    def _distinct_messages(code, x: Codeword, pattern: tuple[int, ...]) -> int:
        mask = 0
        for i in pattern:
            mask |= 1 << (x.n - 1 - i)
        y = ReceivedWord(x.n, x.bits & ~mask, mask)
        idx = code.consistent_indices(y)
        if idx.size == 0:
            return 0
        d = code.d
        return int(np.unique((idx >> d) if d else idx).size)

    def _pattern(self):
        raise RuntimeError("omniscient run used without prepare()")


class OmniscientEraser(Strategy):
    """Non-causal baseline: exhaustively picks the erasure pattern that
    maximizes the number of distinct messages the decoder must consider.

    First maximizer in (size, lexicographic) enumeration order wins, so the
    strategy is deterministic; when no pattern creates ambiguity it erases
    nothing.
    """

    name = "omniscient"
    causal = False
    needs_full_input = True
    run_class = _OmniscientRun

    def __init__(self, code_view, budget: int):
        if code_view.n > 20:
            raise ValueError(f"omniscient search requires n <= 20, got {code_view.n}")
        if code_view.entry_count > 1 << 16:
            raise ValueError("omniscient search requires at most 2^16 code entries")
        super().__init__(code_view.n, budget, None)
        self.code_view = code_view


def omniscient_eraser(code_view, budget: int) -> OmniscientEraser:
    return OmniscientEraser(code_view, budget)


_FIRST_STEP_KINDS: dict[str, Callable[..., FirstStepPlan]] = {
    "none": lambda: FirstStepNone(),
    "first_q": lambda q: FirstStepFirstQ(q),
    "random_q": lambda q: FirstStepRandomQ(q),
}

_SECOND_STEP_KINDS: dict[str, Callable[..., SecondStepPlan]] = {
    "none": lambda: SecondStepNone(),
    "push_nearest_same_prefix": lambda: SecondStepPushNearest(),
    "random": lambda count: SecondStepRandom(count),
}


def _plan_from_spec(spec: dict | None, kinds: dict, default_kind: str):
    spec = dict(spec or {"kind": default_kind})
    kind = spec.pop("kind", default_kind)
    if kind not in kinds:
        raise ValueError(f"unknown plan kind {kind!r}; choose from {sorted(kinds)}")
    try:
        return kinds[kind](**spec)
    except TypeError as exc:
        raise ValueError(f"bad parameters for plan {kind!r}: {exc}") from exc


def strategy_from_spec(spec: dict, code_view, n: int, budget: int) -> Strategy:
    """Build a strategy from its JSON parameter object.

    Recognized names: uniform_random, burst, wait_push, two_step,
    omniscient.  An optional "seed" key becomes the factory default seed
    (per-transmission seeds still override it).
    """
    spec = dict(spec)
    name = spec.pop("strategy", None)
    seed = spec.pop("seed", None)
    if name == "uniform_random":
        if spec:
            raise ValueError(f"unexpected uniform_random parameters: {sorted(spec)}")
        return uniform_random_eraser(n, budget, seed)
    if name == "burst":
        try:
            start, length = spec.pop("start"), spec.pop("length")
        except KeyError as exc:
            raise ValueError(f"burst strategy needs {exc.args[0]!r}") from exc
        if spec:
            raise ValueError(f"unexpected burst parameters: {sorted(spec)}")
        return burst_eraser(n, start, length, budget, seed)
    if name == "wait_push":
        if code_view is None:
            raise ValueError("wait_push needs a code view")
        config = WaitPushConfig(
            code_view,
            epsilon=spec.pop("epsilon", 0.1),
            wait_length=spec.pop("wait_length", None),
        )
        if spec:
            raise ValueError(f"unexpected wait_push parameters: {sorted(spec)}")
        return wait_push_adversary(config, budget, seed)
    if name == "two_step":
        if code_view is None:
            raise ValueError("two_step needs a code view")
        first = _plan_from_spec(spec.pop("first", None), _FIRST_STEP_KINDS, "none")
        second = _plan_from_spec(spec.pop("second", None), _SECOND_STEP_KINDS, "none")
        k = spec.pop("k", code_view.k)
        if spec:
            raise ValueError(f"unexpected two_step parameters: {sorted(spec)}")
        return two_step_adversary(k, budget, first, second, code_view, seed)
    if name == "omniscient":
        if code_view is None:
            raise ValueError("omniscient needs a code view")
        if spec:
            raise ValueError(f"unexpected omniscient parameters: {sorted(spec)}")
        return omniscient_eraser(code_view, budget)
    raise ValueError(f"unknown strategy name {name!r}")
