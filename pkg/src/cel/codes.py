"""Systematic randomized encoder tables, pruning, and consistent-set decoding.

A CodeTable is the explicit enumeration of a stochastic code: every
(message u, coin s) pair maps to an n-bit codeword, stored packed in a numpy
array indexed by (u << d) | s.  Tables produced by sample_systematic_code
are systematic (the k-prefix of entry (u, s) is u itself); explicit tables
built from codeword lists may be arbitrary, but always injective across
messages.

Pruning removes, per message, coins whose suffixes sit within the erasure
budget of each other (greedy max-degree-first on the violation graph), then
drops messages left with fewer than half their coins.  A PrunedCode keeps
exactly 2^(d-1) coins per surviving message, so same-message codewords are
more than `budget` apart and second-step erasures can never confuse coins.

Decoding is exhaustive consistency: collect every entry whose codeword
matches the received word on all non-erased positions, then tie-break.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .core import Codeword, Message, ReceivedWord

DEFAULT_GUARD_BITS = 22

TIE_BREAK_POLICIES = ("uniform", "lexicographic")


class PruningError(Exception):
    """Pruning kept too few messages; resample the code with a fresh seed."""


def _as_message_index(u, k: int) -> int:
    if isinstance(u, Message):
        if u.k != k:
            raise ValueError(f"message length {u.k} != table k={k}")
        return u.value
    return int(u)


class CodeTable:
    """Explicit (message, coin) -> codeword enumeration.

    `seed` is set only for tables regenerable via sample_systematic_code;
    explicit tables carry seed None and serialize their codewords.
    """

    __slots__ = ("n", "k", "d", "seed", "words", "systematic")

    def __init__(self, n: int, k: int, d: int, words: np.ndarray, seed: int | None = None):
        if k < 1 or d < 0 or k + 1 > n:
            raise ValueError(f"require k >= 1, d >= 0, k + 1 <= n; got n={n}, k={k}, d={d}")
        if n > 64:
            raise ValueError(f"packed words support n <= 64, got n={n}")
        words = np.ascontiguousarray(words, dtype=np.uint64)
        if words.shape != (1 << (k + d),):
            raise ValueError(f"expected {1 << (k + d)} codewords, got shape {words.shape}")
        if words.size and int(words.max()) >= (1 << n):
            raise ValueError("codeword bits out of range for n")
        self.n, self.k, self.d, self.seed = n, k, d, seed
        words.setflags(write=False)  # tables are immutable once built
        self.words = words
        entry_u = np.arange(words.size, dtype=np.uint64) >> np.uint64(d)
        self.systematic = bool(np.all((words >> np.uint64(n - k)) == entry_u))
        if not self.systematic:
            self._check_injective(entry_u)

    def _check_injective(self, entry_u: np.ndarray) -> None:
        order = np.argsort(self.words, kind="stable")
        sw = self.words[order]
        su = entry_u[order]
        same_word = sw[1:] == sw[:-1]
        if np.any(same_word & (su[1:] != su[:-1])):
            raise ValueError("distinct messages share a codeword; encoder must be injective")

    @classmethod
    def from_codewords(cls, codewords: Iterable[Codeword | str], k: int, d: int = 0) -> "CodeTable":
        """Build an explicit table; entry order is (u, s) lexicographic."""
        parsed = [w if isinstance(w, Codeword) else Codeword.from_string(w) for w in codewords]
        if not parsed:
            raise ValueError("empty codeword list")
        n = parsed[0].n
        if any(w.n != n for w in parsed):
            raise ValueError("codewords must share one length")
        words = np.array([w.bits for w in parsed], dtype=np.uint64)
        return cls(n, k, d, words)

    @property
    def entry_count(self) -> int:
        return self.words.size

    @property
    def message_count(self) -> int:
        return 1 << self.k

    @property
    def coin_count(self) -> int:
        return 1 << self.d

    def index_of(self, u, s: int) -> int:
        u = _as_message_index(u, self.k)
        if not 0 <= u < self.message_count:
            raise ValueError(f"message {u} out of range [0, {self.message_count})")
        if not 0 <= s < self.coin_count:
            raise ValueError(f"coin {s} out of range [0, {self.coin_count})")
        return (u << self.d) | s

    def pair_of(self, index: int) -> tuple[int, int]:
        return index >> self.d, index & (self.coin_count - 1)

    def word_bits(self, u, s: int) -> int:
        return int(self.words[self.index_of(u, s)])

    def word_bits_by_index(self, index: int) -> int:
        return int(self.words[index])

    def encode(self, u, s: int) -> Codeword:
        """Table lookup for entry (u, s)."""
        return Codeword(self.n, self.word_bits(u, s))

    def entries(self):
        """Iterate (u, s, Codeword) over the whole table."""
        for idx in range(self.entry_count):
            u, s = self.pair_of(idx)
            yield u, s, Codeword(self.n, int(self.words[idx]))

    def all_indices(self) -> np.ndarray:
        return np.arange(self.entry_count, dtype=np.int64)

    def prefix_match_indices(self, ell: int, prefix_bits: int) -> np.ndarray:
        """Entry indices whose codeword starts with the given ell bits."""
        if not 0 <= ell <= self.n:
            raise ValueError(f"prefix length {ell} out of range [0, {self.n}]")
        if ell == 0:
            return self.all_indices()
        hit = (self.words >> np.uint64(self.n - ell)) == np.uint64(prefix_bits)
        return np.flatnonzero(hit).astype(np.int64)

    def consistent_indices(self, y: ReceivedWord) -> np.ndarray:
        """Entry indices whose codeword is consistent with y (ascending)."""
        if y.n != self.n:
            raise ValueError(f"received length {y.n} != n={self.n}")
        hit = (self.words & np.uint64(y.known_mask)) == np.uint64(y.bits)
        return np.flatnonzero(hit).astype(np.int64)

    def to_json_obj(self) -> dict:
        if self.seed is not None:
            return {"n": self.n, "k": self.k, "d": self.d, "seed": self.seed}
        return {
            "n": self.n,
            "k": self.k,
            "d": self.d,
            "codewords": [format(int(w), f"0{self.n}b") for w in self.words],
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "CodeTable":
        if "codewords" in obj:
            return cls.from_codewords(obj["codewords"], k=obj["k"], d=obj.get("d", 0))
        return sample_systematic_code(obj["n"], obj["k"], obj["d"], obj["seed"])


def sample_systematic_code(
    n: int, k: int, d: int, seed: int, guard_bits: int = DEFAULT_GUARD_BITS
) -> CodeTable:
    """Sample a systematic table: suffixes i.i.d. uniform over {0,1}^(n-k).

    Deterministic in `seed`; entry order is (u, s) lexicographic.  Guarded at
    k + d <= guard_bits to keep the enumeration in memory.
    """
    if k + d > guard_bits:
        raise ValueError(f"k + d = {k + d} exceeds enumeration guard {guard_bits}")
    if k < 1 or d < 0 or k + 1 > n:
        raise ValueError(f"require k >= 1, d >= 0, k + 1 <= n; got n={n}, k={k}, d={d}")
    rng = random.Random(seed)
    suffix_len = n - k
    count = 1 << (k + d)
    words = np.empty(count, dtype=np.uint64)
    for idx in range(count):
        u = idx >> d
        words[idx] = (u << suffix_len) | rng.getrandbits(suffix_len)
    return CodeTable(n, k, d, words, seed=seed)


class PrunedCode:
    """A CodeTable restricted to good messages and per-message good coins.

    Surviving same-message codeword pairs differ by more than `budget` in
    their suffixes; every kept message retains exactly 2^(d-1) coins, in
    lexicographic order, addressed by the truncated coin index t.
    """

    __slots__ = ("base", "budget", "kept_messages", "kept_coins", "_kept_indices", "_kept_words")

    def __init__(
        self,
        base: CodeTable,
        budget: int,
        kept_messages: tuple[int, ...],
        kept_coins: dict[int, tuple[int, ...]],
    ):
        if base.d < 1:
            raise ValueError("pruned codes need coin bits (d >= 1)")
        target = 1 << (base.d - 1)
        if not kept_messages:
            raise ValueError("pruned code keeps no messages")
        if list(kept_messages) != sorted(set(kept_messages)):
            raise ValueError("kept_messages must be sorted and unique")
        for u in kept_messages:
            coins = kept_coins.get(u)
            if coins is None or len(coins) != target or list(coins) != sorted(set(coins)):
                raise ValueError(f"message {u} must keep exactly {target} sorted coins")
        self.base = base
        self.budget = budget
        self.kept_messages = tuple(kept_messages)
        self.kept_coins = {u: tuple(kept_coins[u]) for u in kept_messages}
        idx = [
            (u << base.d) | s for u in self.kept_messages for s in self.kept_coins[u]
        ]
        self._kept_indices = np.array(idx, dtype=np.int64)
        self._kept_words = base.words[self._kept_indices]
        self._kept_indices.setflags(write=False)
        self._kept_words.setflags(write=False)

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def k(self) -> int:
        return self.base.k

    @property
    def d(self) -> int:
        return self.base.d

    @property
    def coin_count(self) -> int:
        """Coins per kept message in the truncated index space."""
        return 1 << (self.base.d - 1)

    @property
    def entry_count(self) -> int:
        return self._kept_indices.size

    def coin_of(self, u: int, t: int) -> int:
        if u not in self.kept_coins:
            raise ValueError(f"message {u} was pruned away")
        coins = self.kept_coins[u]
        if not 0 <= t < len(coins):
            raise ValueError(f"truncated coin index {t} out of range [0, {len(coins)})")
        return coins[t]

    def encode(self, u, t: int) -> Codeword:
        """Pruned encoder: entry (u, t) maps through the kept-coin list."""
        u = _as_message_index(u, self.base.k)
        return self.base.encode(u, self.coin_of(u, t))

    def pair_of(self, index: int) -> tuple[int, int]:
        return self.base.pair_of(index)

    def word_bits_by_index(self, index: int) -> int:
        return self.base.word_bits_by_index(index)

    def all_indices(self) -> np.ndarray:
        return self._kept_indices.copy()

    def prefix_match_indices(self, ell: int, prefix_bits: int) -> np.ndarray:
        if not 0 <= ell <= self.n:
            raise ValueError(f"prefix length {ell} out of range [0, {self.n}]")
        if ell == 0:
            return self.all_indices()
        hit = (self._kept_words >> np.uint64(self.n - ell)) == np.uint64(prefix_bits)
        return self._kept_indices[np.flatnonzero(hit)]

    def consistent_indices(self, y: ReceivedWord) -> np.ndarray:
        if y.n != self.n:
            raise ValueError(f"received length {y.n} != n={self.n}")
        hit = (self._kept_words & np.uint64(y.known_mask)) == np.uint64(y.bits)
        return self._kept_indices[np.flatnonzero(hit)]

    def to_json_obj(self) -> dict:
        msg_bitmap = 0
        for u in self.kept_messages:
            msg_bitmap |= 1 << u
        coins = {}
        for u in self.kept_messages:
            bitmap = 0
            for s in self.kept_coins[u]:
                bitmap |= 1 << s
            coins[str(u)] = format(bitmap, "x")
        obj = self.base.to_json_obj()
        obj["budget"] = self.budget
        obj["kept_messages"] = format(msg_bitmap, "x")
        obj["kept_coins"] = coins
        return obj

    @classmethod
    def from_json_obj(cls, obj: dict) -> "PrunedCode":
        base = CodeTable.from_json_obj(obj)
        msg_bitmap = int(obj["kept_messages"], 16)
        kept_messages = tuple(u for u in range(base.message_count) if msg_bitmap & (1 << u))
        kept_coins = {}
        for u in kept_messages:
            bitmap = int(obj["kept_coins"][str(u)], 16)
            kept_coins[u] = tuple(s for s in range(base.coin_count) if bitmap & (1 << s))
        return cls(base, obj["budget"], kept_messages, kept_coins)


def prune(table: CodeTable, budget: int) -> PrunedCode:
    """Remove same-message coin pairs within `budget`, then bad messages.

    Per message: repeatedly drop the coin participating in the most
    violating pairs (suffix distance <= budget), lowest coin index on ties,
    until no pair remains.  A message is bad if fewer than 2^(d-1) coins
    survive; pruning fails if fewer than 2^(k-1) messages remain.
    """
    if table.d < 1:
        raise ValueError("pruning requires coin bits (d >= 1)")
    if not 0 <= budget <= table.n:
        raise ValueError(f"budget {budget} out of range [0, {table.n}]")
    n, k, d = table.n, table.k, table.d
    suffix_mask = np.uint64((1 << (n - k)) - 1)
    suffixes = (table.words & suffix_mask).reshape(1 << k, 1 << d)
    target = 1 << (d - 1)
    kept_coins: dict[int, tuple[int, ...]] = {}
    bad_messages = []
    for u in range(1 << k):
        suf = suffixes[u]
        dist = np.bitwise_count(suf[:, None] ^ suf[None, :])
        viol = dist <= budget
        np.fill_diagonal(viol, False)
        alive = np.ones(suf.size, dtype=bool)
        while True:
            deg = (viol & alive[None, :]).sum(axis=1)
            deg[~alive] = -1
            if deg.max() <= 0:
                break
            alive[int(np.argmax(deg))] = False
        survivors = np.flatnonzero(alive)
        if survivors.size < target:
            bad_messages.append(u)
        else:
            kept_coins[u] = tuple(int(s) for s in survivors[:target])
    kept_messages = tuple(u for u in range(1 << k) if u not in set(bad_messages))
    if len(kept_messages) < 1 << (k - 1):
        raise PruningError(
            f"pruning kept {len(kept_messages)} of {1 << k} messages "
            f"(need at least {1 << (k - 1)}); resample the code seed"
        )
    kept_coins = {u: kept_coins[u] for u in kept_messages}
    return PrunedCode(table, budget, kept_messages, kept_coins)


def _same_message_suffix_groups(code: CodeTable | PrunedCode):
    if isinstance(code, PrunedCode):
        base = code.base
        mask = np.uint64((1 << (base.n - base.k)) - 1)
        for u in code.kept_messages:
            idx = [(u << base.d) | s for s in code.kept_coins[u]]
            yield base.words[np.array(idx, dtype=np.int64)] & mask
    else:
        mask = np.uint64((1 << (code.n - code.k)) - 1)
        grouped = (code.words & mask).reshape(code.message_count, code.coin_count)
        for u in range(code.message_count):
            yield grouped[u]


def min_same_prefix_distance(code: CodeTable | PrunedCode) -> int | float:
    """Minimum suffix distance over same-message coin pairs; inf if no pairs."""
    best: int | float = math.inf
    for suf in _same_message_suffix_groups(code):
        if suf.size < 2:
            continue
        dist = np.bitwise_count(suf[:, None] ^ suf[None, :])
        np.fill_diagonal(dist, np.iinfo(dist.dtype).max)
        group_min = int(dist.min())
        if group_min < best:
            best = group_min
    return best


@dataclass(frozen=True)
class DecodeResult:
    """Decoder verdict: chosen entry plus ambiguity accounting."""

    message: int | None
    coin: int | None
    consistent_count: int
    distinct_message_count: int
    outcome: str  # unique | ambiguous_tiebroken | no_candidate


def consistent_set(
    code: CodeTable | PrunedCode, y: ReceivedWord
) -> list[tuple[int, int, Codeword]]:
    """All entries (u, s, codeword) consistent with y, ascending by (u, s)."""
    out = []
    for idx in code.consistent_indices(y):
        u, s = code.pair_of(int(idx))
        out.append((u, s, Codeword(code.n, code.word_bits_by_index(int(idx)))))
    return out


def decode(
    code: CodeTable | PrunedCode,
    y: ReceivedWord,
    tie_break: str = "uniform",
    seed: int | None = None,
) -> DecodeResult:
    """Exhaustive-consistency decode with the given tie-break policy.

    uniform: choose uniformly at random among consistent entries;
    lexicographic: choose the smallest (u, s).
    """
    if tie_break not in TIE_BREAK_POLICIES:
        raise ValueError(f"tie_break must be one of {TIE_BREAK_POLICIES}, got {tie_break!r}")
    idx = code.consistent_indices(y)
    count = int(idx.size)
    if count == 0:
        return DecodeResult(None, None, 0, 0, "no_candidate")
    d = code.d
    distinct = int(np.unique((idx >> d) if d else idx).size)
    if count == 1:
        chosen = int(idx[0])
        u, s = code.pair_of(chosen)
        return DecodeResult(u, s, 1, 1, "unique")
    if tie_break == "uniform":
        chosen = int(idx[random.Random(seed).randrange(count)])
    else:
        chosen = int(idx[0])
    u, s = code.pair_of(chosen)
    return DecodeResult(u, s, count, distinct, "ambiguous_tiebroken")


def prefix_entropy(code: CodeTable | PrunedCode, ell: int, prefix: Codeword | str | None) -> float:
    """Entropy (bits) of the message given an observed ell-bit codeword prefix.

    Messages and coins are taken uniform; the distribution comes from exact
    entry counts.  A prefix matching no entry is a usage error.
    """
    if prefix is None or (isinstance(prefix, str) and prefix == ""):
        prefix_bits = 0
        plen = 0
    elif isinstance(prefix, str):
        word = Codeword.from_string(prefix)
        prefix_bits, plen = word.bits, word.n
    else:
        prefix_bits, plen = prefix.bits, prefix.n
    if plen != ell:
        raise ValueError(f"prefix length {plen} != ell={ell}")
    idx = code.prefix_match_indices(ell, prefix_bits)
    if idx.size == 0:
        raise ValueError("prefix matches no table entry")
    us = (idx >> code.d) if code.d else idx
    counts = np.bincount(us)
    counts = counts[counts > 0].astype(np.float64)
    total = counts.sum()
    return float(math.log2(total) - (counts * np.log2(counts)).sum() / total)


def a_eps_prefixes(code: CodeTable | PrunedCode, ell: int, epsilon: float) -> dict[int, float]:
    """Prefixes whose conditional message entropy exceeds n * epsilon / 4.

    Returns {prefix_bits: entropy} over the distinct ell-prefixes present in
    the code.
    """
    if not 1 <= ell <= code.n:
        raise ValueError(f"prefix length {ell} out of range [1, {code.n}]")
    words = code.base.words[code.all_indices()] if isinstance(code, PrunedCode) else code.words
    distinct = np.unique(words >> np.uint64(code.n - ell))
    threshold = code.n * epsilon / 4.0
    out = {}
    for bits in distinct:
        h = prefix_entropy(code, ell, Codeword(ell, int(bits)))
        if h > threshold:
            out[int(bits)] = h
    return out


def _require_valid_prefix_erasure(table: CodeTable, u: int, y1: ReceivedWord) -> None:
    if not table.systematic:
        raise ValueError("goodness checks require a systematic table")
    if y1.n != table.k:
        raise ValueError(f"y1 length {y1.n} != k={table.k}")
    if (u & y1.known_mask) != y1.bits:
        raise ValueError("y1 is not an erasure of u's prefix")


def type1_error_probability(table: CodeTable, u, y1: ReceivedWord, budget: int) -> float:
    """Pr over uniform coins that another message's codeword enters the ball.

    The ball is centered at (y1, suffix(u, S)); the probability is the exact
    fraction of coins S for which some entry (u', s'), u' != u, is a member.
    """
    u = _as_message_index(u, table.k)
    _require_valid_prefix_erasure(table, u, y1)
    radius = budget - y1.erasure_count
    if radius < 0:
        raise ValueError(f"budget {budget} smaller than erasures in y1 ({y1.erasure_count})")
    n, k, d = table.n, table.k, table.d
    suffix_mask = np.uint64((1 << (n - k)) - 1)
    prefixes = table.words >> np.uint64(n - k)
    entry_u = np.arange(table.entry_count, dtype=np.uint64) >> np.uint64(d)
    cand = ((prefixes & np.uint64(y1.known_mask)) == np.uint64(y1.bits)) & (entry_u != u)
    cand_suffixes = table.words[cand] & suffix_mask
    if cand_suffixes.size == 0:
        return 0.0
    hits = 0
    for s in range(table.coin_count):
        center = table.words[(u << d) | s] & suffix_mask
        if int(np.bitwise_count(cand_suffixes ^ center).min()) <= radius:
            hits += 1
    return hits / table.coin_count


def goodness_check(
    table: CodeTable, u, y1: ReceivedWord, budget: int, eta_tilde: float
) -> bool:
    """True iff the type-I ball probability is at most 2^(-eta_tilde * n)."""
    return type1_error_probability(table, u, y1, budget) <= 2.0 ** (-eta_tilde * table.n)


def average_pairwise_distance(words: Sequence[Codeword]) -> float:
    """Average Hamming distance over ordered pairs of a codeword sample."""
    m = len(words)
    if m < 2:
        raise ValueError("need at least two words")
    n = words[0].n
    if any(w.n != n for w in words):
        raise ValueError("words must share one length")
    total = 0
    for i in range(m):
        for j in range(i + 1, m):
            total += (words[i].bits ^ words[j].bits).bit_count()
    return 2.0 * total / (m * (m - 1))


def plotkin_average_bound(m: int, n: int) -> float:
    """Upper bound (m / (m-1)) * n / 2 on the average pairwise distance."""
    if m < 2:
        raise ValueError("bound needs m >= 2")
    return (m / (m - 1.0)) * n / 2.0


def distinctness_probability_bound(entropy_bits: float, m: int, log2_support: float) -> float:
    """Lower bound on Pr(m i.i.d. draws are all distinct) for an entropy floor.

    ((entropy - 1 - log2 m) / log2 |support|)^(m-1), clamped at zero.
    """
    if m < 1:
        raise ValueError("need m >= 1")
    if m == 1:
        return 1.0
    base = (entropy_bits - 1.0 - math.log2(m)) / log2_support
    return max(base, 0.0) ** (m - 1)
