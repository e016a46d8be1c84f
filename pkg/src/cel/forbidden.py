"""Exact combinatorics of the forbidden ball around a half-erased word.

A ball is identified by (n, k, budget, q_count) plus a center: a received
prefix of length k holding exactly q_count erasures, and an intact suffix of
length n - k.  Membership is: prefix consistent with the received prefix AND
suffix within Hamming distance (budget - q_count) of the center suffix.  The
ball size is

    2^q_count * sum_{i=0}^{budget-q_count} C(n-k, i)

and depends only on the parameters, never on the center.  All counts use
exact integer arithmetic; the Lemma-3 style threshold comparison rounds its
exponent *down* on a 2^-20 dyadic grid so a pass is conservative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import bounds as _bounds
from .core import Codeword, ReceivedWord

ENUMERATION_GUARD = 24

_DYADIC_SHIFT = 20


@dataclass(frozen=True)
class BallSpec:
    """Parameters and center of one forbidden ball."""

    n: int
    k: int
    budget: int
    q_count: int
    center_prefix_received: ReceivedWord
    center_suffix: Codeword

    def __post_init__(self) -> None:
        if not 1 <= self.k < self.n:
            raise ValueError(f"require 1 <= k < n, got k={self.k}, n={self.n}")
        if not 0 <= self.budget <= self.n:
            raise ValueError(f"budget {self.budget} out of range [0, {self.n}]")
        if not 0 <= self.q_count <= min(self.k, self.budget):
            raise ValueError(
                f"q_count {self.q_count} out of range [0, min(k={self.k}, budget={self.budget})]"
            )
        if self.center_prefix_received.n != self.k:
            raise ValueError(
                f"center prefix length {self.center_prefix_received.n} != k={self.k}"
            )
        if self.center_prefix_received.erasure_count != self.q_count:
            raise ValueError(
                f"center prefix has {self.center_prefix_received.erasure_count} erasures, "
                f"expected q_count={self.q_count}"
            )
        if self.center_suffix.n != self.n - self.k:
            raise ValueError(
                f"center suffix length {self.center_suffix.n} != n-k={self.n - self.k}"
            )

    @property
    def radius(self) -> int:
        """Remaining erasure budget for the suffix, budget - q_count."""
        return self.budget - self.q_count


def _size_from_params(n: int, k: int, budget: int, q_count: int) -> int:
    suffix_len = n - k
    radius = budget - q_count
    total = sum(math.comb(suffix_len, i) for i in range(0, min(radius, suffix_len) + 1))
    return (1 << q_count) * total


def ball_size_exact(spec: BallSpec) -> int:
    """Exact number of words in the ball (arbitrary-precision integer)."""
    return _size_from_params(spec.n, spec.k, spec.budget, spec.q_count)


def ball_contains(spec: BallSpec, candidate: Codeword) -> bool:
    """True iff the candidate word lies in the ball."""
    if candidate.n != spec.n:
        raise ValueError(f"candidate length {candidate.n} != n={spec.n}")
    y1 = spec.center_prefix_received
    prefix = candidate.prefix_bits(spec.k)
    if (prefix & y1.known_mask) != y1.bits:
        return False
    suffix = candidate.suffix_bits(spec.k)
    return (suffix ^ spec.center_suffix.bits).bit_count() <= spec.radius


def _member_mask(spec: BallSpec, words: np.ndarray) -> np.ndarray:
    """Vectorized membership test over packed word values."""
    shift = np.uint64(spec.n - spec.k)
    suffix_mask = np.uint64((1 << (spec.n - spec.k)) - 1)
    y1 = spec.center_prefix_received
    prefixes = words >> shift
    ok_prefix = (prefixes & np.uint64(y1.known_mask)) == np.uint64(y1.bits)
    suffix_dist = np.bitwise_count((words & suffix_mask) ^ np.uint64(spec.center_suffix.bits))
    return ok_prefix & (suffix_dist <= spec.radius)


def ball_enumerate(spec: BallSpec) -> frozenset[Codeword]:
    """Brute-force oracle: scan all 2^n words and keep the members.

    Guarded at n <= 24; membership is tested word by word, independent of
    the counting formula.
    """
    if spec.n > ENUMERATION_GUARD:
        raise ValueError(f"enumeration requires n <= {ENUMERATION_GUARD}, got n={spec.n}")
    members: list[int] = []
    total = 1 << spec.n
    chunk = 1 << 20
    for start in range(0, total, chunk):
        stop = min(start + chunk, total)
        words = np.arange(start, stop, dtype=np.uint64)
        mask = _member_mask(spec, words)
        members.extend(int(w) for w in words[mask])
    return frozenset(Codeword(spec.n, w) for w in members)


def lemma3_threshold(p: float, de: _bounds.DeltaEta, n: int) -> int:
    """Integer threshold floor(2^((1 - R_de(p) - eta/2) n)), rounded down.

    The exponent is snapped down one extra step on a 2^-20 dyadic grid and
    the mantissa floored, so the returned integer never exceeds the real
    threshold: comparing a ball size against it is conservative.
    """
    r_de = _bounds.rate_delta_eta(p, de)
    exponent = (1.0 - r_de - de.eta / 2.0) * n
    if exponent <= 0.0:
        return 0
    m = math.floor(exponent * (1 << _DYADIC_SHIFT)) - 1
    whole, frac_ticks = divmod(m, 1 << _DYADIC_SHIFT)
    frac = frac_ticks / float(1 << _DYADIC_SHIFT)
    mantissa = math.floor((2.0**frac) * (1 << 52))
    if whole >= 52:
        return mantissa << (whole - 52)
    if whole < 0:
        return 0
    return mantissa >> (52 - whole)


def lemma3_report(p: float, de: _bounds.DeltaEta, n: int) -> list[dict]:
    """Per-q ball sizes versus the Lemma-3 threshold at block length n.

    k is round((R_de(p) - delta) n) and budget is floor(p n); q ranges over
    [0, min(k, budget)].  Sizes and the threshold are exact integers.
    """
    r_de = _bounds.rate_delta_eta(p, de)
    k = round((r_de - de.delta) * n)
    if k < 1:
        raise ValueError(f"n={n} too small: k=round((R_de - delta) n)={k} < 1")
    if k >= n:
        raise ValueError(f"k={k} leaves no suffix at n={n}")
    budget = math.floor(p * n)
    threshold = lemma3_threshold(p, de, n)
    rows = []
    for q in range(0, min(k, budget) + 1):
        size = _size_from_params(n, k, budget, q)
        rows.append(
            {
                "n": n,
                "k": k,
                "budget": budget,
                "q": q,
                "size": size,
                "bound": threshold,
                "pass": size <= threshold,
            }
        )
    return rows


def lemma3_bound_check(p: float, de: _bounds.DeltaEta, n: int) -> bool:
    """True iff every feasible q keeps the exact ball size under the threshold."""
    return all(row["pass"] for row in lemma3_report(p, de, n))
