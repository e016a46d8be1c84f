"""Bit-exact value types for codewords, received words, and erasure patterns.

Words are immutable and bit-packed: the symbol at position i (0-based, in
transmission order) lives at bit (n - 1 - i) of a Python int, so a word
prints and parses as the binary string you would write on paper.  Erased
symbols render as '^'.  All operations here are pure and safe to share
across threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

ERASURE_CHAR = "^"


def _full_mask(n: int) -> int:
    return (1 << n) - 1


@dataclass(frozen=True)
class Codeword:
    """A fixed-length binary word over {0, 1}."""

    n: int
    bits: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"word length must be positive, got n={self.n}")
        if not 0 <= self.bits <= _full_mask(self.n):
            raise ValueError(f"bits 0x{self.bits:x} out of range for n={self.n}")

    @classmethod
    def from_string(cls, text: str) -> "Codeword":
        if not text or any(c not in "01" for c in text):
            raise ValueError(f"codeword string must be nonempty over 01, got {text!r}")
        return cls(len(text), int(text, 2))

    def bit(self, i: int) -> int:
        """Symbol at position i (0-based)."""
        if not 0 <= i < self.n:
            raise ValueError(f"position {i} out of range [0, {self.n})")
        return (self.bits >> (self.n - 1 - i)) & 1

    def prefix_bits(self, ell: int) -> int:
        """Packed value of positions 0..ell-1."""
        if not 0 <= ell <= self.n:
            raise ValueError(f"prefix length {ell} out of range [0, {self.n}]")
        return self.bits >> (self.n - ell) if ell < self.n else self.bits

    def suffix_bits(self, ell: int) -> int:
        """Packed value of positions ell..n-1."""
        if not 0 <= ell <= self.n:
            raise ValueError(f"split point {ell} out of range [0, {self.n}]")
        return self.bits & _full_mask(self.n - ell)

    def __str__(self) -> str:
        return format(self.bits, f"0{self.n}b")


@dataclass(frozen=True)
class ReceivedWord:
    """A fixed-length word over {0, 1, erasure}.

    `erased` is a position mask (same packing as `bits`); erased positions
    carry no value, so `bits & erased == 0` always holds.
    """

    n: int
    bits: int
    erased: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"word length must be positive, got n={self.n}")
        mask = _full_mask(self.n)
        if not 0 <= self.erased <= mask:
            raise ValueError(f"erasure mask 0x{self.erased:x} out of range for n={self.n}")
        if not 0 <= self.bits <= mask:
            raise ValueError(f"bits 0x{self.bits:x} out of range for n={self.n}")
        if self.bits & self.erased:
            raise ValueError("erased positions must carry no symbol value")

    @classmethod
    def from_string(cls, text: str) -> "ReceivedWord":
        if not text or any(c not in "01" + ERASURE_CHAR for c in text):
            raise ValueError(f"received-word string must be over 01{ERASURE_CHAR}, got {text!r}")
        n = len(text)
        bits = int(text.replace(ERASURE_CHAR, "0"), 2)
        erased = int("".join("1" if c == ERASURE_CHAR else "0" for c in text), 2)
        return cls(n, bits, erased)

    @property
    def known_mask(self) -> int:
        return _full_mask(self.n) ^ self.erased

    @property
    def erasure_count(self) -> int:
        return self.erased.bit_count()

    def symbol(self, i: int) -> int | None:
        """Symbol at position i, or None if erased."""
        if not 0 <= i < self.n:
            raise ValueError(f"position {i} out of range [0, {self.n})")
        sel = 1 << (self.n - 1 - i)
        if self.erased & sel:
            return None
        return 1 if self.bits & sel else 0

    def __str__(self) -> str:
        out = []
        for i in range(self.n):
            s = self.symbol(i)
            out.append(ERASURE_CHAR if s is None else str(s))
        return "".join(out)


@dataclass(frozen=True)
class ErasurePattern:
    """A set of positions (0-based) to erase in a length-n word."""

    n: int
    positions: frozenset[int]

    def __init__(self, n: int, positions: Iterable[int]) -> None:
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "positions", frozenset(positions))
        if self.n < 1:
            raise ValueError(f"word length must be positive, got n={self.n}")
        for i in self.positions:
            if not 0 <= i < self.n:
                raise ValueError(f"erasure position {i} out of range [0, {self.n})")

    @classmethod
    def from_mask(cls, n: int, mask: int) -> "ErasurePattern":
        return cls(n, (i for i in range(n) if mask & (1 << (n - 1 - i))))

    @property
    def mask(self) -> int:
        m = 0
        for i in self.positions:
            m |= 1 << (self.n - 1 - i)
        return m

    def __len__(self) -> int:
        return len(self.positions)


@dataclass(frozen=True)
class Message:
    """A length-k binary message."""

    k: int
    value: int

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError(f"message length must be positive, got k={self.k}")
        if not 0 <= self.value < (1 << self.k):
            raise ValueError(f"message value {self.value} out of range for k={self.k}")

    @classmethod
    def from_string(cls, text: str) -> "Message":
        if not text or any(c not in "01" for c in text):
            raise ValueError(f"message string must be nonempty over 01, got {text!r}")
        return cls(len(text), int(text, 2))

    def __str__(self) -> str:
        return format(self.value, f"0{self.k}b")


def hamming_distance(a: Codeword, b: Codeword) -> int:
    """Number of positions where two equal-length codewords disagree."""
    if a.n != b.n:
        raise ValueError(f"length mismatch: {a.n} != {b.n}")
    return (a.bits ^ b.bits).bit_count()


def is_consistent(x: Codeword, y: ReceivedWord) -> bool:
    """True iff x agrees with y at every non-erased position."""
    if x.n != y.n:
        raise ValueError(f"length mismatch: {x.n} != {y.n}")
    return (x.bits & y.known_mask) == y.bits


def erase(x: Codeword, pattern: ErasurePattern) -> ReceivedWord:
    """Apply an erasure pattern to a codeword."""
    if x.n != pattern.n:
        raise ValueError(f"length mismatch: {x.n} != {pattern.n}")
    mask = pattern.mask
    return ReceivedWord(x.n, x.bits & ~mask, mask)


def erasure_count(y: ReceivedWord) -> int:
    """Number of erased positions in a received word."""
    return y.erasure_count
