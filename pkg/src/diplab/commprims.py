"""Randomness-efficient comparison primitives.

Two building blocks recur in the verification stages: equality of values held
by adjacent nodes, tested by exchanging random-mask parities, and zero tests
of small sums, run modulo a prime drawn from a fixed pool.  Both have exact,
enumerable error probabilities, which the tests exploit.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil, log2

from .bits import chunks, decode, encode, width_for

DEFAULT_EQ_REPETITIONS = 7  # per-test error 2^-7 < 1/128
POOL_FACTOR = 12


def eq_fingerprint(x: str, masks) -> str:
    """t-bit fingerprint of a bit string: parities against t fixed-width masks.

    Both parties fingerprint their own value with the same masks and compare.
    Equal values always match; values that differ as zero-padded vectors
    collide with probability exactly 2^-t.  Masks may be bit strings or
    (width, int) pairs.
    """
    out = []
    for m in masks:
        if isinstance(m, str):
            width, mval = len(m), decode(m)
        else:
            width, mval = m
        xv = decode(x)
        if len(x) > width:
            raise ValueError("value longer than mask")
        out.append(str((xv & mval).bit_count() & 1))
    return "".join(out)


@dataclass(frozen=True)
class EqualityTest:
    """Parameters of a fingerprint equality test on values of <= length bits."""

    length: int
    repetitions: int = DEFAULT_EQ_REPETITIONS

    def __post_init__(self):
        if self.length < 1 or self.repetitions < 1:
            raise ValueError("length and repetitions must be positive")

    @property
    def mask_bits(self) -> int:
        return self.length * self.repetitions

    def masks_from(self, bits: str) -> list[str]:
        return chunks(bits, self.length)

    def fingerprint(self, value: int, bits: str) -> str:
        return eq_fingerprint(encode(value, self.length), self.masks_from(bits))

    @property
    def false_accept(self) -> float:
        return 2.0 ** (-self.repetitions)


def first_primes(count: int) -> tuple[int, ...]:
    out, cand = [], 2
    while len(out) < count:
        if all(cand % p for p in out):
            out.append(cand)
        cand += 1
    return tuple(out)


def sumzero_check(values, modulus: int) -> bool:
    """Accept iff the values sum to 0 modulo the given modulus."""
    if modulus < 2:
        raise ValueError("modulus must be >= 2")
    return sum(v % modulus for v in values) % modulus == 0


@dataclass(frozen=True)
class SumZeroTest:
    """Zero test of a sum of `arity` values bounded by `value_bound`.

    The modulus is drawn uniformly from the first `pool_size` primes; a
    nonzero sum s slips through with probability exactly
    |{pool primes dividing s}| / pool_size, at most log2(arity*value_bound)
    over the default pool.
    """

    value_bound: int
    arity: int
    pool_size: int = 0  # 0 selects the default POOL_FACTOR * ceil(log2(arity*value_bound))

    def __post_init__(self):
        if self.value_bound < 1 or self.arity < 1:
            raise ValueError("bounds must be positive")
        if self.pool_size == 0:
            size = POOL_FACTOR * max(1, ceil(log2(self.arity * self.value_bound)))
            object.__setattr__(self, "pool_size", size)
        if self.pool_size < 1:
            raise ValueError("pool must be nonempty")

    @property
    def pool(self) -> tuple[int, ...]:
        return first_primes(self.pool_size)

    @property
    def index_bits(self) -> int:
        return width_for(self.pool_size - 1)

    @property
    def residue_bits(self) -> int:
        """Message width per participant: residues modulo the largest pool prime."""
        return width_for(self.pool[-1] - 1)

    def modulus_from(self, bits: str) -> int:
        idx = decode(bits)
        return self.pool[idx % self.pool_size]

    def residue(self, value: int, modulus: int) -> int:
        return value % modulus

    def check(self, values, modulus: int) -> bool:
        return sumzero_check(values, modulus)

    def false_accept_exact(self, total: int):
        """Exact acceptance probability of the test on a fixed sum, as a Fraction."""
        from fractions import Fraction

        if total == 0:
            return Fraction(1)
        hits = sum(1 for p in self.pool if total % p == 0)
        return Fraction(hits, self.pool_size)
