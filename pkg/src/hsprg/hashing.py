"""Collision-preserving and set-isolating hash families over GF(2^m).

A family maps positions [n] (n a power of 2, identified with GF(n)) to
buckets [t] (t a power of 2 dividing n) by taking a field product, adding
an offset in the affine variant, reading the result as an integer, and
reducing mod t.

The affine family h_{a,c}(x) = ((a*x + c) in GF(n)) mod t has size n^2 and
is pairwise independent, which makes both collision probabilities exactly
1/t.  The multiplicative family h_a(x) = (a*x) mod t with a != 0 is the
smaller textbook variant; it is kept behind a flag and must be certified
by ``collision_stats`` before use, since h_a(0) = 0 for every a.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Iterator, Sequence

import numpy as np

from .gf2 import field

AFFINE = "affine"
MULTIPLICATIVE = "multiplicative"


def is_power_of_two(v: int) -> bool:
    return v >= 1 and (v & (v - 1)) == 0


@dataclass(frozen=True)
class HashFunction:
    """One function from a family: x -> ((a*x ^ c) as integer) mod t."""

    a: int
    c: int
    m: int
    t: int

    def __call__(self, x: int) -> int:
        f = field(self.m)
        return (f.mul(self.a, f.check(x)) ^ self.c) & (self.t - 1)


class HashFamily:
    """Enumerable hash family from [n_pow2] onto [t] buckets."""

    def __init__(self, n_pow2: int, t: int, variant: str = AFFINE, b: int = 1):
        if not is_power_of_two(n_pow2) or not is_power_of_two(t):
            raise ValueError("n_pow2 and t must be powers of 2")
        if n_pow2 % t != 0:
            raise ValueError("t must divide n_pow2")
        if variant not in (AFFINE, MULTIPLICATIVE):
            raise ValueError(f"unknown variant {variant!r}")
        self.n_pow2 = n_pow2
        self.t = t
        self.variant = variant
        self.b = b
        self.m = (n_pow2 - 1).bit_length() if n_pow2 > 1 else 1
        if n_pow2 == 1:
            raise ValueError("domain must have at least 2 positions")

    @property
    def size(self) -> int:
        if self.variant == AFFINE:
            return self.n_pow2 * self.n_pow2
        return self.n_pow2 - 1  # a = 0 is the constant function, excluded

    @property
    def index_bits(self) -> int:
        """Bits consumed to draw one function from a seed.

        The affine family indexes exactly with 2*log2(n) bits.  The
        multiplicative variant follows the size-2n accounting, log2(2n)
        bits, mapped onto the n-1 multipliers by modular reduction.
        """
        if self.variant == AFFINE:
            return 2 * self.m
        return self.m + 1

    def from_index(self, index: int) -> HashFunction:
        if not 0 <= index < (1 << self.index_bits):
            raise ValueError(f"index needs exactly {self.index_bits} bits")
        if self.variant == AFFINE:
            return HashFunction(index >> self.m, index & (self.n_pow2 - 1), self.m, self.t)
        a = (index % (self.n_pow2 - 1)) + 1
        return HashFunction(a, 0, self.m, self.t)

    def functions(self) -> Iterator[HashFunction]:
        if self.variant == AFFINE:
            for a in range(self.n_pow2):
                for c in range(self.n_pow2):
                    yield HashFunction(a, c, self.m, self.t)
        else:
            for a in range(1, self.n_pow2):
                yield HashFunction(a, 0, self.m, self.t)

    def _value_table(self) -> np.ndarray:
        """Bucket of every (function, position) pair, shape (size, n)."""
        f = field(self.m)
        n = self.n_pow2
        prod = np.empty((n, n), dtype=np.int64)
        for a in range(n):
            row = [f.mul(a, x) for x in range(n)]
            prod[a] = row
        mask = self.t - 1
        if self.variant == MULTIPLICATIVE:
            return prod[1:] & mask
        # affine: broadcast the xor offset over all c
        out = np.empty((n * n, n), dtype=np.int64)
        cs = np.arange(n, dtype=np.int64)
        for a in range(n):
            out[a * n:(a + 1) * n] = (prod[a][None, :] ^ cs[:, None]) & mask
        return out


def hash_eval(h: HashFunction, x: int) -> int:
    return h(x)


@dataclass(frozen=True)
class CollisionStats:
    """Exact single-bucket and pairwise collision maxima over a family."""

    max_single_prob: Fraction
    max_pair_prob: Fraction
    b_certified: Fraction
    family_size: int

    def certifies(self, b: int = 1) -> bool:
        return self.b_certified <= b


def collision_stats(family: HashFamily, positions: Sequence[int] | None = None) -> CollisionStats:
    """Enumerate the family and certify b = t * max(collision probabilities)."""
    table = family._value_table()
    size = table.shape[0]
    if positions is None:
        positions = range(family.n_pow2)
    positions = list(positions)

    max_single = 0
    for i in positions:
        counts = np.bincount(table[:, i], minlength=family.t)
        max_single = max(max_single, int(counts.max()))

    max_pair = 0
    for i, j in combinations(positions, 2):
        max_pair = max(max_pair, int((table[:, i] == table[:, j]).sum()))

    p_single = Fraction(max_single, size)
    p_pair = Fraction(max_pair, size) if len(positions) > 1 else Fraction(0)
    b_cert = family.t * max(p_single, p_pair)
    return CollisionStats(p_single, p_pair, b_cert, size)


def isolation_failure_prob(family: HashFamily, S: Iterable[int]) -> Fraction:
    """Exact probability that some pair of S lands in one bucket.

    Guaranteed at most b*|S|^2/(2t) for a b-collision-preserving family.
    """
    S = sorted(set(S))
    if len(S) == 0:
        raise ValueError("S must be nonempty")
    if len(S) == 1:
        return Fraction(0)
    table = family._value_table()
    cols = table[:, S]
    bad = np.zeros(table.shape[0], dtype=bool)
    for i, j in combinations(range(len(S)), 2):
        bad |= cols[:, i] == cols[:, j]
    return Fraction(int(bad.sum()), table.shape[0])


def isolation_bound(b: Fraction | int, ell: int, t: int) -> Fraction:
    """The union-bound guarantee b*ell^2/(2t)."""
    return Fraction(b) * ell * ell / (2 * t)
