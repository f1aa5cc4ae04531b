"""The bucket-hashed bounded-independence generator.

Coordinates are hashed into t buckets; within a bucket the values are
k-wise independent (k = 5 in general, 4 suffices for regular-only
experiments); distinct buckets draw from disjoint seed segments and are
fully independent.  Each coordinate's alphabet is a power-of-two-sized
multiset (the upper sandwich of its discretized law), indexed by the low
bits of the k-wise word.

Seed layout, low bits first: [hash index][bucket 0 seed]...[bucket t-1
seed], every bucket consuming k*m bits whether or not it is empty, with
m = log2 max(hash domain, alphabet size).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .gf2 import KWiseFamily
from .hashing import AFFINE, HashFamily, HashFunction, is_power_of_two


def _next_pow2(v: int) -> int:
    return 1 << max(0, (v - 1).bit_length())


@dataclass(frozen=True)
class MZParams:
    """The analysis parameter schedule; every field can be overridden."""

    d: int
    eps: float
    eta: float
    C: float
    s_param: float
    delta: float
    b_blocks: int
    r_blocks: int
    L: int
    t: int
    k: int = 5

    def __post_init__(self):
        if not is_power_of_two(self.t):
            raise ValueError("bucket count t must be a power of 2")
        if self.k not in (4, 5):
            raise ValueError("within-bucket independence k must be 4 or 5")


def derive_params(d: int, eps: float, eta: float, C: float = 1.0,
                  **overrides) -> MZParams:
    """Schedule s = 1/(eta^2 sqrt(eps)), delta = eta^4 eps^8 / d^7, L = b*r,
    t = smallest power of 2 at least (dL)^2/eps.

    b = ceil((2/eta^4) ln(1/eps)) and r = ceil((1/(eta^4 delta)) ln(1+16 s^2))
    are the explicit block counts behind L.  Any keyword overrides the
    derived value (shrinking t below the isolation schedule is the caller's
    responsibility; empirical runs do exactly that).
    """
    if d < 1:
        raise ValueError("need d >= 1")
    if not 0 < eps < 1:
        raise ValueError("need 0 < eps < 1")
    if not 0 < eta <= 1 / math.sqrt(3) + 1e-12:
        raise ValueError("need 0 < eta <= 1/sqrt(3)")
    s = overrides.pop("s_param", 1.0 / (eta * eta * math.sqrt(eps)))
    delta = overrides.pop("delta", eta ** 4 * eps ** 8 / d ** 7)
    b = overrides.pop("b_blocks", math.ceil((2.0 / eta ** 4) * math.log(1.0 / eps)))
    r = overrides.pop("r_blocks", math.ceil(math.log(1.0 + 16.0 * s * s) / (eta ** 4 * delta)))
    L = overrides.pop("L", b * r)
    t = overrides.pop("t", _next_pow2(math.ceil((d * L) ** 2 / eps)))
    k = overrides.pop("k", 5)
    if overrides:
        raise TypeError(f"unknown overrides: {sorted(overrides)}")
    return MZParams(d=d, eps=eps, eta=eta, C=C, s_param=s, delta=delta,
                    b_blocks=b, r_blocks=r, L=L, t=t, k=k)


class MZGenerator:
    """Concrete sampler for a list of per-coordinate alphabets."""

    def __init__(self, alphabets: Sequence[Sequence[float]], t: int, k: int = 5,
                 hash_variant: str = AFFINE, fixed_hash: HashFunction | None = None):
        if not alphabets:
            raise ValueError("need at least one coordinate")
        sizes = {len(a) for a in alphabets}
        if len(sizes) != 1:
            raise ValueError("all alphabets must share one size")
        (size,) = sizes
        if not is_power_of_two(size):
            raise ValueError("alphabet size must be a power of 2")
        if not is_power_of_two(t):
            raise ValueError("t must be a power of 2")
        self.alphabets = [np.asarray(sorted(a), dtype=float) for a in alphabets]
        self.n = len(alphabets)
        self.t = t
        self.k = k
        self.s_bits = max(1, (size - 1).bit_length())
        self.alphabet_size = size
        self.n_dom = max(_next_pow2(self.n), t)
        self.m_word = max((self.n_dom - 1).bit_length(), self.s_bits)
        self.hash_family = HashFamily(self.n_dom, t, variant=hash_variant)
        self.fixed_hash = fixed_hash
        self.hash_bits = 0 if (fixed_hash is not None or t == 1) else self.hash_family.index_bits
        self.bucket_seed_bits = self.k * self.m_word
        self._family_cache: dict[int, KWiseFamily] = {}

    @property
    def seed_bits(self) -> int:
        return self.hash_bits + self.t * self.bucket_seed_bits

    def seed_bits_report(self) -> dict:
        """Actual layout plus the two hash-accounting variants."""
        per_bucket = self.t * self.k * self.m_word
        mult_bits = (2 * self.n_dom - 1).bit_length()  # log2(2n)
        affine_bits = 2 * ((self.n_dom - 1).bit_length())
        return {
            "seed_bits": self.seed_bits,
            "hash_bits": self.hash_bits,
            "bucket_bits": per_bucket,
            "multiplicative_hash_total": mult_bits + per_bucket,
            "affine_hash_total": affine_bits + per_bucket,
        }

    def _family(self, size: int) -> KWiseFamily:
        fam = self._family_cache.get(size)
        if fam is None:
            fam = KWiseFamily(self.m_word, self.k, size)
            self._family_cache[size] = fam
        return fam

    def hash_for_seed(self, seed: int) -> HashFunction:
        if self.fixed_hash is not None:
            return self.fixed_hash
        if self.t == 1:
            return self.hash_family.from_index(0)  # constant partition
        return self.hash_family.from_index(seed & ((1 << self.hash_bits) - 1))

    def partition(self, h: HashFunction) -> tuple[list[int], list[int]]:
        """(bucket id, within-bucket rank) per coordinate, ranks by index order."""
        buckets = [h(j) for j in range(self.n)]
        counts = [0] * self.t
        ranks = []
        for b in buckets:
            ranks.append(counts[b])
            counts[b] += 1
        return buckets, ranks

    def generate(self, seed: int) -> np.ndarray:
        if not 0 <= seed < (1 << self.seed_bits):
            raise ValueError(f"seed needs exactly {self.seed_bits} bits")
        h = self.hash_for_seed(seed)
        buckets, ranks = self.partition(h)
        counts = [0] * self.t
        for b in buckets:
            counts[b] += 1
        mask = (1 << self.bucket_seed_bits) - 1
        seeds = []
        for i in range(self.t):
            raw = (seed >> (self.hash_bits + i * self.bucket_seed_bits)) & mask
            if counts[i]:
                fam = self._family(counts[i])
                seeds.append(fam.seed_from_int(raw))
            else:
                seeds.append(None)
        out = np.empty(self.n)
        idx_mask = self.alphabet_size - 1
        for j in range(self.n):
            fam = self._family(counts[buckets[j]])
            word = fam.expand(seeds[buckets[j]], ranks[j])
            out[j] = self.alphabets[j][word & idx_mask]
        return out

    def random_seed(self, rng: np.random.Generator) -> int:
        nbytes = (self.seed_bits + 7) // 8
        raw = int.from_bytes(rng.bytes(nbytes), "little")
        return raw & ((1 << self.seed_bits) - 1)

    def _mul_table(self) -> np.ndarray:
        f = self._family(1).field
        size = 1 << self.m_word
        if self.m_word > 11:
            raise ValueError("batch path supports word width up to 11 bits")
        table = np.empty((size, size), dtype=np.int64)
        for x in range(size):
            table[x] = [f.mul(x, y) for y in range(size)]
        return table

    def sample_batch(self, rng: np.random.Generator, size: int,
                     chunk: int = 1 << 15) -> np.ndarray:
        """Vectorized fresh draws: hash index and bucket seeds sampled directly.

        Equivalent in law to generate() over uniform seeds; used for Monte
        Carlo scale.  Requires the field word to fit a lookup table.
        """
        mul = getattr(self, "_mul_cache", None)
        if mul is None:
            mul = self._mul_table()
            self._mul_cache = mul
        out = np.empty((size, self.n))
        idx_mask = self.alphabet_size - 1
        alpha = np.stack(self.alphabets)
        done = 0
        while done < size:
            m = min(chunk, size - done)
            if self.fixed_hash is not None or self.t == 1:
                h = self.fixed_hash or self.hash_family.from_index(0)
                a = np.full(m, h.a, dtype=np.int64)
                c = np.full(m, h.c, dtype=np.int64)
            elif self.hash_family.variant == AFFINE:
                a = rng.integers(0, self.n_dom, size=m)
                c = rng.integers(0, self.n_dom, size=m)
            else:
                raw = rng.integers(0, 1 << self.hash_family.index_bits, size=m)
                a = raw % (self.n_dom - 1) + 1
                c = np.zeros(m, dtype=np.int64)
            coeffs = rng.integers(0, 1 << self.m_word, size=(m, self.t, self.k))
            counters = np.zeros((m, self.t), dtype=np.int64)
            rows = np.arange(m)
            for j in range(self.n):
                bucket = (mul[a, j] ^ c) & (self.t - 1)
                rank = counters[rows, bucket]
                counters[rows, bucket] = rank + 1
                acc = np.zeros(m, dtype=np.int64)
                for kk in range(self.k - 1, -1, -1):
                    acc = mul[acc, rank] ^ coeffs[rows, bucket, kk]
                out[done:done + m, j] = alpha[j][acc & idx_mask]
            done += m
        return out

    def all_seeds(self) -> range:
        return range(1 << self.seed_bits)

    def with_fixed_hash(self, h: HashFunction) -> "MZGenerator":
        return MZGenerator([list(a) for a in self.alphabets], self.t, self.k,
                           self.hash_family.variant, fixed_hash=h)


def generate_sample(gen: MZGenerator, seed: int) -> np.ndarray:
    return gen.generate(seed)


def seed_bits(gen: MZGenerator) -> int:
    return gen.seed_bits


def alphabets_from_distribution(dist) -> list[list[float]]:
    """Per-coordinate generator alphabets from a discrete product distribution.

    Coordinates must be uniform multisets (or uniform discrete laws) of one
    common power-of-two size.
    """
    from .distributions import DiscreteCoordinate, UniformMultisetCoordinate

    out = []
    for i, c in enumerate(dist.coords):
        if isinstance(c, UniformMultisetCoordinate):
            out.append(list(c.multiset))
        elif isinstance(c, DiscreteCoordinate):
            probs = set(c.fprobs)
            if len(probs) != 1:
                raise ValueError(f"coordinate {i} is not a uniform law")
            out.append(list(c.values))
        else:
            raise ValueError(f"coordinate {i} is not discrete")
    sizes = {len(a) for a in out}
    if len(sizes) != 1 or not is_power_of_two(next(iter(sizes))):
        raise ValueError("alphabets must share one power-of-two size")
    return out
