"""Measurement: exact and Monte Carlo expectations, fooling error, probes.

Exact mode enumerates the full product space (and the full seed space of a
generator); Monte Carlo uses counter-based Philox streams keyed by
(master seed, shard) so that shard results are reproducible and merge
order-independently.
"""

from __future__ import annotations

import csv
import itertools
import json
import math
import os
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.linalg import lapack
from scipy.special import betainc

from .distributions import DiscreteCoordinate, ProductDistribution
from .halfspace import CombinerSpec, HalfspaceSystem, evaluate_batch

SEED_ENV_VAR = "HSPRG_SEED"
DEFAULT_ENUM_CAP = 1 << 24


class ResourceCapError(RuntimeError):
    pass


def rng_for(master_seed: int, shard: int = 0) -> np.random.Generator:
    """Philox keyed by (master, shard): reproducible, order-independent shards."""
    key = np.array([master_seed % 2 ** 64, shard % 2 ** 64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def master_seed_default() -> int:
    return int(os.environ.get(SEED_ENV_VAR, "20100913"))


def iter_product_space(dist: ProductDistribution, cap: int = DEFAULT_ENUM_CAP):
    """(point, probability) over the full discrete product space.

    Probabilities are Fractions (exact for the dyadic laws the pipeline
    produces).  Raises when the space exceeds `cap`.
    """
    supports = []
    total = 1
    for c in dist.coords:
        if not isinstance(c, DiscreteCoordinate):
            raise ValueError("exact enumeration needs discrete coordinates")
        supports.append(list(zip(c.values, c.fprobs)))
        total *= len(c.values)
        if total > cap:
            raise ResourceCapError(f"product space exceeds cap {cap}")
    for combo in itertools.product(*supports):
        point = tuple(v for v, _ in combo)
        p = Fraction(1)
        for _, pr in combo:
            p *= pr
        yield point, p


def exact_expectation(f: Callable[[Sequence[float]], float],
                      dist: ProductDistribution, cap: int = DEFAULT_ENUM_CAP):
    """Sum of f * probability over the whole product space.

    Returns a Fraction when every f value is integral/Fraction, else float.
    """
    acc_frac = Fraction(0)
    acc_float = 0.0
    exact = True
    for point, p in iter_product_space(dist, cap):
        v = f(point)
        if exact and isinstance(v, (int, bool, Fraction)) and not isinstance(v, float):
            acc_frac += Fraction(v) * p
        else:
            if exact:
                acc_float = float(acc_frac)
                exact = False
            acc_float += float(v) * float(p)
    return acc_frac if exact else acc_float


def expectation_over_seeds(f: Callable[[np.ndarray], float], generator,
                           cap: int = DEFAULT_ENUM_CAP):
    """Average of f(G(seed)) over the full seed space, exact."""
    n_seeds = 1 << generator.seed_bits
    if n_seeds > cap:
        raise ResourceCapError(f"seed space 2^{generator.seed_bits} exceeds cap {cap}")
    acc = Fraction(0)
    exact = True
    accf = 0.0
    for seed in range(n_seeds):
        v = f(generator.generate(seed))
        if exact and isinstance(v, (int, bool, Fraction)) and not isinstance(v, float):
            acc += Fraction(v)
        else:
            if exact:
                accf = float(acc)
                exact = False
            accf += float(v)
    return acc / n_seeds if exact else accf / n_seeds


@dataclass(frozen=True)
class EstimationReport:
    experiment: str
    n: int
    d: int
    eps: float | None
    method: str                     # exact-enumeration | monte-carlo
    samples: int
    true_expectation: float
    prg_expectation: float
    fooling_error: float
    ci95: float
    seed_bits: int
    wall_ms: float

    def row(self) -> list:
        return [self.experiment, self.n, self.d, self.eps, self.method,
                self.samples, self.true_expectation, self.prg_expectation,
                self.fooling_error, self.ci95, self.seed_bits, self.wall_ms]

    COLUMNS = ["experiment", "n", "d", "eps", "method", "samples", "true_exp",
               "prg_exp", "error", "ci95", "seed_bits", "wall_ms"]

    FLOAT_COLUMNS = frozenset(["eps", "true_exp", "prg_exp", "error", "ci95", "wall_ms"])

    def to_json(self) -> dict:
        # decimal-string floats so a JSON round trip is bit-exact
        out = {}
        for k, v in zip(self.COLUMNS, self.row()):
            out[k] = repr(v) if isinstance(v, float) and k in self.FLOAT_COLUMNS else v
        return out

    @classmethod
    def from_json(cls, data: dict) -> "EstimationReport":
        vals = []
        for k in cls.COLUMNS:
            v = data[k]
            if k in cls.FLOAT_COLUMNS and isinstance(v, str):
                v = float(v)
            vals.append(v)
        return cls(*vals)


class NisanProductGenerator:
    """Product-space sampler driven by the small-width recursive PRG.

    Each coordinate reads one D-bit label (D = log2 alphabet size) as an
    index into its sorted alphabet; `space` is the width exponent of the
    branching programs the stream is meant to fool.
    """

    def __init__(self, alphabets: Sequence[Sequence[float]], space: int = 8):
        from .robp import nisan_seed_bits

        sizes = {len(a) for a in alphabets}
        if len(sizes) != 1:
            raise ValueError("all alphabets must share one size")
        (size,) = sizes
        if size & (size - 1):
            raise ValueError("alphabet size must be a power of 2")
        self.alphabets = [np.asarray(sorted(a), dtype=float) for a in alphabets]
        self.n = len(alphabets)
        self.space = space
        self.label_bits = max(1, (size - 1).bit_length())
        self.seed_bits = nisan_seed_bits(space, self.label_bits, self.n)

    def generate(self, seed: int) -> np.ndarray:
        from .robp import nisan_generate

        labels = nisan_generate(self.space, self.label_bits, self.n, seed)
        return np.array([alpha[z] for alpha, z in zip(self.alphabets, labels)])

    def random_seed(self, rng: np.random.Generator) -> int:
        nbytes = (self.seed_bits + 7) // 8
        raw = int.from_bytes(rng.bytes(nbytes), "little")
        return raw & ((1 << self.seed_bits) - 1)


def _wilson_halfwidth(p: float, n: int) -> float:
    """95% half-width; Wilson keeps it sane when p sits near 0 or 1."""
    if n == 0:
        return float("nan")
    z = 1.959963984540054
    if 0.05 < p < 0.95:
        return z * math.sqrt(p * (1 - p) / n)
    denom = 1 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return half + abs(center - p)


def estimate_fooling_error(f: Callable[[Sequence[float]], int],
                           dist: ProductDistribution, generator,
                           mode: str = "exact", trials: int = 10 ** 5,
                           master_seed: int | None = None, shards: int = 8,
                           experiment: str = "fooling", eps: float | None = None,
                           cap: int = DEFAULT_ENUM_CAP) -> EstimationReport:
    """|E f(X) - E f(G(seed))|, exactly or by sharded Monte Carlo."""
    t0 = time.perf_counter()
    if master_seed is None:
        master_seed = master_seed_default()
    if mode == "exact":
        true_e = float(exact_expectation(f, dist, cap))
        prg_e = float(expectation_over_seeds(f, generator, cap))
        samples = 1 << generator.seed_bits
        ci = 0.0
        method = "exact-enumeration"
    elif mode == "mc":
        per_shard = max(1, trials // shards)
        true_hits = prg_hits = 0
        total = 0
        for shard in range(shards):
            rng = rng_for(master_seed, shard)
            X = dist.sample(rng, per_shard)
            true_hits += int(sum(f(x) for x in X))
            rng2 = rng_for(master_seed, 10_000 + shard)
            prg_hits += int(sum(f(generator.generate(generator.random_seed(rng2)))
                                for _ in range(per_shard)))
            total += per_shard
        true_e = true_hits / total
        prg_e = prg_hits / total
        samples = total
        # both estimates carry error; combine in quadrature
        ci = math.hypot(_wilson_halfwidth(true_e, total), _wilson_halfwidth(prg_e, total))
        method = "monte-carlo"
    else:
        raise ValueError(f"unknown mode {mode!r}")
    wall = (time.perf_counter() - t0) * 1000
    return EstimationReport(experiment, dist.n, 1, eps, method, samples,
                            true_e, prg_e, abs(true_e - prg_e), ci,
                            generator.seed_bits, wall)


@dataclass(frozen=True)
class CovarianceSummary:
    """Covariance of S = sum_j x_j W_j and the per-term norm profile."""

    M: np.ndarray
    sigma_j_sq: np.ndarray
    sum_sigma4: float

    @classmethod
    def from_system(cls, W: np.ndarray, m2: Sequence[float]) -> "CovarianceSummary":
        W = np.asarray(W, dtype=float)
        m2 = np.asarray(m2, dtype=float)
        M = (W * m2[:, None]).T @ W
        sigma_sq = m2 * (W ** 2).sum(axis=1)
        return cls(M, sigma_sq, float((sigma_sq ** 2).sum()))

    @property
    def scaling_quantity(self) -> float:
        """(sum sigma_j^4)^(1/8), the trend knob in the Berry-Esseen bound."""
        return self.sum_sigma4 ** 0.125


def gaussian_reference_sampler(M: np.ndarray):
    """Sampler for N(0, M) via pivoted Cholesky; M may be singular.

    Falls back to an eigenvalue clamp (with a warning flag) if the
    factorization reports an indefinite matrix.
    """
    M = np.asarray(M, dtype=float)
    d = M.shape[0]
    c, piv, rank, info = lapack.dpstrf(M, lower=1)
    warned = False
    if info >= 0:
        L = np.tril(c)
        L[:, rank:] = 0.0
        perm = np.argsort(piv - 1)
        A = L[perm]
    else:
        vals, vecs = np.linalg.eigh(M)
        if vals.min() < -1e-10:
            warned = True
        vals = np.clip(vals, 0.0, None)
        A = vecs * np.sqrt(vals)
        rank = int((vals > 0).sum())

    def sample(rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.standard_normal((size, d)) @ A.T

    sample.rank = rank
    sample.clamped = warned
    return sample


@dataclass(frozen=True)
class OrthantSet:
    """Translate of a union of orthants: membership from sgn(X - Theta)."""

    theta: np.ndarray
    accept: tuple[int, ...]  # truth table over sign patterns, low bit = dim 0

    @classmethod
    def from_combiner(cls, theta: Sequence[float], combiner: CombinerSpec,
                      d: int) -> "OrthantSet":
        table = []
        for idx in range(1 << d):
            bits = tuple(idx >> i & 1 for i in range(d))
            table.append(combiner.apply(bits))
        return cls(np.asarray(theta, dtype=float), tuple(table))

    def contains(self, points: np.ndarray) -> np.ndarray:
        signs = (points >= self.theta).astype(int)
        idx = np.zeros(len(points), dtype=int)
        for i in range(signs.shape[1]):
            idx |= signs[:, i] << i
        table = np.asarray(self.accept)
        return table[idx].astype(bool)


@dataclass(frozen=True)
class BerryEsseenReport:
    gap: float
    ci95: float
    p_sum: float
    p_gauss: float
    summary: CovarianceSummary
    samples: int


def berry_esseen_probe(W: np.ndarray, dist: ProductDistribution, orthant: OrthantSet,
                       trials: int = 10 ** 5, master_seed: int | None = None,
                       shards: int = 8) -> BerryEsseenReport:
    """Estimate |Pr[S in A] - Pr[G in A]| with G ~ N(0, Cov S)."""
    if master_seed is None:
        master_seed = master_seed_default()
    W = np.asarray(W, dtype=float)
    m2 = [c.moments()[1] for c in dist.coords]
    summary = CovarianceSummary.from_system(W, m2)
    gauss = gaussian_reference_sampler(summary.M)
    per_shard = max(1, trials // shards)
    s_hits = g_hits = total = 0
    for shard in range(shards):
        rng = rng_for(master_seed, shard)
        X = dist.sample(rng, per_shard)
        s_hits += int(orthant.contains(X @ W).sum())
        rng2 = rng_for(master_seed, 20_000 + shard)
        g_hits += int(orthant.contains(gauss(rng2, per_shard)).sum())
        total += per_shard
    p_s, p_g = s_hits / total, g_hits / total
    ci = math.hypot(_wilson_halfwidth(p_s, total), _wilson_halfwidth(p_g, total))
    return BerryEsseenReport(abs(p_s - p_g), ci, p_s, p_g, summary, total)


def spherical_cap_probability(height: float, n: int) -> float:
    """Pr[x . e1 >= height] for x uniform on S^(n-1), via the incomplete beta."""
    if not -1.0 <= height <= 1.0:
        return 0.0 if height > 0 else 1.0
    tail = 0.5 * betainc((n - 1) / 2.0, 0.5, 1.0 - height * height)
    return tail if height >= 0 else 1.0 - tail


@dataclass(frozen=True)
class SphereTransferReport:
    estimate: float
    ci95: float
    budget_scale: float   # d * log(n) / n^(1/4), the transfer lemma's shape
    samples: int
    n: int
    d: int


def sphere_transfer(system: HalfspaceSystem, combiner: CombinerSpec,
                    trials: int = 10 ** 5, master_seed: int | None = None,
                    shards: int = 8, sampler=None) -> SphereTransferReport:
    """E f on the unit sphere, sampling Gaussians and normalizing.

    `sampler(rng, size) -> (size, n) array` overrides the Gaussian source,
    e.g. with a discretized-Gaussian PRG; rows are normalized either way
    (zero rows are redrawn).
    """
    if master_seed is None:
        master_seed = master_seed_default()
    n = system.n
    hits = total = 0
    for shard in range(shards):
        rng = rng_for(master_seed, shard)
        size = max(1, trials // shards)
        X = sampler(rng, size) if sampler is not None else rng.standard_normal((size, n))
        norms = np.linalg.norm(X, axis=1)
        bad = norms == 0
        while bad.any():
            X[bad] = (sampler(rng, int(bad.sum())) if sampler is not None
                      else rng.standard_normal((int(bad.sum()), n)))
            norms = np.linalg.norm(X, axis=1)
            bad = norms == 0
        hits += int(evaluate_batch(system, combiner, X / norms[:, None]).sum())
        total += size
    p = hits / total
    return SphereTransferReport(p, _wilson_halfwidth(p, total),
                                system.d * math.log(n) / n ** 0.25, total, n, system.d)


def emit_report(reports: Iterable[EstimationReport], path: str,
                fmt: str = "csv") -> None:
    reports = list(reports)
    if fmt == "csv":
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(EstimationReport.COLUMNS)
            for r in reports:
                writer.writerow(r.row())
    elif fmt == "json":
        with open(path, "w") as fh:
            json.dump([r.to_json() for r in reports], fh, indent=1)
    else:
        raise ValueError(f"unknown format {fmt!r}")


def read_report_json(path: str) -> list[EstimationReport]:
    with open(path) as fh:
        return [EstimationReport.from_json(d) for d in json.load(fh)]
