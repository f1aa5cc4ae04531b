"""Sandwiching machinery for halfspaces under bounded independence.

The step approximator P(x) here satisfies, for parameters 0 < a, b < 1:

    P >= 0 on (-inf, -1],   0 <= P <= b on [-1, -a],
    0 <= P <= 1 on [-a, 0], 1 <= P <= 1+b on [0, 1],
    P >= 1 on [1, inf),     P(x) <= (4x)^K for |x| >= 1,

with even degree K <= C0 * log2(2/b) / a for the pinned constant C0.
Structure: P = (1 + x*D(x)^2)^2 where D is a Chebyshev interpolant of a
Gaussian-smoothed step times an inverse-square-root factor.  The squares
make P >= 1[x >= 0] hold pointwise by construction (exactly, even in
floats); the six range properties are enforced by a dense grid audit, so
the internal recipe is replaceable.

A single halfspace's upper sandwich splits on the head assignment: BAD
(irregular tail near the threshold) takes the constant 1, NEAR scales P to
the tail, FAR takes 1 when the shifted threshold is nonpositive and the
even power (z/theta')^q otherwise.  Products of certified upper
polynomials sandwich intersections with gap 2*d*eps0 + 3*d^2*sqrt(gamma).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import chebyshev as nch
from scipy.special import ndtr, ndtri

from .distributions import ProductDistribution
from .halfspace import DecisionTree, Halfspace, HalfspaceSystem
from .harness import exact_expectation, expectation_over_seeds, iter_product_space
from .regularity import TermNorms, is_delta_regular

# Calibrated ceiling for K * a / log2(2/b) over the supported parameter
# range; the audit reports the measured ratio for every constructed P.
DGJSV_C0 = 12.0

_AUDIT_STEP = 1e-4
_AUDIT_TOL = 1e-9
_AUDIT_XMAX = 8.0


class DGJSVError(RuntimeError):
    """Construction failed its own grid audit."""


class CertificationError(RuntimeError):
    """A hybrid-product precondition failed on exact enumeration."""


class OrderViolation(ValueError):
    """Sandwich order exceeds the independence of the test space."""


# ---------------------------------------------------------------------------
# scaled Chebyshev evaluation (|x| > 1 overflows float64 at high degree)


def _clenshaw_scaled(coeffs: np.ndarray, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Clenshaw with exponent tracking; returns (mantissa, exp2)."""
    x = np.asarray(x, dtype=float)
    b1 = np.zeros_like(x)
    b2 = np.zeros_like(x)
    e = np.zeros(x.shape, dtype=np.int32)
    two_x = 2.0 * x
    for k in range(len(coeffs) - 1, 0, -1):
        b1, b2 = two_x * b1 - b2 + np.ldexp(coeffs[k], -e), b1
        big = np.abs(b1) > 2.0 ** 500
        if big.any():
            shift = np.where(big, 500, 0).astype(np.int32)
            b1 = np.ldexp(b1, -shift)
            b2 = np.ldexp(b2, -shift)
            e = e + shift
    out = x * b1 - b2 + np.ldexp(coeffs[0], -e)
    return out, e


def _log2_abs(mant: np.ndarray, e: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log2(np.abs(mant)) + e


# ---------------------------------------------------------------------------
# the step approximator


@dataclass(frozen=True)
class DGJSVAudit:
    ok: bool
    violations: dict
    K: int
    c0_ratio: float


class UnivariatePoly:
    """Either plain monomial coefficients or the structured step approximator."""

    def __init__(self, kind: str, *, coeffs: Sequence | None = None,
                 d_cheb: np.ndarray | None = None, a: float | None = None,
                 b: float | None = None):
        self.kind = kind
        if kind == "monomial":
            cs = list(coeffs or [0])
            while len(cs) > 1 and cs[-1] == 0:
                cs.pop()
            self.coeffs = cs
            self.degree = len(cs) - 1 if any(cs) else 0
        elif kind == "dgjsv":
            self.d_cheb = np.asarray(d_cheb, dtype=float)
            self.a = float(a)
            self.b = float(b)
            deg_d = len(self.d_cheb) - 1
            self.degree = 2 * (2 * deg_d + 1)
        else:
            raise ValueError(f"unknown polynomial kind {kind!r}")

    @classmethod
    def from_monomial(cls, coeffs: Sequence) -> "UnivariatePoly":
        return cls("monomial", coeffs=coeffs)

    def __call__(self, x):
        scalar = np.isscalar(x)
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        if self.kind == "monomial":
            out = np.zeros_like(xs)
            for c in reversed(self.coeffs):
                out = out * xs + float(c)
        else:
            out = np.empty_like(xs)
            inside = np.abs(xs) <= 1.0
            if inside.any():
                d = nch.chebval(xs[inside], self.d_cheb)
                ahat = 1.0 + xs[inside] * d * d
                out[inside] = ahat * ahat
            if (~inside).any():
                sign, log2p = self._log2_outside(xs[~inside])
                vals = np.where(log2p > 1023, np.inf, np.exp2(np.minimum(log2p, 1023)))
                out[~inside] = vals
        return float(out[0]) if scalar else out

    def _log2_outside(self, xs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """log2 of P on |x| > 1 (P >= 0 always, so the sign is +)."""
        mant, e = _clenshaw_scaled(self.d_cheb, xs)
        log2_z = np.log2(np.abs(xs)) + 2.0 * _log2_abs(mant, e)  # z = x * D^2
        log2_ahat = np.empty_like(xs)
        pos = xs > 0
        log2_ahat[pos] = np.logaddexp2(0.0, log2_z[pos])  # 1 + |z|
        neg = ~pos
        lz = log2_z[neg]
        big = lz > 60
        small = lz < -60
        mid = ~(big | small)
        la = np.empty_like(lz)
        la[big] = lz[big]
        la[small] = 0.0
        with np.errstate(divide="ignore"):
            la[mid] = np.log2(np.abs(1.0 - np.exp2(lz[mid])))
        log2_ahat[neg] = la
        return np.ones_like(xs), 2.0 * log2_ahat

    def monomial_coefficients(self, prec_pad: int = 300):
        """Exact-as-possible power-basis coefficients.

        Monomial kind returns its own list; the structured kind converts
        the Chebyshev series with mpmath at a precision wide enough for
        the 2^(4 deg D) coefficient growth.
        """
        if self.kind == "monomial":
            return list(self.coeffs)
        import mpmath as mp

        deg_d = len(self.d_cheb) - 1
        with mp.workprec(4 * deg_d + prec_pad):
            t_prev = [mp.mpf(1)]
            t_cur = [mp.mpf(0), mp.mpf(1)]
            dmono = [mp.mpf(0)] * (deg_d + 1)
            dmono[0] = mp.mpf(float(self.d_cheb[0]))
            if deg_d >= 1:
                c1 = mp.mpf(float(self.d_cheb[1]))
                dmono[0] += c1 * t_cur[0]
                dmono[1] += c1 * t_cur[1]
            for k in range(2, deg_d + 1):
                t_next = [mp.mpf(0)] * (k + 1)
                for i, v in enumerate(t_cur):
                    t_next[i + 1] += 2 * v
                for i, v in enumerate(t_prev):
                    t_next[i] -= v
                t_prev, t_cur = t_cur, t_next
                ck = mp.mpf(float(self.d_cheb[k]))
                for i, v in enumerate(t_cur):
                    dmono[i] += ck * v

            def conv(u, v):
                out = [mp.mpf(0)] * (len(u) + len(v) - 1)
                for i, ui in enumerate(u):
                    if ui:
                        for j, vj in enumerate(v):
                            out[i + j] += ui * vj
                return out

            d2 = conv(dmono, dmono)
            ahat = [mp.mpf(1)] + d2           # 1 + x * D(x)^2
            return conv(ahat, ahat)

    def to_json(self) -> dict:
        if self.kind == "monomial":
            return {"kind": "monomial", "degree": self.degree,
                    "coefficients": [repr(float(c)) for c in self.coeffs]}
        return {"kind": "dgjsv", "degree": self.degree, "a": self.a, "b": self.b,
                "cheb_coefficients": [repr(float(c)) for c in self.d_cheb]}

    @classmethod
    def from_json(cls, data: dict) -> "UnivariatePoly":
        if data["kind"] == "monomial":
            return cls.from_monomial([float(c) for c in data["coefficients"]])
        return cls("dgjsv", d_cheb=[float(c) for c in data["cheb_coefficients"]],
                   a=data["a"], b=data["b"])


def _interp_inverse_sqrt(a: float, rel_target: float) -> tuple[np.ndarray, float, float]:
    """Chebyshev series for t^(-1/2) on [0.9a, 1.08] at relative error rel_target."""
    lo, hi = 0.9 * a, 1.08
    ts = np.linspace(a, 1.02, 3000)
    deg = 4
    while deg <= 400:
        cs = _cheb_interp_ab(lambda t: 1.0 / np.sqrt(t), deg, lo, hi)
        vals = _chebval_ab(cs, ts, lo, hi)
        if np.max(np.abs(vals * np.sqrt(ts) - 1.0)) <= rel_target:
            return cs, lo, hi
        deg = int(deg * 1.5) + 1
    raise DGJSVError("inverse-sqrt factor did not converge")


def _cheb_interp_ab(func, deg: int, lo: float, hi: float) -> np.ndarray:
    mid, half = 0.5 * (hi + lo), 0.5 * (hi - lo)
    return nch.chebinterpolate(lambda u: func(mid + half * u), deg)


def _chebval_ab(coeffs: np.ndarray, t: np.ndarray, lo: float, hi: float) -> np.ndarray:
    mid, half = 0.5 * (hi + lo), 0.5 * (hi - lo)
    return nch.chebval((np.asarray(t, dtype=float) - mid) / half, coeffs)


_DGJSV_CACHE: dict[tuple[float, float, bool], UnivariatePoly] = {}


def dgjsv_poly(a: float, b: float, audit: bool = True) -> UnivariatePoly:
    """Construct the step approximator for (a, b) and audit it on the grid.

    Raises DGJSVError if any of the six properties fails at tolerance
    1e-9; the error is never silent.  Constructions are cached by (a, b).
    """
    cached = _DGJSV_CACHE.get((a, b, audit))
    if cached is not None:
        return cached
    poly = _dgjsv_build(a, b, audit)
    _DGJSV_CACHE[(a, b, audit)] = poly
    return poly


def _dgjsv_build(a: float, b: float, audit: bool) -> UnivariatePoly:
    if not (0 < a < 1 and 0 < b < 1):
        raise ValueError("need 0 < a < 1 and 0 < b < 1")
    sqrt_b = math.sqrt(b)
    r_cheb, rlo, rhi = _interp_inverse_sqrt(a, sqrt_b / 24)
    x0 = -a / 2.0
    e_step = sqrt_b / 16.0
    w0 = (a / 2.0) / float(ndtri(1.0 - e_step))

    left = np.unique(np.concatenate([np.linspace(-1.0, -a, 4001), [-1.0, -a]]))
    midg = np.linspace(-a, 0.0, 2001)[1:-1]
    right = np.linspace(0.0, 1.0, 4001)[1:]
    right_budget = 0.85 * (math.sqrt(1.0 + b) - 1.0)

    for attempt in range(10):
        w = w0 * 0.85 ** attempt

        def d_target(x):
            return ndtr((x0 - np.asarray(x, dtype=float)) / w) * _chebval_ab(
                r_cheb, -np.asarray(x, dtype=float), rlo, rhi)

        dense = np.linspace(-1.0, 1.0, 8001)
        want = d_target(dense)
        deg = 8
        d_cheb = None
        while deg <= 6000:
            cand = nch.chebinterpolate(d_target, deg)
            tail = np.abs(cand) > 1e-17 * np.max(np.abs(cand))
            cand = cand[: max(2, int(np.nonzero(tail)[0].max()) + 1)]
            err = np.max(np.abs(nch.chebval(dense, cand) - want))
            if err <= sqrt_b / 24:
                d_cheb = cand
                break
            deg = int(deg * 1.4) + 1
        if d_cheb is None:
            continue

        dl = nch.chebval(left, d_cheb)
        dm = nch.chebval(midg, d_cheb)
        dr = nch.chebval(right, d_cheb)
        ok = (np.max(np.abs(1.0 + left * dl * dl)) <= 0.85 * sqrt_b
              and np.max(np.abs(midg) * dm * dm) <= 1.9
              and np.max(right * dr * dr) <= right_budget)
        if not ok:
            continue

        poly = UnivariatePoly("dgjsv", d_cheb=d_cheb, a=a, b=b)
        if not audit:
            return poly
        report = audit_dgjsv(poly)
        if report.ok:
            return poly

    raise DGJSVError(f"no construction passed the audit for a={a}, b={b}")


def audit_dgjsv(poly: UnivariatePoly, step: float = _AUDIT_STEP,
                tol: float = _AUDIT_TOL, xmax: float = _AUDIT_XMAX) -> DGJSVAudit:
    """Check the six range/growth properties on the dense grid."""
    a, b, K = poly.a, poly.b, poly.degree
    inner = np.arange(-1.0, 1.0 + step / 2, step)
    inner = np.unique(np.concatenate([inner, [-1.0, -a, 0.0, 1.0]]))
    vals = poly(inner)
    viol: dict[str, float] = {}

    def check(name, mask, low=None, high=None):
        worst = 0.0
        if mask.any():
            v = vals[mask]
            if low is not None:
                worst = max(worst, float(np.max(low - v)))
            if high is not None:
                worst = max(worst, float(np.max(v - high)))
        viol[name] = worst

    check("p2_on[-1,-a]", (inner >= -1) & (inner <= -a), low=0.0, high=b)
    check("p3_on[-a,0]", (inner >= -a) & (inner <= 0), low=0.0, high=1.0)
    check("p4_on[0,1]", (inner >= 0) & (inner <= 1), low=1.0, high=1.0 + b)

    outer = np.arange(1.0, xmax + step / 2, step)
    _, log2p_pos = poly._log2_outside(outer)
    _, log2p_neg = poly._log2_outside(-outer)
    # P >= 0 everywhere and P >= 1 right of 1 are structural; confirm finite
    viol["p1_left_nonneg"] = 0.0 if np.all(np.isfinite(log2p_neg) | (log2p_neg == -np.inf)) else math.inf
    viol["p5_right_ge1"] = float(max(0.0, np.max(1.0 - np.exp2(np.minimum(log2p_pos, 60)))))
    envelope = K * np.log2(4.0 * outer)
    gap = np.maximum(log2p_pos - envelope, log2p_neg - envelope)
    viol["p6_envelope_log2"] = float(max(0.0, np.max(gap)))

    ok = all(v <= tol for v in viol.values())
    c0_ratio = K * a / math.log2(2.0 / b)
    return DGJSVAudit(ok, viol, K, c0_ratio)


# ---------------------------------------------------------------------------
# single-halfspace upper sandwich


@dataclass(frozen=True)
class RegularityPartition:
    """Head coordinates plus the BAD/NEAR/FAR classifier over theta'."""

    head: tuple[int, ...]
    t_scale: float
    tail_norm: float
    tail_regular: bool
    delta: float

    def classify(self, theta_prime: float) -> str:
        if abs(theta_prime) > self.t_scale * self.tail_norm:
            return "FAR"
        return "NEAR" if self.tail_regular else "BAD"


class GeneralizedPolynomial:
    """Order-k upper sandwich for one halfspace, evaluable pointwise."""

    def __init__(self, weights: Sequence[float], theta: float,
                 partition: RegularityPartition, P: UnivariatePoly, q: int, n: int):
        self.weights = np.asarray(weights, dtype=float)
        self.theta = float(theta)
        self.partition = partition
        self.P = P
        self.q = q
        self.n = n
        self.L = len(partition.head)
        self.K = P.degree
        tail = [j for j in range(n) if j not in partition.head]
        self._head = list(partition.head)
        self._tail = tail

    @property
    def order(self) -> int:
        return min(self.L + max(self.K, self.q), self.n)

    def evaluate(self, x: Sequence[float]) -> float:
        head_sum = float(sum(self.weights[j] * x[j] for j in self._head))
        z = float(sum(self.weights[j] * x[j] for j in self._tail))
        theta_prime = self.theta - head_sum
        part = self.partition
        if part.tail_norm == 0.0:
            return 1.0 if theta_prime <= 0 else 0.0
        event = part.classify(theta_prime)
        if event == "BAD":
            return 1.0
        if event == "NEAR":
            return float(self.P((z - theta_prime) / (2.0 * part.t_scale * part.tail_norm)))
        if theta_prime <= 0:
            return 1.0
        return (z / theta_prime) ** self.q

    __call__ = evaluate


def head_partition(weights: Sequence[float], coords, delta: float, t: float,
                   L: int, head: Sequence[int] | None = None) -> RegularityPartition:
    """Top-L coordinates by term 2-norm (ties to the smallest index)."""
    n = len(weights)
    m2 = [c.moments()[1] for c in coords]
    m4 = [c.moments()[2] for c in coords]
    norms = TermNorms.from_weights(weights, m2, m4)
    if head is None:
        order = sorted(range(n), key=lambda j: (-norms.two_norm_sq[j], j))
        head = order[:L]
    head = tuple(head)
    tail = [j for j in range(n) if j not in head]
    tail_norm = math.sqrt(math.fsum(norms.two_norm_sq[j] for j in tail)) if tail else 0.0
    tail_regular = bool(tail) and is_delta_regular(norms, delta, tail)
    return RegularityPartition(head, t, tail_norm, tail_regular, delta)


def build_upper_poly(weights: Sequence[float], theta: float, coords,
                     *, delta: float, t: float, T: int, d: int,
                     C0: float = DGJSV_C0, L: int,
                     head: Sequence[int] | None = None) -> GeneralizedPolynomial:
    """Upper sandwich for 1[w.x >= theta] at the stated analysis parameters.

    a = 16 C0 d log2(td) / T must come out below 1 (else T is too small for
    this d, t); b = min(1/d^2, 1/t^4); q = T/(2d) rounded down to even.
    """
    if t <= 4:
        raise ValueError("need t > 4")
    if T < 2 or T % 2:
        raise ValueError("T must be a positive even integer")
    a = 16.0 * C0 * d * math.log2(t * d) / T
    if a >= 1:
        raise ValueError(f"a={a:.3f} >= 1: T={T} too small for d={d}, t={t}")
    b = min(1.0 / d ** 2, 1.0 / t ** 4)
    q = (T // (2 * d)) // 2 * 2
    partition = head_partition(weights, coords, delta, t, L, head)
    P = dgjsv_poly(a, b)
    if 2 * d * P.degree > T:
        raise ValueError(f"constructed degree K={P.degree} exceeds T/(2d); increase T")
    return GeneralizedPolynomial(weights, theta, partition, P, q, len(weights))


# ---------------------------------------------------------------------------
# certification and products


@dataclass(frozen=True)
class SandwichReport:
    pointwise_ok: bool
    expectation_gap: float
    order: int


@dataclass(frozen=True)
class UpperCertification:
    pointwise_ok: bool
    eps0: float       # E[p - h]
    gamma: float      # Pr[p > 1 + 1/d^2]
    norm2d: float     # E[p^(2d)]^(1/(2d))
    d: int

    def ok(self) -> bool:
        return (self.pointwise_ok and self.eps0 >= 0
                and self.norm2d <= 1.0 + 2.0 / self.d ** 2 + 1e-12)

    def report(self, order: int) -> SandwichReport:
        return SandwichReport(self.pointwise_ok, self.eps0, order)


def certify_upper(p: Callable[[Sequence[float]], float],
                  h: Callable[[Sequence[float]], int],
                  dist: ProductDistribution, d: int) -> UpperCertification:
    """Exact enumeration of the four hybrid-product preconditions."""
    thresh = 1.0 + 1.0 / d ** 2
    pointwise = True
    gap = 0.0
    gamma = 0.0
    pow_sum = 0.0
    for point, prob in iter_product_space(dist):
        pv = float(p(point))
        hv = float(h(point))
        if pv < hv:
            pointwise = False
        fp = float(prob)
        gap += (pv - hv) * fp
        if pv > thresh:
            gamma += fp
        pow_sum += pv ** (2 * d) * fp
    return UpperCertification(pointwise, gap, gamma, pow_sum ** (1.0 / (2 * d)), d)


@dataclass(frozen=True)
class HybridResult:
    evaluate: Callable[[Sequence[float]], float]
    order: int
    bound: float
    measured_gap: float
    pointwise_ok: bool
    certifications: tuple[UpperCertification, ...]


def hybrid_product(polys: Sequence, halfspaces: Sequence,
                   dist: ProductDistribution) -> HybridResult:
    """Product upper sandwich for the intersection, with the certified budget.

    Every factor must pass the four preconditions exactly (pointwise >=,
    small expectation gap, rare overshoot of 1 + 1/d^2, bounded 2d-norm);
    the resulting bound is 2 d eps0 + 3 d^2 sqrt(gamma) with eps0 and gamma
    the measured maxima.
    """
    d = len(polys)
    if len(halfspaces) != d:
        raise ValueError("need one halfspace per factor")
    certs = []
    for p, h in zip(polys, halfspaces):
        cert = certify_upper(p, _as_indicator(h), dist, d)
        if not cert.ok():
            raise CertificationError(f"factor failed certification: {cert}")
        certs.append(cert)
    eps0 = max(c.eps0 for c in certs)
    gamma = max(c.gamma for c in certs)
    bound = 2 * d * eps0 + 3 * d * d * math.sqrt(gamma)

    def product(x):
        out = 1.0
        for p in polys:
            out *= float(p(x))
        return out

    pointwise = True
    gap = 0.0
    for point, prob in iter_product_space(dist):
        pv = product(point)
        hv = 1.0
        for h in halfspaces:
            hv *= _as_indicator(h)(point)
        if pv < hv:
            pointwise = False
        gap += (pv - hv) * float(prob)

    order = sum(getattr(p, "order", dist.n) for p in polys)
    return HybridResult(product, min(order, dist.n), bound, gap, pointwise,
                        tuple(certs))


def _as_indicator(h) -> Callable[[Sequence[float]], int]:
    if isinstance(h, Halfspace):
        return h.evaluate
    return h


@dataclass(frozen=True)
class LowerSandwich:
    """p_l = 1 - p_u(negation): a pointwise lower bound for the original f."""

    upper_for_negation: Callable[[Sequence[float]], float]
    order: int

    def evaluate(self, x) -> float:
        return 1.0 - float(self.upper_for_negation(x))

    __call__ = evaluate


def lower_from_upper(p_u_negation, order: int | None = None) -> LowerSandwich:
    if order is None:
        order = getattr(p_u_negation, "order")
    return LowerSandwich(_as_callable(p_u_negation), order)


def _as_callable(p):
    return p.evaluate if hasattr(p, "evaluate") else p


def tree_to_and_sum(tree: DecisionTree, system: HalfspaceSystem) -> list[list[Halfspace]]:
    """One AND of (possibly negated) halfspaces per 1-leaf; the sum is f."""
    terms = []
    for path, leaf in tree.paths():
        if leaf != 1:
            continue
        term = []
        for hs_index, bit in path:
            h = system.halfspace(hs_index)
            term.append(h if bit else h.negation())
        terms.append(term)
    return terms


def and_sum_evaluate(terms: Sequence[Sequence[Halfspace]], x) -> int:
    total = 0
    for term in terms:
        val = 1
        for h in term:
            val &= h.evaluate(x)
        total += val
    return total


@dataclass(frozen=True)
class FoolingCheck:
    e_true: float
    e_kwise: float
    gap: float
    sandwich_eps: float
    order: int
    k: int

    @property
    def ok(self) -> bool:
        return self.gap <= self.sandwich_eps + 1e-12


def kwise_fooling_check(f: Callable[[Sequence[float]], int],
                        p_l, p_u, dist: ProductDistribution,
                        kwise_gen, order: int) -> FoolingCheck:
    """Exact check of |E f(X) - E f(Y)| <= sandwich gap for a k-wise Y.

    The mechanism is junta-expectation matching: every summand of an
    order-k polynomial sees identical k-marginals under X and Y, so the
    sandwich gap survives the change of measure.
    """
    if order > kwise_gen.k:
        raise OrderViolation(f"sandwich order {order} exceeds k={kwise_gen.k}")
    e_true = float(exact_expectation(f, dist))
    e_kwise = float(expectation_over_seeds(f, kwise_gen))
    gap_u = float(exact_expectation(lambda x: float(_as_callable(p_u)(x)) - f(x), dist))
    gap_l = float(exact_expectation(lambda x: f(x) - float(_as_callable(p_l)(x)), dist))
    eps = max(gap_u, gap_l)
    return FoolingCheck(e_true, e_kwise, abs(e_true - e_kwise), eps, order, kwise_gen.k)
