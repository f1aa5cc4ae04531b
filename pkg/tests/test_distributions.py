"""Moment profiles, truncation, bucket boundaries, sandwich laws, SD."""

import math
from fractions import Fraction

import numpy as np
import pytest

from hsprg.distributions import (
    DiscreteCoordinate,
    DistributionError,
    GaussianCoordinate,
    ProductDistribution,
    TruncatedStandardizedCoordinate,
    UniformIntervalCoordinate,
    UniformMultisetCoordinate,
    bucket_boundaries,
    coordinate_from_json,
    default_gamma,
    discretize_coordinate,
    hc_anticoncentration_probe,
    hc_concentration_probe,
    make_sandwich,
    moment_profile,
    sandwich_pair,
    standardize_multiset,
    statistical_distance,
    truncate_and_standardize,
)

RADEMACHER = DiscreteCoordinate.rademacher()
ETA_MAX = 1 / math.sqrt(3)


def rng(seed=7):
    return np.random.Generator(np.random.Philox(key=np.array([seed, 0], dtype=np.uint64)))


class TestMomentProfile:
    def test_rademacher(self):
        p = moment_profile(RADEMACHER)
        assert (p.mean, p.second_moment, p.fourth_moment) == (0.0, 1.0, 1.0)
        assert p.eta == pytest.approx(ETA_MAX, abs=1e-15)
        assert p.alpha == 0.5

    def test_gaussian(self):
        p = moment_profile(GaussianCoordinate())
        assert p.fourth_moment == 3.0
        assert p.eta == pytest.approx(ETA_MAX, abs=1e-15)

    def test_uniform_interval(self):
        p = moment_profile(UniformIntervalCoordinate(-1, 1))
        assert p.second_moment == pytest.approx(1 / 3)
        assert p.fourth_moment == pytest.approx(1 / 5)
        # (m2^2/m4)^(1/4) = (5/9)^(1/4) = 0.863 > 1/sqrt(3), symmetric caps it
        assert p.eta == pytest.approx(ETA_MAX, abs=1e-15)

    def test_asymmetric_discrete(self):
        coord = DiscreteCoordinate([-2.0, 0.5], [0.2, 0.8])
        p = moment_profile(coord)
        assert p.mean == pytest.approx(0.0, abs=1e-15)
        assert p.second_moment == pytest.approx(1.0)
        assert p.fourth_moment == pytest.approx(3.25)
        eta0 = (1 / 3.25) ** 0.25
        assert p.eta == pytest.approx(eta0 / (2 * math.sqrt(3)))
        assert p.alpha == pytest.approx(0.2)


class TestTruncate:
    def test_bounded_support_is_identity(self):
        res = truncate_and_standardize(RADEMACHER, n=4, C=1.0, eps=0.25)
        assert res.B_raw == pytest.approx(2.0)
        assert res.tail_mass == 0
        assert res.coord.values == (-1.0, 1.0)
        assert res.mu == 0 and res.scale == 1

    def test_gaussian_radius_and_tail(self):
        res = truncate_and_standardize(GaussianCoordinate(), n=8, C=3.0, eps=0.1)
        assert res.B_raw == pytest.approx((8 * 9 / 0.1) ** 0.25)  # about 5.18
        assert res.tail_mass <= 3.0 / res.B_raw ** 4  # Markov: C/B^4 = eps/(nC)
        assert res.tail_mass <= 0.1 / (8 * 3.0)

    def test_gaussian_second_moment_drift(self):
        res = truncate_and_standardize(GaussianCoordinate(), n=8, C=3.0, eps=0.1)
        assert abs(res.second_moment_trunc - 1.0) < math.sqrt(0.1 / 8)
        mean, m2, m4 = res.coord.moments()
        assert mean == pytest.approx(0.0, abs=1e-10)
        assert m2 == pytest.approx(1.0, abs=1e-10)
        assert m4 == pytest.approx(3.0, abs=1e-3)

    def test_eps_too_large_raises(self):
        # B^4 = nC^2/eps below the bulk of the mass forces variance under 1/2
        with pytest.raises(DistributionError):
            truncate_and_standardize(GaussianCoordinate(), n=1, C=1.0, eps=0.999)


class TestBucketBoundaries:
    def test_rademacher_half(self):
        bs = bucket_boundaries(RADEMACHER, 0.5, B=2.0)
        assert bs == [-2.0, -1.0, 1.0]

    def test_gaussian_quartiles(self):
        B = 5.0
        bs = bucket_boundaries(GaussianCoordinate(), 0.25, B)
        want = [-B, -0.6744897501960817, 0.0, 0.6744897501960817, B]
        assert bs == pytest.approx(want, abs=1e-9)

    def test_uniform_quarters(self):
        bs = bucket_boundaries(UniformIntervalCoordinate(-1, 1), 0.25, B=1.0)
        assert bs == pytest.approx([-1.0, -0.5, 0.0, 0.5, 1.0], abs=1e-12)

    def test_gamma_must_be_dyadic(self):
        with pytest.raises(DistributionError):
            bucket_boundaries(RADEMACHER, 0.3, B=2.0)

    def test_truncated_gaussian_analytic_matches_bisection(self):
        res = truncate_and_standardize(GaussianCoordinate(), n=8, C=3.0, eps=0.1)
        coord = res.coord
        assert isinstance(coord, TruncatedStandardizedCoordinate)
        for q in (0.125, 0.5, 0.875, 1.0):
            x = coord.quantile(q)
            lo, hi = -res.B, res.B
            while hi - lo > 1e-12:
                mid = (lo + hi) / 2
                if coord.cdf(mid) >= q:
                    hi = mid
                else:
                    lo = mid
            assert x == pytest.approx(hi, abs=1e-9)


class TestSandwich:
    def test_rademacher_upper_is_original(self):
        bs = bucket_boundaries(RADEMACHER, 0.5, B=2.0)
        lower, upper = sandwich_pair(RADEMACHER, bs, 0.5)
        assert upper.multiset == (-1.0, 1.0)
        assert lower.multiset == (-2.0, -1.0)

    def test_rademacher_sd_is_gamma(self):
        sw = make_sandwich(RADEMACHER, 0.5, B=2.0)
        assert statistical_distance(sw.lower, sw.upper) == Fraction(1, 2)

    def test_sd_self_zero_and_disjoint_one(self):
        a = UniformMultisetCoordinate([0.0, 1.0])
        b = UniformMultisetCoordinate([2.0, 3.0])
        assert statistical_distance(a, a) == 0
        assert statistical_distance(a, b) == 1

    def test_degenerate_granularity_collapses(self):
        # four-point uniform law at gamma = 1/4: lower and upper share the
        # interior boundaries and differ only at the edges
        coord = UniformMultisetCoordinate([-1.0, -0.5, 0.5, 1.0])
        sw = make_sandwich(coord, 0.25, B=2.0)
        assert sw.upper.multiset == (-1.0, -0.5, 0.5, 1.0)
        assert sw.lower.multiset == (-2.0, -1.0, -0.5, 0.5)
        assert statistical_distance(sw.lower, sw.upper) == Fraction(1, 4)

    @pytest.mark.parametrize("coord,B", [
        (RADEMACHER, 2.0),
        (UniformIntervalCoordinate(-1, 1), 1.0),
        (GaussianCoordinate(), 5.0),
        (DiscreteCoordinate([-2.0, 0.5], [0.2, 0.8]), 3.0),
    ])
    @pytest.mark.parametrize("gamma", [0.5, 0.25, 0.0625])
    def test_sd_at_most_gamma(self, coord, B, gamma):
        sw = make_sandwich(coord, gamma, B)
        assert statistical_distance(sw.lower, sw.upper) <= Fraction(gamma)


class TestPipeline:
    def test_gaussian_pipeline_budgets(self):
        rep = discretize_coordinate(GaussianCoordinate(), n=8, C=3.0, eps=0.1)
        B, g = rep.truncation.B, rep.gamma
        assert rep.sd_lower_upper <= Fraction(g)
        assert rep.mean_drift <= 2 * B * g + 1e-9
        assert rep.second_moment_drift <= 2 * B * B * g + 1e-9
        assert rep.fourth_moment_drift <= 2 * B ** 4 * g + 1e-9
        mean, m2, m4 = rep.alphabet_moments
        assert mean == pytest.approx(0.0, abs=1e-9)
        assert m2 == pytest.approx(1.0, abs=1e-9)
        assert m4 <= 3.0 + 2 * B ** 4 * g + 1e-9

    def test_default_gamma_is_dyadic_and_small_enough(self):
        g = default_gamma(0.1, 8, 5.18)
        assert g <= 0.1 / (2 * 8 * 5.18 ** 4)
        assert Fraction(g).numerator == 1

    def test_alphabet_sizes_power_of_two(self):
        rep = discretize_coordinate(RADEMACHER, n=4, C=1.0, eps=0.25, gamma=0.25)
        assert len(rep.alphabet) == 4

    def test_standardize_multiset(self):
        vals, shift, scale = standardize_multiset([1.0, 3.0])
        assert vals == [-1.0, 1.0]
        assert shift == 2.0 and scale == 1.0


class TestRoundTrip:
    @pytest.mark.parametrize("coord", [
        RADEMACHER,
        GaussianCoordinate(),
        UniformIntervalCoordinate(-2, 2),
        UniformMultisetCoordinate([0.5, 0.5, -1.0]),
    ])
    def test_json_round_trip(self, coord):
        back = coordinate_from_json(coord.to_json())
        assert back.to_json() == coord.to_json()
        assert back.moments() == pytest.approx(coord.moments())

    def test_product_distribution_shorthand(self):
        d = ProductDistribution.from_json({"coord": {"kind": "gaussian"}, "n": 3})
        assert d.n == 3 and not d.is_discrete


COORDS = [
    ("rademacher", RADEMACHER),
    ("gaussian", GaussianCoordinate()),
    ("uniform", UniformIntervalCoordinate(-1, 1)),
    ("skewed", DiscreteCoordinate([-2.0, 0.5], [0.2, 0.8])),
]


@pytest.mark.parametrize("name,coord", COORDS)
@pytest.mark.parametrize("t", [2.0, 4.0, 8.0])
def test_hc_concentration_diagnostic(name, coord, t):
    trials = 10 ** 6
    eta = moment_profile(coord).eta
    p = hc_concentration_probe(coord, t, trials, rng(11))
    se = math.sqrt(max(p * (1 - p), 1e-12) / trials)
    assert p <= 1.0 / (eta ** 4 * t ** 4) + 3 * se


@pytest.mark.parametrize("name,coord", COORDS)
@pytest.mark.parametrize("t", [0.5, 0.75])
@pytest.mark.parametrize("theta", [0.0, 1.0])
def test_hc_anticoncentration_diagnostic(name, coord, t, theta):
    trials = 10 ** 6
    eta = moment_profile(coord).eta
    p = hc_anticoncentration_probe(coord, theta, t, trials, rng(13))
    se = math.sqrt(max(p * (1 - p), 1e-12) / trials)
    assert p >= eta ** 4 * (1 - t * t) ** 2 - 3 * se
