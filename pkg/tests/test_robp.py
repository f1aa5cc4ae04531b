"""Branching programs: compilation, monotonicity, sandwiching, the PRG."""

import itertools
from fractions import Fraction

import pytest

from conftest import philox, random_monotone_robp, random_robp
from hsprg.robp import (
    ROBP,
    MonotoneCertificate,
    MonotoneCounterexample,
    NotMonotoneError,
    ResourceError,
    acc_bitsets,
    all_inputs,
    check_monotone,
    compose_monotone_sandwich,
    decision_tree_error_bound,
    halfspace_to_robp,
    nisan_generate,
    nisan_seed_bits,
    product_robp,
    sandwich_monotone,
)

PM1 = [[-1, 1]]


def sign_eval(w, theta, x, strict=False):
    s = sum(wi * xi for wi, xi in zip(w, x))
    return int(s > theta if strict else s >= theta)


class TestEval:
    def test_width1_all_accept(self):
        B = ROBP([[[0, 0]]] * 3, [1], D=1)
        assert all(B.eval(z) == 1 for z in all_inputs(1, 3))

    def test_two_term_halfspace_accepts_three_of_four(self):
        B, _ = halfspace_to_robp([1, 1], 0, PM1 * 2)
        acc = [B.eval(z) for z in all_inputs(1, 2)]
        assert sum(acc) == 3  # sgn(0) = 1 keeps the two boundary points

    def test_replay_deterministic(self):
        B = random_robp(philox(1), T=10, max_width=6)
        z = [1, 0, 1, 1, 0, 0, 1, 0, 1, 1]
        assert B.eval(z) == B.eval(z)

    def test_malformed_transitions_rejected(self):
        with pytest.raises(ValueError):
            ROBP([[[0]]], [1], D=1)  # only one label on a 1-bit step


class TestHalfspaceCompile:
    def test_two_var_theta_one(self):
        B, cert = halfspace_to_robp([1, 1], 1, PM1 * 2)
        assert B.widths == [1, 2, 3]
        accepted = [z for z in all_inputs(1, 2) if B.eval(z)]
        assert accepted == [(1, 1)]  # only +1,+1 reaches sum 2 >= 1
        assert isinstance(cert, MonotoneCertificate)

    def test_zero_weights_all_accept_width1(self):
        B, _ = halfspace_to_robp([0, 0, 0], -1, PM1 * 3)
        assert B.width == 1
        assert all(B.eval(z) == 1 for z in all_inputs(1, 3))

    @pytest.mark.parametrize("seed", range(8))
    def test_matches_sign_evaluation_exhaustively(self, seed):
        rng = philox(seed + 100)
        n = 10
        w = rng.normal(size=n).round(3)
        theta = round(float(rng.normal()), 3)
        B, _ = halfspace_to_robp(w, theta, PM1 * n)
        for z in all_inputs(1, n):
            x = [PM1[0][zi] for zi in z]
            assert B.eval(z) == sign_eval(w, theta, x)

    def test_strict_variant(self):
        B, _ = halfspace_to_robp([1, 1], 0, PM1 * 2, strict=True)
        assert [B.eval(z) for z in all_inputs(1, 2)] == [0, 0, 0, 1]

    def test_state_cap(self):
        rng = philox(3)
        w = rng.normal(size=16)
        with pytest.raises(ResourceError):
            halfspace_to_robp(w, 0.0, PM1 * 16, max_states=50)

    def test_wider_alphabet_uses_label_mod_size(self):
        B, _ = halfspace_to_robp([1, 1], 0, [[-1, 0, 1, 2], [-1, 1]])
        # second step reads 2-bit labels; label 2 maps to value -1 (2 mod 2 = 0)
        assert B.D == 2
        assert B.eval([0, 0]) == B.eval([0, 2])

    def test_json_round_trip(self):
        B, _ = halfspace_to_robp([1, -2, 3], 1, PM1 * 3)
        again = ROBP.from_json(B.to_json())
        assert all(B.eval(z) == again.eval(z) for z in all_inputs(1, 3))


class TestCheckMonotone:
    def test_compiled_halfspace_certified(self):
        B, _ = halfspace_to_robp([3, 1, -2, 1], 0.5, PM1 * 4)
        cert = check_monotone(B)
        assert isinstance(cert, MonotoneCertificate)
        # certificate order really is an inclusion chain
        sets = acc_bitsets(B)
        for layer_sets, order in zip(sets, cert.orders):
            for a, b in zip(order, order[1:]):
                assert layer_sets[a] & ~layer_sets[b] == 0

    def test_intersection_product_not_monotone(self):
        B1, _ = halfspace_to_robp([-2, -2, -2], 0, PM1 * 3)
        B2, _ = halfspace_to_robp([-2, 1, 1], 1, PM1 * 3)
        prod = product_robp([B1, B2], lambda bits: int(all(bits)))
        res = check_monotone(prod)
        assert isinstance(res, MonotoneCounterexample)
        # the returned suffixes genuinely witness incomparability
        sets = acc_bitsets(prod)
        layer = sets[res.layer]

        def contains(state, suffix):
            idx = 0
            for lab in suffix:
                idx = (idx << prod.D) | lab
            return layer[state] >> idx & 1

        assert contains(res.v, res.suffix_v) and not contains(res.w, res.suffix_v)
        assert contains(res.w, res.suffix_w) and not contains(res.v, res.suffix_w)

    def test_width1_chain_monotone(self):
        B = ROBP([[[0, 0]]] * 4, [0], D=1)
        assert isinstance(check_monotone(B), MonotoneCertificate)

    @pytest.mark.parametrize("seed", range(6))
    def test_random_monotone_generator_is_monotone(self, seed):
        B = random_monotone_robp(philox(seed), T=6, max_width=8)
        assert isinstance(check_monotone(B), MonotoneCertificate)


def assert_sandwich_sound(pair, B, eps_budget):
    for z in all_inputs(B.D, B.T):
        d, m, u = pair.down.eval(z), B.eval(z), pair.up.eval(z)
        assert d <= m <= u
    assert pair.gap() <= Fraction(eps_budget)


class TestSandwichMonotone:
    def test_two_state_layers_identity_gap_zero(self):
        B, cert = halfspace_to_robp([1, 1], 1, PM1 * 2)
        pair = sandwich_monotone(B, eps=0.25, cert=cert)
        assert pair.gap() == 0
        assert_sandwich_sound(pair, B, 0.25)

    def test_large_eps_still_sound(self):
        B = random_monotone_robp(philox(42), T=4, max_width=6)
        pair = sandwich_monotone(B, eps=1.5)
        assert_sandwich_sound(pair, B, 1.5)

    @pytest.mark.parametrize("seed", range(12))
    @pytest.mark.parametrize("eps", [0.25, 0.5])
    def test_random_monotone_programs_sound(self, seed, eps):
        B = random_monotone_robp(philox(200 + seed), T=6, max_width=8)
        pair = sandwich_monotone(B, eps=eps)
        assert_sandwich_sound(pair, B, eps)
        assert pair.down.width <= 4 * B.T / eps
        assert pair.up.width <= 4 * B.T / eps

    def test_rejects_non_monotone(self):
        B1, _ = halfspace_to_robp([-2, -2, -2], 0, PM1 * 3)
        B2, _ = halfspace_to_robp([-2, 1, 1], 1, PM1 * 3)
        prod = product_robp([B1, B2], lambda bits: int(all(bits)))
        with pytest.raises(NotMonotoneError):
            sandwich_monotone(prod, eps=0.5)


class TestCompose:
    def test_identity_reduces_to_plain_sandwich(self):
        B = random_monotone_robp(philox(7), T=5, max_width=6)
        pair = compose_monotone_sandwich([0, 1], [B], eps=0.5)
        single = sandwich_monotone(B, eps=0.5)
        for z in all_inputs(1, 5):
            assert pair.down.eval(z) == single.down.eval(z)
            assert pair.up.eval(z) == single.up.eval(z)

    def test_and_of_two_halfspaces(self):
        rng = philox(9)
        w1 = rng.normal(size=6).round(2)
        w2 = rng.normal(size=6).round(2)
        B1, c1 = halfspace_to_robp(w1, 0.1, PM1 * 6)
        B2, c2 = halfspace_to_robp(w2, -0.2, PM1 * 6)
        pair = compose_monotone_sandwich([0, 0, 0, 1], [B1, B2], eps=0.25,
                                         certs=[c1, c2])
        for z in all_inputs(1, 6):
            f = B1.eval(z) & B2.eval(z)
            assert pair.down.eval(z) <= f <= pair.up.eval(z)
        assert pair.gap() <= Fraction(1, 2)

    def test_constant_one_combiner(self):
        B = random_monotone_robp(philox(11), T=4, max_width=5)
        pair = compose_monotone_sandwich([1, 1], [B], eps=0.5)
        assert pair.gap() == 0
        assert all(pair.down.eval(z) == 1 for z in all_inputs(1, 4))

    def test_monotone_table_required(self):
        B = random_monotone_robp(philox(13), T=3, max_width=4)
        with pytest.raises(NotMonotoneError):
            compose_monotone_sandwich([1, 0], [B], eps=0.5)  # NOT gate

    @pytest.mark.parametrize("seed", range(5))
    def test_random_triples_sound(self, seed):
        rng = philox(300 + seed)
        programs = [random_monotone_robp(rng, T=5, max_width=4) for _ in range(3)]
        table = [0, 0, 0, 1, 0, 1, 1, 1]  # majority, monotone
        pair = compose_monotone_sandwich(table, programs, eps=0.25)
        for z in all_inputs(1, 5):
            bits = tuple(p.eval(z) for p in programs)
            f = table[bits[0] | bits[1] << 1 | bits[2] << 2]
            assert pair.down.eval(z) <= f <= pair.up.eval(z)
        assert pair.gap() <= Fraction(3, 4)


class TestNisan:
    def test_t1_returns_low_bits_of_seed_word(self):
        assert nisan_generate(2, 2, 1, 0b110110) == [0b10]
        assert nisan_seed_bits(2, 2, 1) == 6

    def test_t2_reference_transcript(self):
        # w = 6; x = 5, a = 3, b = 33: output = (x mod 4, (3*x xor 33) mod 4)
        # 3*5 in GF(64) is (x+1)(x^2+1) = x^3+x^2+x+1 = 15; 15 xor 33 = 46 -> 2
        seed = 5 | (3 << 6) | (33 << 12)
        assert nisan_generate(2, 2, 2, seed) == [1, 2]

    def test_seed_bits_schedule(self):
        # w + 2w*ceil(log2 T)
        assert nisan_seed_bits(1, 1, 4) == 4 + 2 * 4 * 2
        assert nisan_seed_bits(5, 2, 16) == 9 + 2 * 9 * 4

    def test_output_length_padding(self):
        out = nisan_generate(1, 1, 3, 0)
        assert len(out) == 3

    def test_exhaustive_width2_fooling_audit(self):
        # frozen from an exact audit: every width-2 (1,1,4)-program is fooled
        # to exactly <= 1/32; the configured ceiling for this instance is 1/16
        S, D, T = 1, 1, 4
        bits = nisan_seed_bits(S, D, T)
        counts = {}
        for seed in range(1 << bits):
            z = tuple(nisan_generate(S, D, T, seed))
            counts[z] = counts.get(z, 0) + 1
        worst = Fraction(0)
        for B in _all_width2_programs():
            acc = sum(Fraction(counts.get(z, 0), 1 << bits) - Fraction(1, 16)
                      for z in all_inputs(1, 4) if B.eval(z))
            worst = max(worst, abs(acc))
        assert worst == Fraction(1, 32)
        assert worst <= Fraction(1, 16)


def _all_width2_programs():
    layer0 = list(itertools.product(range(2), repeat=2))
    layerk = list(itertools.product(range(2), repeat=4))
    for t0 in layer0:
        for t1 in layerk:
            for t2 in layerk:
                for t3 in layerk:
                    for acc in itertools.product(range(2), repeat=2):
                        yield ROBP([[t0], [t1[:2], t1[2:]], [t2[:2], t2[2:]],
                                    [t3[:2], t3[2:]]], acc, 1)


class TestTreeBound:
    def test_arithmetic(self):
        b = decision_tree_error_bound(0.05, 0.05, zero_leaves=1, one_leaves=1)
        assert b.bound == pytest.approx(0.2)
        assert decision_tree_error_bound(0.1, 0.0, 1, 0).bound == pytest.approx(0.1)

    def test_min_leaf_variant(self):
        b = decision_tree_error_bound(0.05, 0.05, zero_leaves=1, one_leaves=3)
        assert b.bound_min_leaves == pytest.approx(0.1)
        assert b.bound == pytest.approx(0.4)

    def test_depth2_tree_measured_error_within_bound(self):
        # Exact instantiation at enumerable scale: T=4 coordinates, Nisan PRG
        # seeds enumerated, tree of two monotone halfspace programs.
        S, D, T = 1, 1, 4
        B1, c1 = halfspace_to_robp([1, 1, -1, 1], 1, PM1 * 4)
        B2, c2 = halfspace_to_robp([2, -1, 1, 1], 0, PM1 * 4)
        eps = 0.5
        p1 = sandwich_monotone(B1, eps, c1)
        p2 = sandwich_monotone(B2, eps, c2)

        def tree(z):  # root B1; left subtree queries B2
            return 1 if B1.eval(z) else B2.eval(z)

        bits = nisan_seed_bits(S, D, T)
        counts = {}
        for seed in range(1 << bits):
            z = tuple(nisan_generate(S, D, T, seed))
            counts[z] = counts.get(z, 0) + 1
        n_seeds = 1 << bits

        def prg_error(f):
            acc = sum((Fraction(counts.get(z, 0), n_seeds) - Fraction(1, 16)) * f(z)
                      for z in all_inputs(D, T))
            return abs(acc)

        measured = prg_error(tree)
        delta = max(prg_error(p.eval) for pair in (p1, p2)
                    for p in (pair.down, pair.up))
        eps_meas = max(float(p1.gap()), float(p2.gap()))
        bound = decision_tree_error_bound(eps_meas, float(delta), 1, 2).bound
        assert float(measured) <= bound + 1e-12
