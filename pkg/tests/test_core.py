import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pskrx import (
    IDEAL, CapacityError, NoiseModel, PskAlphabet, ReceiverParams, analytic_receiver_qpsk,
    build_decode_table, click_probability, mean_photon_numbers, ml_decode, output_amplitudes,
    pattern_probability, success_probability,
)
from pskrx import kernels
from pskrx.core import MAX_MODES, all_patterns, index_pattern, likelihoods, pattern_index

from conftest import brute_likelihood, brute_success, random_noise, random_receiver

SQ2 = math.sqrt(2)


def _exp(x):
    # numba calls libm exp; numpy may take a SIMD path that differs by an ulp
    if kernels.BACKEND == "numba":
        return np.array([math.exp(v) for v in x])
    return np.exp(x)


class TestTypes:
    def test_alphabet_states(self):
        a = PskAlphabet(4, 0.7)
        np.testing.assert_allclose(a.states, 0.7 * np.array([1, 1j, -1, -1j]), atol=1e-15)
        np.testing.assert_array_equal(a.priors, np.full(4, 0.25))

    @pytest.mark.parametrize("kwargs", [dict(m=1, alpha=1), dict(m=4, alpha=-1),
                                        dict(m=4, alpha=float("nan")),
                                        dict(m=3, alpha=1, priors=[0.5, 0.5, 0.1]),
                                        dict(m=3, alpha=1, priors=[0.5, 0.5])])
    def test_alphabet_rejects(self, kwargs):
        with pytest.raises(ValueError):
            PskAlphabet(**kwargs)

    def test_receiver_rejects_non_unit_u(self):
        with pytest.raises(ValueError, match="unit norm"):
            ReceiverParams([1.0, 1.0], [0, 0])

    def test_receiver_rejects_complex_u(self):
        with pytest.raises(ValueError, match="real"):
            ReceiverParams([1j], [0])

    def test_receiver_rejects_shape_mismatch(self):
        with pytest.raises(ValueError):
            ReceiverParams([1.0], [0, 0])

    def test_receiver_is_immutable(self):
        r = analytic_receiver_qpsk()
        with pytest.raises(ValueError):
            r.eps[0] = 0

    def test_transmissivity_constructor(self):
        r = ReceiverParams.from_transmissivity(0.3, [0, 0])
        np.testing.assert_allclose(r.u, [math.sqrt(0.3), math.sqrt(0.7)])

    @pytest.mark.parametrize("noise", [(0, 0, 1), (1, 1, 1), (1, 0, 1.5), (1.2, 0, 1)])
    def test_noise_rejects(self, noise):
        with pytest.raises(ValueError):
            NoiseModel(*noise)

    def test_pattern_codes_round_trip(self):
        for n in range(1, 6):
            for b in range(1 << n):
                assert pattern_index(index_pattern(b, n)) == b
        assert index_pattern(1, 3) == (1, 0, 0)


class TestOutputAmplitudes:
    def test_balanced_splitter(self):
        alpha = 0.8
        r = analytic_receiver_qpsk()
        g = output_amplitudes(r, alpha)
        np.testing.assert_allclose(g, [alpha / SQ2 + (1 + 1j) / 2, alpha / SQ2 + (-1 + 1j) / 2], atol=1e-15)

    def test_identity_routing(self):
        r = ReceiverParams([1, 0, 0], [0, 0, 0])
        np.testing.assert_array_equal(output_amplitudes(r, 0.9), [0.9, 0, 0])

    def test_vacuum_input(self):
        r = ReceiverParams([0.6, 0.8], [0.3 - 0.2j, 1j])
        np.testing.assert_array_equal(output_amplitudes(r, 0), r.eps)


class TestMeanPhotons:
    def test_ideal_is_modulus_squared(self, rng):
        r = random_receiver(rng, 3)
        g = output_amplitudes(r, 0.4 * 1j)
        np.testing.assert_allclose(mean_photon_numbers(r, 0.4j), np.abs(g) ** 2, rtol=1e-14)

    def test_incoherent_sum(self):
        r = ReceiverParams([1.0], [1.0])
        assert mean_photon_numbers(r, 1.0, NoiseModel(0.7, 0, 0.0))[0] == pytest.approx(1.4, abs=1e-15)

    def test_efficiency_scales(self):
        r = analytic_receiver_qpsk()
        g = output_amplitudes(r, 0.5)
        n = mean_photon_numbers(r, 0.5, NoiseModel(0.66, 0.01, 1.0))
        np.testing.assert_allclose(n, 0.66 * np.abs(g) ** 2, rtol=1e-14)

    def test_partial_visibility(self):
        # a = 1, e = exp(i pi/3), |a||e| cos = 0.5
        r = ReceiverParams([1.0], [complex(0.5, math.sqrt(3) / 2)])
        n = mean_photon_numbers(r, 1.0, NoiseModel(1.0, 0.0, 0.4))[0]
        assert n == pytest.approx(2 + 2 * 0.4 * 0.5, abs=1e-14)


class TestClickProbability:
    def test_vacuum(self):
        assert click_probability(0.0, 0.0) == 0.0

    def test_saturates(self):
        assert click_probability(800.0, 0.0) == 1.0

    def test_one_photon(self):
        assert click_probability(1.0) == pytest.approx(1 - math.exp(-1), abs=1e-15)
        assert click_probability(1.0) == pytest.approx(0.632121, abs=5e-7)

    def test_dark_counts(self):
        assert click_probability(0.0, 2.5e-3) == pytest.approx(2.5e-3, abs=1e-16)

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            click_probability(-0.1)


class TestPatternProbability:
    def test_single_mode_no_click(self):
        r = ReceiverParams([1.0], [0.2 + 0.1j])
        a = PskAlphabet(4, 0.6)
        for x in range(4):
            g = complex(a.states[x]) + (0.2 + 0.1j)
            assert pattern_probability(r, a, IDEAL, x, (0,)) == pytest.approx(math.exp(-abs(g) ** 2), rel=1e-14)

    def test_analytic_receiver_state_one(self):
        # both modes of state x=1 click with 1 - exp(-(1 + a^2 + sqrt(2) a) / 2)
        alpha = 0.7
        a = PskAlphabet(4, alpha)
        q = math.exp(-(1 + alpha ** 2 + SQ2 * alpha) / 2)
        r = analytic_receiver_qpsk()
        assert pattern_probability(r, a, IDEAL, 1, (1, 1)) == pytest.approx((1 - q) ** 2, rel=1e-13)
        assert pattern_probability(r, a, IDEAL, 1, (0, 0)) == pytest.approx(q * q, rel=1e-13)

    def test_appendix_table(self):
        # full click table of the analytic receiver, per state and mode
        alpha = 0.45
        plus = math.exp(-(1 + alpha ** 2 + SQ2 * alpha) / 2)
        minus = math.exp(-(1 + alpha ** 2 - SQ2 * alpha) / 2)
        table = {0: (plus, minus), 1: (plus, plus), 2: (minus, plus), 3: (minus, minus)}
        a = PskAlphabet(4, alpha)
        r = analytic_receiver_qpsk()
        for x, (q1, q2) in table.items():
            assert pattern_probability(r, a, IDEAL, x, (0, 1)) == pytest.approx(q1 * (1 - q2), rel=1e-13)

    def test_all_vacuum(self):
        r = ReceiverParams([0.6, 0.8], [0, 0])
        assert pattern_probability(r, PskAlphabet(4, 0.0), IDEAL, 2, (0, 0)) == 1.0

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            pattern_probability(analytic_receiver_qpsk(), PskAlphabet(4, 1), IDEAL, 0, (0, 1, 1))

    def test_state_out_of_range(self):
        with pytest.raises(ValueError):
            pattern_probability(analytic_receiver_qpsk(), PskAlphabet(4, 1), IDEAL, 4, (0, 1))

    def test_matches_brute_force(self, rng):
        for _ in range(50):
            n = int(rng.integers(1, 5))
            r = random_receiver(rng, n)
            noise = random_noise(rng)
            a = PskAlphabet(int(rng.integers(2, 7)), rng.uniform(0, 2))
            x = int(rng.integers(0, a.m))
            y = tuple(int(v) for v in rng.integers(0, 2, n))
            assert pattern_probability(r, a, noise, x, y) == pytest.approx(
                brute_likelihood(r, a, noise, x, y), rel=1e-12, abs=1e-300)


class TestIdealLimit:
    def test_bit_for_bit(self, rng):
        a = PskAlphabet(5, 0.9)
        for _ in range(20):
            r = random_receiver(rng, 3)
            table = likelihoods(r, a, IDEAL)
            for x in range(a.m):
                g = output_amplitudes(r, a.state(x))
                q = _exp(-(g.real ** 2 + g.imag ** 2))
                for b, y in enumerate(all_patterns(3)):
                    expected = 1.0
                    for j in range(3):
                        expected *= (1.0 - q[j]) if y[j] else q[j]
                    assert table[x, b] == expected


class TestSuccessProbability:
    def test_identical_states(self, rng):
        r = random_receiver(rng, 3)
        assert success_probability(r, PskAlphabet(4, 0.0)) == pytest.approx(0.25, abs=1e-15)

    def test_analytic_receiver(self):
        assert success_probability(analytic_receiver_qpsk(), PskAlphabet(4, 0.5)) == pytest.approx(0.480541, abs=1e-6)

    def test_matches_brute_force(self, rng):
        for _ in range(40):
            n = int(rng.integers(1, 6))
            r = random_receiver(rng, n)
            noise = random_noise(rng)
            a = PskAlphabet(int(rng.integers(2, 7)), rng.uniform(0, 2))
            assert success_probability(r, a, noise) == pytest.approx(brute_success(r, a, noise), rel=1e-12)

    def test_non_uniform_priors(self, rng):
        a = PskAlphabet(3, 0.8, priors=[0.5, 0.3, 0.2])
        r = random_receiver(rng, 2)
        assert success_probability(r, a) == pytest.approx(brute_success(r, a, IDEAL), rel=1e-12)
        assert success_probability(r, PskAlphabet(3, 0.0, priors=[0.5, 0.3, 0.2])) == pytest.approx(0.5)

    def test_capacity(self):
        n = MAX_MODES + 1
        r = ReceiverParams(np.eye(n)[0], np.zeros(n))
        with pytest.raises(CapacityError):
            success_probability(r, PskAlphabet(4, 0.5))

    def test_qpsk_rotation_symmetry(self, rng):
        for _ in range(20):
            r = random_receiver(rng, int(rng.integers(1, 5)))
            rot = ReceiverParams(r.u, 1j * r.eps)
            a = PskAlphabet(4, rng.uniform(0, 1.5))
            noise = random_noise(rng)
            assert success_probability(rot, a, noise) == pytest.approx(success_probability(r, a, noise), abs=1e-12)

    def test_mode_permutation_symmetry(self, rng):
        for _ in range(20):
            n = int(rng.integers(2, 6))
            r = random_receiver(rng, n)
            perm = rng.permutation(n)
            a = PskAlphabet(int(rng.integers(2, 7)), rng.uniform(0, 1.5))
            swapped = ReceiverParams(r.u[perm], r.eps[perm])
            assert success_probability(swapped, a) == pytest.approx(success_probability(r, a), abs=1e-12)

    def test_monotone_in_efficiency(self):
        r = analytic_receiver_qpsk()
        effs = [1.0, 0.9, 0.66, 0.4, 0.1]
        for alpha in np.round(np.arange(0.1, 1.01, 0.1), 10):
            a = PskAlphabet(4, alpha)
            vals = [success_probability(r, a, NoiseModel(e, 0, 1)) for e in effs]
            assert all(v1 >= v2 for v1, v2 in zip(vals, vals[1:]))

    @settings(max_examples=60, deadline=None)
    @given(n=st.integers(1, 5), m=st.integers(2, 8), alpha=st.floats(0, 3),
           seed=st.integers(0, 2 ** 32 - 1))
    def test_bounds(self, n, m, alpha, seed):
        r = random_receiver(np.random.default_rng(seed), n)
        p = success_probability(r, PskAlphabet(m, alpha))
        assert 1.0 / m - 1e-12 <= p <= 1.0 + 1e-12


class TestNormalization:
    @settings(max_examples=80, deadline=None)
    @given(n=st.integers(1, 6), m=st.integers(2, 8), alpha=st.floats(0, 3),
           seed=st.integers(0, 2 ** 32 - 1))
    def test_rows_sum_to_one(self, n, m, alpha, seed):
        g = np.random.default_rng(seed)
        table = likelihoods(random_receiver(g, n), PskAlphabet(m, alpha), random_noise(g))
        np.testing.assert_allclose(table.sum(axis=1), 1.0, atol=1e-12)


class TestDecoding:
    def test_both_click_is_state_one(self, qpsk):
        assert ml_decode(analytic_receiver_qpsk(), qpsk(0.5), IDEAL, (1, 1)) == 1

    def test_no_click_is_state_three(self, qpsk):
        assert ml_decode(analytic_receiver_qpsk(), qpsk(0.8), IDEAL, (0, 0)) == 3

    def test_ties_go_to_zero(self, qpsk):
        r = analytic_receiver_qpsk()
        assert all(ml_decode(r, qpsk(0.0), IDEAL, y) == 0 for y in all_patterns(2))

    def test_brute_force_decisions(self, qpsk, rng):
        for _ in range(20):
            r = random_receiver(rng, 3)
            a = PskAlphabet(int(rng.integers(2, 7)), rng.uniform(0.1, 2))
            for y in all_patterns(3):
                like = [brute_likelihood(r, a, IDEAL, x, y) for x in range(a.m)]
                best = max(like)
                if sorted(like)[-2] > best * (1 - 1e-9):
                    continue  # near-tie; float rounding decides
                assert ml_decode(r, a, IDEAL, y) == like.index(best)


class TestDecodeTable:
    def test_size_and_range(self, qpsk):
        t = build_decode_table(analytic_receiver_qpsk(), qpsk(0.5))
        assert len(t) == 4 and len(t.entries) == 4
        assert all(0 <= post <= 1 for _, post in t.entries.values())
        assert t.entries[(1, 1)][0] == 1

    def test_alpha_zero(self, qpsk):
        t = build_decode_table(analytic_receiver_qpsk(), qpsk(0.0))
        assert all(x == 0 for x, _ in t.entries.values())

    def test_unreachable_patterns(self, qpsk):
        t = build_decode_table(ReceiverParams([0.6, 0.8], [0, 0]), qpsk(0.0))
        assert t.pattern_prob[0] == 1.0
        assert np.all(t.posterior[1:] == 0.25)

    def test_posterior_is_bayes(self, rng):
        a = PskAlphabet(3, 0.9, priors=[0.2, 0.3, 0.5])
        r = random_receiver(rng, 3)
        t = build_decode_table(r, a)
        for y, (x, post) in t.entries.items():
            joint = [brute_likelihood(r, a, IDEAL, k, y) * a.priors[k] for k in range(3)]
            assert post == pytest.approx(max(joint) / sum(joint), rel=1e-12)

    def test_agrees_with_ml_decode(self, rng):
        a = PskAlphabet(5, 0.7)
        r = random_receiver(rng, 4)
        noise = NoiseModel(0.8, 0.01, 0.95)
        t = build_decode_table(r, a, noise)
        codes = rng.integers(0, 16, 10_000)
        direct = {b: ml_decode(r, a, noise, index_pattern(b, 4)) for b in range(16)}
        assert all(t.decode(index_pattern(int(b), 4)) == direct[int(b)] for b in codes)
        np.testing.assert_array_equal(t.decode_indices(codes), [direct[int(b)] for b in codes])

    def test_eight_rows_for_three_modes(self, qpsk, rng):
        assert len(build_decode_table(random_receiver(rng, 3), qpsk(0.5))) == 8
