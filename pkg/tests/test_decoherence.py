import math

import numpy as np
import pytest

from ddmag import (
    NoiseModel,
    SequenceKind,
    SequenceSpec,
    attenuation_w,
    attenuation_w_oracle,
    coherence_monte_carlo,
    echo_t2,
    w_exponent,
)
from ddmag._kernels import pair_correlation_batch
from ddmag.decoherence import _q_eval


def pair_sum_reference(kind, n, tau, tau_c):
    """Independent W from the exact double integral over segment pairs."""
    r = 1.0 / tau_c
    if kind is SequenceKind.PDD:
        bounds = np.arange(n + 1) * tau
        signs = (-1.0) ** np.arange(n)
    else:
        bounds = np.concatenate([[0.0], (np.arange(n) + 0.5) * tau, [n * tau]])
        signs = (-1.0) ** np.arange(n + 1)
    total = 0.0
    for i in range(len(signs)):
        a, b = bounds[i], bounds[i + 1]
        total += (r * (b - a) - 1 + math.exp(-r * (b - a))) / r**2
        for j in range(i + 1, len(signs)):
            c, d = bounds[j], bounds[j + 1]
            total += signs[i] * signs[j] * (
                math.exp(-r * (c - b)) - math.exp(-r * (c - a))
                - math.exp(-r * (d - b)) + math.exp(-r * (d - a))
            ) / r**2
    return total


class TestNoiseModel:
    def test_validation(self):
        with pytest.raises(ValueError):
            NoiseModel(-1.0, 1e-5)
        with pytest.raises(ValueError):
            NoiseModel(1.0, 0.0)
        assert NoiseModel(0.0, 1e-5).is_off

    def test_dict_round_trip(self):
        n = NoiseModel(3.6e6, 2.5e-5)
        assert NoiseModel.from_dict(n.to_dict()) == n
        with pytest.raises(ValueError, match="unknown"):
            NoiseModel.from_dict({"lambda_per_s": 1.0, "tau_c_s": 1e-5, "T2": 1.0})


class TestClosedForm:
    def test_zero_coupling_coherence_is_one(self):
        seq = SequenceSpec(SequenceKind.PDD, 8, 0.4e-6)
        res = attenuation_w(seq, NoiseModel(0.0, 25e-6))
        assert res.coherence == 1.0
        assert res.exponent_s2 > 0.0

    @pytest.mark.parametrize("kind", [SequenceKind.PDD, SequenceKind.CPMG])
    def test_two_pulse_pair_sum(self, kind):
        tau, tau_c = 0.6667e-6, 25e-6
        seq = SequenceSpec(kind, 2, tau)
        got = attenuation_w(seq, NoiseModel(3.6e6, tau_c)).exponent_s2
        assert got == pytest.approx(pair_sum_reference(kind, 2, tau, tau_c), rel=1e-12)

    def test_two_pulse_pdd_is_single_echo(self):
        # one refocusing flip: W = [2 d - 3 + 4 e^{-d} - e^{-2d}] tau_c^2
        tau, tau_c = 0.5e-6, 25e-6
        d = tau / tau_c
        want = (2 * d - 3 + 4 * math.exp(-d) - math.exp(-2 * d)) * tau_c**2
        got = attenuation_w(SequenceSpec(SequenceKind.PDD, 2, tau), NoiseModel(1.0, tau_c))
        assert got.exponent_s2 == pytest.approx(want, rel=1e-10)

    def test_pair_sum_equivalence_randomized(self):
        rng = np.random.default_rng(23)
        for _ in range(100):
            kind = SequenceKind.PDD if rng.random() < 0.5 else SequenceKind.CPMG
            n = int(rng.integers(1, 33)) * 2
            tau_c = float(10 ** rng.uniform(-6, -4))
            tau = float(10 ** rng.uniform(-2, math.log10(2.0))) * tau_c
            got = w_exponent(kind, n, tau, tau_c)
            want = pair_sum_reference(kind, n, tau, tau_c)
            assert got == pytest.approx(want, rel=1e-9)

    def test_cpmg_suppresses_more(self):
        # same pulse budget and spacing: the half-shifted train decoheres less
        taus = np.linspace(0.05e-6, 3e-6, 50)
        for n in (2, 8, 32):
            w_pdd = w_exponent(SequenceKind.PDD, n, taus, 25e-6)
            w_cpmg = w_exponent(SequenceKind.CPMG, n, taus, 25e-6)
            assert np.all(w_cpmg <= w_pdd * (1 + 1e-12))

    def test_monotone_in_pulse_count_and_interval(self):
        ns = np.arange(2, 65, 2)
        w_n = np.array([w_exponent(SequenceKind.PDD, int(n), 0.5e-6, 25e-6) for n in ns])
        assert np.all(np.diff(w_n) > 0)
        taus = np.linspace(0.05e-6, 3e-6, 100)
        w_t = w_exponent(SequenceKind.CPMG, 10, taus, 25e-6)
        assert np.all(np.diff(w_t) > 0)

    def test_quadratic_coupling_dependence(self):
        seq = SequenceSpec(SequenceKind.CPMG, 12, 0.7e-6)
        c1 = attenuation_w(seq, NoiseModel(1.0e6, 25e-6)).coherence
        c2 = attenuation_w(seq, NoiseModel(2.0e6, 25e-6)).coherence
        assert c2 == pytest.approx(c1**4, rel=1e-12)

    def test_series_direct_crossover_continuous(self):
        for name in ("q11_pdd", "q12_pdd", "q11_cpmg", "q12_cpmg"):
            below = _q_eval(name, 0.5 - 1e-12)
            above = _q_eval(name, 0.5 + 1e-12)
            assert below == pytest.approx(above, rel=1e-9)

    def test_coherence_in_unit_interval(self):
        rng = np.random.default_rng(31)
        for _ in range(50):
            seq = SequenceSpec(
                SequenceKind.PDD if rng.random() < 0.5 else SequenceKind.CPMG,
                int(rng.integers(1, 33)) * 2,
                float(10 ** rng.uniform(-7.5, -5.5)),
            )
            res = attenuation_w(seq, NoiseModel(float(10 ** rng.uniform(4, 7)), 25e-6))
            assert 0.0 < res.coherence <= 1.0
            assert res.exponent_s2 >= 0.0


class TestOracle:
    def test_free_decay_pair_correlation(self):
        # single +1 segment: p(s) = T - s, and the lag integral has the
        # textbook closed form
        total_t = 4.0e-6
        bounds = np.array([0.0, total_t])
        signs = np.array([1.0])
        lags = np.linspace(0.0, total_t, 9)
        p = pair_correlation_batch(bounds, signs, lags)
        np.testing.assert_allclose(p, total_t - lags, rtol=0, atol=1e-20)

    def test_lag_beyond_duration_contributes_nothing(self):
        bounds = np.array([0.0, 1e-6, 2e-6])
        signs = np.array([1.0, -1.0])
        p = pair_correlation_batch(bounds, signs, np.array([2.5e-6, 3e-6]))
        np.testing.assert_array_equal(p, [0.0, 0.0])

    @pytest.mark.parametrize("kind", [SequenceKind.PDD, SequenceKind.CPMG])
    def test_two_pulse_oracle_matches_closed(self, kind):
        seq = SequenceSpec(kind, 2, 0.8e-6)
        noise = NoiseModel(2.0e6, 25e-6)
        got = attenuation_w_oracle(seq, noise)
        want = attenuation_w(seq, noise)
        assert got.exponent_s2 == pytest.approx(want.exponent_s2, rel=1e-10)

    def test_oracle_equivalence_randomized(self):
        rng = np.random.default_rng(37)
        for _ in range(50):
            kind = SequenceKind.PDD if rng.random() < 0.5 else SequenceKind.CPMG
            n = int(rng.integers(1, 33)) * 2
            tau_c = float(10 ** rng.uniform(-6, -4))
            tau = float(10 ** rng.uniform(-2, math.log10(2.0))) * tau_c
            seq = SequenceSpec(kind, n, tau)
            noise = NoiseModel(1.0, tau_c)
            got = attenuation_w_oracle(seq, noise).exponent_s2
            want = attenuation_w(seq, noise).exponent_s2
            assert got == pytest.approx(want, rel=1e-8)


class TestEchoT2:
    def test_reference_values(self):
        assert echo_t2(NoiseModel(3.6e6, 25e-6)) == pytest.approx(2.8e-6, rel=0.02)
        assert echo_t2(NoiseModel(0.36e6, 25e-6)) == pytest.approx(13.2e-6, rel=0.02)

    def test_power_law(self):
        t2 = echo_t2(NoiseModel(1.0e6, 25e-6))
        t2_strong = echo_t2(NoiseModel(10.0e6, 25e-6))
        assert t2 / t2_strong == pytest.approx(10 ** (2 / 3), rel=1e-12)

    def test_zero_coupling_rejected(self):
        with pytest.raises(ValueError):
            echo_t2(NoiseModel(0.0, 25e-6))


class TestMonteCarlo:
    def test_zero_coupling_short_circuit(self):
        seq = SequenceSpec(SequenceKind.PDD, 4, 0.5e-6)
        assert coherence_monte_carlo(seq, NoiseModel(0.0, 1e-5)) == (1.0, 0.0)

    def test_deterministic_per_seed(self):
        seq = SequenceSpec(SequenceKind.CPMG, 6, 0.5e-6)
        noise = NoiseModel(2.5e6, 25e-6)
        a = coherence_monte_carlo(seq, noise, n_paths=2000, seed=11)
        b = coherence_monte_carlo(seq, noise, n_paths=2000, seed=11)
        c = coherence_monte_carlo(seq, noise, n_paths=2000, seed=12)
        assert a == b
        assert a != c

    @pytest.mark.slow
    @pytest.mark.parametrize("kind", [SequenceKind.PDD, SequenceKind.CPMG])
    def test_agrees_with_closed_form(self, kind):
        seq = SequenceSpec(kind, 20, 0.6667e-6)
        noise = NoiseModel(3.6e6, 25e-6)
        want = attenuation_w(seq, noise).coherence
        mean, stderr = coherence_monte_carlo(seq, noise, n_paths=20000, seed=5)
        assert abs(mean - want) <= 3.5 * stderr + 2e-3
