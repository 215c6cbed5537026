import math

import numpy as np
import pytest

from ddmag import (
    FieldComponent,
    MultiField,
    NoiseModel,
    SequenceKind,
    optimal_pulses_cpmg,
    optimal_pulses_pdd,
    optimal_pulses_scan,
)

PI = math.pi
NOISE = NoiseModel(3.6e6, 25e-6)
F0 = 0.75e6

AMP_FIELD = MultiField.single(100.0, F0, PI / 5)          # amplitude-info scans
DOPT_FIELD = MultiField.single(1000.0, F0, PI / 3)        # determinant scan, mono
DOPT_BI_FIELD = MultiField(
    (FieldComponent(1000.0, 0.75e6, PI / 5), FieldComponent(1500.0, 1.0e6, PI / 3))
)
BOTH = [SequenceKind.PDD, SequenceKind.CPMG]


def root_residual(n, f, noise):
    return 96.0 * noise.corr_time_s * f**3 - n * noise.coupling_per_s**2 * (
        1.0 + 3.0 * math.exp(-n / (2.0 * f * noise.corr_time_s))
    )


class TestAnalyticRoutes:
    def test_pdd_reference_value(self):
        assert optimal_pulses_pdd(F0, NOISE) == 36

    def test_cpmg_reference_value(self):
        assert optimal_pulses_cpmg(F0, NOISE) == 78

    def test_cpmg_never_below_pdd(self):
        rng = np.random.default_rng(61)
        for _ in range(20):
            f = float(10 ** rng.uniform(5.5, 6.3))
            noise = NoiseModel(float(10 ** rng.uniform(5.8, 6.8)), 25e-6)
            assert optimal_pulses_cpmg(f, noise) >= optimal_pulses_pdd(f, noise) - 2

    def test_root_bracketing_certificate(self):
        n0 = optimal_pulses_pdd(F0, NOISE)
        assert root_residual(n0 - 2, F0, NOISE) > 0 > root_residual(n0 + 2, F0, NOISE)

    def test_weak_coupling_root_growth(self):
        weak = NoiseModel(0.36e6, 25e-6)
        n_weak = optimal_pulses_pdd(F0, weak)
        n_strong = optimal_pulses_pdd(F0, NOISE)
        # pre-exponential scaling is 100x; the exponential bracket releases
        # another factor ~2 once N/(2 f tau_c) is large
        assert 100 <= n_weak / n_strong <= 400
        assert root_residual(n_weak - 2, F0, weak) > 0 > root_residual(n_weak + 2, F0, weak)

    def test_zero_coupling_rejected(self):
        with pytest.raises(ValueError, match="optimum"):
            optimal_pulses_pdd(F0, NoiseModel(0.0, 25e-6))
        with pytest.raises(ValueError, match="optimum"):
            optimal_pulses_cpmg(F0, NoiseModel(0.0, 25e-6))


class TestScans:
    def test_amplitude_combined(self, gamma):
        res = optimal_pulses_scan("b1", AMP_FIELD, BOTH, NOISE, gamma)
        assert res.best_n == 74

    def test_amplitude_single_families_match_roots(self, gamma):
        res_pdd = optimal_pulses_scan("b1", AMP_FIELD, [SequenceKind.PDD], NOISE, gamma)
        res_cpmg = optimal_pulses_scan("b1", AMP_FIELD, [SequenceKind.CPMG], NOISE, gamma)
        assert abs(res_pdd.best_n - optimal_pulses_pdd(F0, NOISE)) <= 2
        assert abs(res_cpmg.best_n - optimal_pulses_cpmg(F0, NOISE)) <= 2

    def test_frequency_objective(self, gamma):
        res_pdd = optimal_pulses_scan("f1", AMP_FIELD, [SequenceKind.PDD], NOISE, gamma)
        res_cpmg = optimal_pulses_scan("f1", AMP_FIELD, [SequenceKind.CPMG], NOISE, gamma)
        assert res_pdd.best_n == 148
        assert res_cpmg.best_n == 156

    def test_dopt_monochromatic(self, gamma):
        res = optimal_pulses_scan("det", DOPT_FIELD, BOTH, NOISE, gamma)
        assert abs(res.best_n - 60) <= 2

    def test_dopt_bichromatic(self, gamma):
        res = optimal_pulses_scan("det", DOPT_BI_FIELD, BOTH, NOISE, gamma)
        assert abs(res.best_n - 96) <= 2

    def test_determinant_nonnegative_everywhere(self, gamma):
        res = optimal_pulses_scan("det", DOPT_BI_FIELD, BOTH, NOISE, gamma, n_max=200)
        assert np.all(res.values >= 0.0)

    def test_no_noise_monotone(self, gamma):
        res = optimal_pulses_scan("b1", AMP_FIELD, BOTH, NoiseModel(0.0, 25e-6), gamma,
                                  n_max=100)
        assert np.all(np.diff(res.values) > 0)
        assert res.best_n == 100
        assert "no finite optimum" in res.note

    def test_objective_curve_shape(self, gamma):
        res = optimal_pulses_scan("b1", AMP_FIELD, BOTH, NOISE, gamma, n_max=120)
        assert res.n_grid[0] == 2 and res.n_grid[-1] == 120
        assert res.values.shape == res.n_grid.shape
        # unimodal in this regime: one sign change of the discrete slope
        signs = np.sign(np.diff(res.values))
        assert np.sum(np.diff(signs) != 0) == 1

    def test_degenerate_configuration_rejected(self, gamma):
        # zero amplitude kills the phase sensitivity identically
        field = MultiField.single(0.0, F0, PI / 4)
        with pytest.raises(ValueError, match="degenerate"):
            optimal_pulses_scan("phi1", field, [SequenceKind.PDD], NOISE, gamma)

    def test_bad_range_rejected(self, gamma):
        with pytest.raises(ValueError):
            optimal_pulses_scan("b1", AMP_FIELD, BOTH, NOISE, gamma, n_min=10, n_max=4)
