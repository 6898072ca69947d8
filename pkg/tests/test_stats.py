import math

import numpy as np
import pytest
from scipy.constants import epsilon_0
from scipy.optimize import brentq

from tlres import (
    AttenuationModel,
    DivergentUncertaintyError,
    DomainError,
    fit_lognormal,
    kappa_fit,
    monte_carlo_uncertainty,
    participation,
    qi_forward,
    reactance_value_uncertainty,
    single_mode_tand_distribution,
    tan_delta_single_mode,
    tan_delta_uncertainty,
)
from tlres.reference_data import DUTS
from tlres.stats import monte_carlo_reactance, monte_carlo_tan_delta, robust_sigma, standard_normals


class TestAnalyticFormulas:
    def test_half_participation(self):
        assert reactance_value_uncertainty(0.5, 0.003) == pytest.approx(0.003)

    def test_dut_a_value(self):
        assert reactance_value_uncertainty(0.1139, 0.0014) == pytest.approx(0.0109, abs=1e-4)

    def test_case_two_versus_case_one(self):
        ratio = reactance_value_uncertainty(0.031, 1e-3) / reactance_value_uncertainty(0.175, 1e-3)
        assert ratio == pytest.approx(6.6, abs=0.2)

    def test_zero_participation(self):
        with pytest.raises(DivergentUncertaintyError):
            reactance_value_uncertainty(0.0, 1e-3)

    def test_out_of_range(self):
        with pytest.raises(DomainError):
            reactance_value_uncertainty(1.2, 1e-3)

    def test_tan_delta_unit_ratio(self):
        p = 0.15
        assert tan_delta_uncertainty(p, 1e5, 1e5, 0.1) == pytest.approx((1 - p) / p * 0.1)

    def test_tan_delta_example(self):
        assert tan_delta_uncertainty(0.18, 2e5, 1e5, 0.1) == pytest.approx(0.0695, abs=1e-4)

    def test_tan_delta_near_unloaded(self):
        assert tan_delta_uncertainty(0.03, 1e5, 1.02e5, 0.05) > 1.0

    def test_tan_delta_exact_divergence(self):
        with pytest.raises(DivergentUncertaintyError):
            tan_delta_uncertainty(0.2, 0.8, 1.0, 0.1)


class TestMonteCarlo:
    def test_sigma_to_zero(self):
        rep = monte_carlo_reactance("capacitor", 3.41e9, 3.8979e9, 1, 50.0, 1e-12, n_samples=2000, seed=1)
        assert rep.monte_carlo_relative_sigma < 1e-10

    def test_dut_a_like(self):
        # p = 0.1141 for this f_open
        rep = monte_carlo_reactance("capacitor", 3.41e9, 3.897924e9, 1, 50.0, 0.0014, n_samples=100_000, seed=3)
        assert rep.analytic_relative_sigma == pytest.approx(0.0109, abs=1e-4)
        assert rep.ratio == pytest.approx(1.0, abs=0.1)

    @pytest.mark.parametrize("p_target", [0.02, 0.05, 0.1, 0.2, 0.3, 0.45])
    @pytest.mark.parametrize("rel", [1e-3, 1e-2])
    def test_reactance_validity_region(self, p_target, rel):
        # inductive n=0 covers high participation, capacitive n=1 the rest
        f_open = 5e9
        if p_target > 0.17:
            phi = _phi_for_p(p_target, 1e-6, math.pi - 1e-9)
            kind, n = "inductor", 0
        else:
            phi = _phi_for_p(p_target, 1.5 * math.pi, 2 * math.pi - 1e-9)
            kind, n = "capacitor", 1
        f_r = phi * f_open / (2 * math.pi)
        rep = monte_carlo_reactance(kind, f_r, f_open, n, 50.0, rel, n_samples=100_000, seed=11)
        assert rep.ratio == pytest.approx(1.0, abs=0.1)

    @pytest.mark.parametrize("ratio_q", [0.5, 2.0, 4.0])
    @pytest.mark.parametrize("rel", [0.01, 0.05])
    def test_tan_delta_validity_region(self, ratio_q, rel):
        phi = 4.5
        p = participation(phi)
        q_open = 1e5
        q_i = q_open / ratio_q
        assert abs(ratio_q - (1 - p)) > 0.1
        rep = monte_carlo_tan_delta(q_i, q_open, phi, rel, n_samples=100_000, seed=5)
        assert rep.ratio == pytest.approx(1.0, abs=0.1)
        assert not rep.divergent

    def test_near_divergence_flagged(self):
        phi = 4.5
        p = participation(phi)
        q_open = 1e5
        q_i = q_open / (1 - p + 0.02)
        rep = monte_carlo_tan_delta(q_i, q_open, phi, 0.3, n_samples=100_000, seed=5)
        assert rep.divergent
        assert rep.analytic_relative_sigma > 10
        # the log-normal tail is what the first-order formula misses
        assert rep.monte_carlo_relative_std > 1.03 * rep.analytic_relative_sigma

    def test_deterministic_and_order_free(self):
        a = standard_normals(42, 50_000)
        b = standard_normals(42, 50_000, workers=4)
        c = standard_normals(42, 50_000, order=list(reversed(range(7))))
        assert np.array_equal(a, b)
        assert np.array_equal(a, c)
        assert not np.array_equal(a, standard_normals(43, 50_000))

    def test_bad_order(self):
        with pytest.raises(DomainError):
            standard_normals(1, 100, chunk=10, order=[0, 1])

    def test_dispatch_matches_direct(self):
        model = dict(quantity="reactance", kind="capacitor", f_r=5.25e9, f_open=7e9, n=1, z0=50.0, rel_sigma_f_open=1e-3)
        a = monte_carlo_uncertainty(model, n_samples=5000, seed=9)
        b = monte_carlo_uncertainty(model, n_samples=5000, seed=9, workers=3)
        assert a == b
        assert a.monte_carlo_relative_sigma == monte_carlo_reactance(
            "capacitor", 5.25e9, 7e9, 1, 50.0, 1e-3, n_samples=5000, seed=9
        ).monte_carlo_relative_sigma

    def test_unknown_quantity(self):
        with pytest.raises(DomainError):
            monte_carlo_uncertainty({"quantity": "mass"})

    def test_too_few_samples(self):
        with pytest.raises(DomainError):
            monte_carlo_reactance("capacitor", 5.25e9, 7e9, 1, 50.0, 1e-3, n_samples=10)

    def test_robust_sigma_of_normal(self, rng):
        assert robust_sigma(rng.normal(0, 2.0, 200_000)) == pytest.approx(2.0, rel=0.01, abs=0)


def _phi_for_p(p, lo, hi):
    return brentq(lambda x: participation(x) - p, lo, hi)


class TestLogNormal:
    def test_recovery(self, rng):
        x = rng.lognormal(mean=math.log(1.48e5), sigma=0.3, size=10_000)
        fit = fit_lognormal(x)
        se_mu = 0.3 / math.sqrt(10_000)
        se_sigma = 0.3 / math.sqrt(2 * 10_000)
        assert abs(fit.mu - math.log(1.48e5)) < 3 * se_mu
        assert abs(fit.sigma - 0.3) < 3 * se_sigma
        assert fit.median == pytest.approx(math.exp(fit.mu))

    def test_degenerate(self):
        fit = fit_lognormal([2.0, 2.0, 2.0])
        assert fit.sigma == 0.0
        assert fit.degenerate

    def test_too_few(self):
        with pytest.raises(DomainError):
            fit_lognormal([1.0, 2.0])

    def test_nonpositive(self):
        with pytest.raises(DomainError):
            fit_lognormal([1.0, -2.0, 3.0])


class TestSingleModeDistribution:
    def test_collapses_on_true_reference(self):
        phi, t, q0 = 5.4955, 5e-6, 1.5e5
        q_i = qi_forward(phi, t, AttenuationModel(q0)).q_i
        d = single_mode_tand_distribution(q_i, phi, [q0] * 5)
        assert d.median == pytest.approx(t, rel=1e-12, abs=0)
        assert d.iqr[1] - d.iqr[0] == pytest.approx(0.0, abs=1e-20)
        assert d.fraction_negative == 0.0

    def test_narrow_reference(self, rng):
        phi, q0 = 5.4955, 1.48e5
        d = single_mode_tand_distribution(2.103e5, phi, q0 * np.exp(1e-9 * rng.standard_normal(1000)))
        assert d.median == pytest.approx(tan_delta_single_mode(2.103e5, q0, phi), rel=1e-6, abs=0)

    def test_dut_a_like(self, rng):
        phi = 2 * math.pi * 3.410e9 / 3.941e9
        q_open = 1.48e5 * np.exp(0.3 * rng.standard_normal(20_000))
        d = single_mode_tand_distribution(2.103e5, phi, q_open)
        width = d.iqr[1] - d.iqr[0]
        assert 3e-6 < width < 3e-5
        assert 1e-6 < abs(d.median) < 1e-4
        assert 0 < d.fraction_negative < 1

    def test_too_few(self):
        with pytest.raises(DomainError):
            single_mode_tand_distribution(1e5, 4.5, [1e5, 1e5])


class TestKappaFit:
    @staticmethod
    def _points(key):
        return [(d.area_m2, d.thickness_m, getattr(d, key), 0.1) for d in DUTS.values()]

    def test_multimode(self):
        fit = kappa_fit(self._points("c_multi_f"))
        assert fit.kappa == pytest.approx(3.06, abs=0.05)
        assert fit.sigma_kappa == pytest.approx(0.08, abs=0.03)

    def test_single_mode(self):
        fit = kappa_fit(self._points("c_single_f"))
        assert fit.kappa == pytest.approx(3.33, abs=0.05)

    def test_single_exact_point(self):
        a, d = 300e-12, 20e-9
        assert kappa_fit([(a, d, epsilon_0 * a / d, 0.1)]).kappa == pytest.approx(1.0, rel=1e-14, abs=0)

    def test_scale_invariance(self):
        pts = self._points("c_multi_f")
        scaled = [(a * 7.0, d, c * 7.0, s) for a, d, c, s in pts]
        assert kappa_fit(scaled).kappa == pytest.approx(kappa_fit(pts).kappa, rel=1e-12, abs=0)

    def test_empty(self):
        with pytest.raises(DomainError):
            kappa_fit([])

    def test_nonpositive(self):
        with pytest.raises(DomainError):
            kappa_fit([(1e-10, 0.0, 1e-13, 0.1)])
