import numpy as np
import pytest
from scipy.constants import epsilon_0
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from tlres import AttenuationModel, DomainError, LineSpec, LoadModel, notch_model, qi_forward, solve_resonance
from tlres.estimators import (
    KappaRegressor,
    LogNormalQDistribution,
    MultimodeCalibrator,
    NotchFitter,
    check_mode_table,
    modes_from_table,
)
from tlres.reference_data import DUTS

DUT_A_TABLE = np.array([[1, 3.410e9, 2.103e5], [2, 6.927e9, 2.215e5]])


class TestModeTable:
    def test_two_columns(self):
        modes = modes_from_table(DUT_A_TABLE[:, :2])
        assert [m.q_i for m in modes] == [None, None]

    def test_nan_q_means_unmeasured(self):
        table = DUT_A_TABLE.copy()
        table[1, 2] = np.nan
        assert modes_from_table(table)[1].q_i is None

    def test_rejects_wrong_width(self):
        with pytest.raises(DomainError):
            check_mode_table(np.ones((2, 4)))

    def test_rejects_fractional_mode(self):
        with pytest.raises(DomainError):
            check_mode_table([[1.5, 3e9], [2, 6e9]])

    def test_rejects_nan_frequency(self):
        with pytest.raises(DomainError):
            check_mode_table([[1, np.nan], [2, 6e9]])

    def test_rejects_single_row(self):
        with pytest.raises(ValueError):
            check_mode_table([[1, 3e9]])


class TestMultimodeCalibrator:
    def test_dut_a(self):
        est = MultimodeCalibrator().fit(DUT_A_TABLE)
        assert est.f_open_ == pytest.approx(3.8979e9, rel=1e-4, abs=0)
        assert est.load_value_ == pytest.approx(388e-15, abs=2e-15)
        assert est.tan_delta_ == pytest.approx(5.6e-6, rel=0.05, abs=0)
        assert est.n_modes_in_ == 2

    def test_predict_reproduces_input(self):
        est = MultimodeCalibrator().fit(DUT_A_TABLE)
        assert est.predict([1, 2]) == pytest.approx([3.410e9, 6.927e9], rel=1e-12, abs=0)

    def test_predict_third_mode_is_higher(self):
        est = MultimodeCalibrator().fit(DUT_A_TABLE)
        f3 = est.predict(3)[0]
        assert 6.927e9 < f3 < 3 * est.f_open_

    def test_without_q(self):
        est = MultimodeCalibrator().fit(DUT_A_TABLE[:, :2])
        assert est.loss_ is None
        assert np.isnan(est.tan_delta_)

    def test_get_params_and_clone(self):
        est = MultimodeCalibrator(z0=75.0, kind="inductor", exponent_s=0.0)
        assert est.get_params() == {"z0": 75.0, "kind": "inductor", "exponent_s": 0.0}
        c = clone(est)
        assert c.get_params() == est.get_params()
        assert not hasattr(c, "f_open_")

    def test_not_fitted(self):
        with pytest.raises(NotFittedError):
            MultimodeCalibrator().predict([1])

    def test_synthetic_inductor(self):
        line = LineSpec(50.0, 6e9)
        load = LoadModel.inductor(300e-12)
        table = [[n, solve_resonance(load, line, n).f_r] for n in (1, 2, 3)]
        est = MultimodeCalibrator(kind="inductor").fit(table)
        assert est.load_value_ == pytest.approx(300e-12, rel=1e-9, abs=0)
        assert est.f_open_ == pytest.approx(6e9, rel=1e-9, abs=0)


class TestNotchFitter:
    def test_fit_and_predict(self):
        f = np.linspace(5e9 * (1 - 1e-3), 5e9 * (1 + 1e-3), 1001)
        s21 = notch_model(f, 5e9, 1e4, 2e4, 0.1, 0.8, 0.4, 20e-9)
        est = NotchFitter().fit(f, s21)
        assert est.f_r_ == pytest.approx(5e9, rel=1e-8, abs=0)
        assert est.q_internal_ == pytest.approx(1 / (1e-4 - np.cos(0.1) / 2e4), rel=1e-4)
        assert np.allclose(est.predict(f), s21, atol=1e-6)

    def test_length_mismatch(self):
        with pytest.raises(DomainError):
            NotchFitter().fit(np.linspace(1e9, 2e9, 20), np.ones(19))

    def test_dielectric_loss_recovered(self):
        # internal Q from a fitted trace maps back to the loss tangent through the forward model
        phi, q0 = 5.0, 1.5e5
        q_i = qi_forward(phi, 5e-6, AttenuationModel(q0)).q_i
        f = np.linspace(4e9 * (1 - 20 / q_i), 4e9 * (1 + 20 / q_i), 2001)
        q_l = 1 / (1 / q_i + 1 / q_i)
        est = NotchFitter().fit(f, notch_model(f, 4e9, q_l, q_i))
        assert est.q_internal_ == pytest.approx(q_i, rel=1e-4, abs=0)


class TestKappaRegressor:
    @staticmethod
    def _data(key):
        X = np.array([[d.area_m2, d.thickness_m] for d in DUTS.values()])
        y = np.array([getattr(d, key) for d in DUTS.values()])
        return X, y

    def test_multimode(self):
        est = KappaRegressor().fit(*self._data("c_multi_f"))
        assert est.kappa_ == pytest.approx(3.06, abs=0.05)
        assert est.sigma_kappa_ > 0

    def test_single_mode(self):
        est = KappaRegressor().fit(*self._data("c_single_f"))
        assert est.kappa_ == pytest.approx(3.33, abs=0.05)

    def test_predict_is_parallel_plate(self):
        X, y = self._data("c_multi_f")
        est = KappaRegressor().fit(X, y)
        assert est.predict(X) == pytest.approx(est.kappa_ * epsilon_0 * X[:, 0] / X[:, 1])

    def test_score_on_exact_data(self):
        X = np.array([[300e-12, 20e-9], [440e-12, 30e-9], [100e-12, 10e-9]])
        y = 3.0 * epsilon_0 * X[:, 0] / X[:, 1]
        est = KappaRegressor().fit(X, y)
        assert est.kappa_ == pytest.approx(3.0, rel=1e-12, abs=0)
        assert est.score(X, y) == pytest.approx(1.0)

    def test_bad_shape(self):
        with pytest.raises(DomainError):
            KappaRegressor().fit(np.ones((3, 3)), np.ones(3))


class TestLogNormalQDistribution:
    def test_fit_and_sample(self, rng):
        q = 1.48e5 * np.exp(0.3 * rng.standard_normal(20_000))
        est = LogNormalQDistribution().fit(q)
        assert est.sigma_ == pytest.approx(0.3, abs=0.01)
        assert np.exp(est.mu_) == pytest.approx(1.48e5, rel=0.01, abs=0)
        a = est.sample(1000, random_state=4)
        b = est.sample(1000, random_state=4)
        assert np.array_equal(a, b)
        assert np.all(a > 0)

    def test_tan_delta_distribution(self, rng):
        q = 1.48e5 * np.exp(0.3 * rng.standard_normal(20_000))
        est = LogNormalQDistribution().fit(q)
        phi = 2 * np.pi * 3.410e9 / 3.941e9
        d = est.tan_delta_distribution(2.103e5, phi)
        assert d.iqr[0] < d.median < d.iqr[1]
        assert 0 < d.fraction_negative < 1

    def test_too_few(self):
        with pytest.raises(ValueError):
            LogNormalQDistribution().fit([1e5, 2e5])
