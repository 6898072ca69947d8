"""Estimator-style wrappers (fit / predict / get_params) over the functional API."""

from __future__ import annotations

import numpy as np
from scipy.constants import epsilon_0
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_random_state

from .calibrate import ModeMeasurement, calibrate_loss, calibrate_reactance
from .circlefit import fit_notch, notch_model
from .exceptions import DomainError
from .netsynth import ComplexTrace
from .resonance import solve_resonance
from .stats import fit_lognormal, kappa_fit, single_mode_tand_distribution


def check_mode_table(X):
    """Validate an ``(n_modes, 2 or 3)`` array of (mode_n, f_r_hz[, q_i])."""
    X = check_array(X, dtype=float, ensure_min_samples=2, ensure_all_finite="allow-nan")
    if X.shape[1] not in (2, 3):
        raise DomainError("mode table needs columns (mode_n, f_r_hz[, q_i])")
    if np.any(np.isnan(X[:, :2])):
        raise DomainError("mode_n and f_r_hz must be finite")
    if np.any(X[:, 0] != np.round(X[:, 0])):
        raise DomainError("mode_n must be integer valued")
    return X


def modes_from_table(X):
    X = check_mode_table(X)
    q = X[:, 2] if X.shape[1] == 3 else np.full(len(X), np.nan)
    return [ModeMeasurement(int(n), float(f), None if np.isnan(qi) else float(qi)) for n, f, qi in zip(X[:, 0], X[:, 1], q)]


class MultimodeCalibrator(BaseEstimator):
    """Self-calibrated f_open, load value and (optionally) tan delta from a mode table."""

    def __init__(self, z0=50.0, kind="capacitor", exponent_s=1.0):
        self.z0 = z0
        self.kind = kind
        self.exponent_s = exponent_s

    def fit(self, X, y=None):
        modes = modes_from_table(X)
        self.reactance_ = calibrate_reactance(modes, z0=self.z0, kind=self.kind)
        self.f_open_ = self.reactance_.f_open
        self.load_value_ = self.reactance_.load_value
        self.loss_ = None
        self.tan_delta_ = np.nan
        self.q_open_ref_ = np.nan
        if all(m.q_i is not None for m in modes):
            self.loss_ = calibrate_loss(modes, self.reactance_, s=self.exponent_s)
            self.tan_delta_ = self.loss_.tan_delta
            self.q_open_ref_ = self.loss_.q_open_ref
        self.n_modes_in_ = len(modes)
        return self

    def predict(self, mode_n):
        """Resonant frequencies of the calibrated device for mode indices ``mode_n``."""
        check_is_fitted(self, "f_open_")
        ns = np.atleast_1d(np.asarray(mode_n))
        return np.array([solve_resonance(self.reactance_.load, self.reactance_.line, int(n)).f_r for n in ns])


class NotchFitter(BaseEstimator):
    """Circle fit of a notch trace; ``predict`` evaluates the fitted model."""

    def fit(self, X, y):
        f = check_array(np.asarray(X, dtype=float).reshape(-1, 1), ensure_min_samples=10).ravel()
        s21 = np.asarray(y, dtype=complex).ravel()
        if s21.shape != f.shape:
            raise DomainError("freqs and s21 must have equal length")
        self.result_ = fit_notch(ComplexTrace(f, s21))
        self.q_internal_ = self.result_.q_internal
        self.f_r_ = self.result_.f_r
        return self

    def predict(self, X):
        check_is_fitted(self, "result_")
        r = self.result_
        f = np.asarray(X, dtype=float).ravel()
        return notch_model(f, r.f_r, r.q_loaded, r.q_coupling_mag, r.impedance_mismatch_phi0,
                           r.amplitude_a, r.phase_alpha, r.delay_tau)


class KappaRegressor(RegressorMixin, BaseEstimator):
    """Dielectric constant from C = kappa * epsilon_0 * A / d, fit through the origin.

    ``X`` columns are (area_m2, thickness_m); ``y`` is capacitance in farad.
    """

    def __init__(self, area_rel_sigma=0.1):
        self.area_rel_sigma = area_rel_sigma

    def fit(self, X, y):
        X = check_array(X, dtype=float)
        y = np.asarray(y, dtype=float).ravel()
        if X.shape[1] != 2 or len(y) != len(X):
            raise DomainError("X must be (n, 2) of (area_m2, thickness_m) with one capacitance per row")
        fit = kappa_fit([(a, d, c, self.area_rel_sigma) for (a, d), c in zip(X, y)])
        self.fit_ = fit
        self.kappa_ = fit.kappa
        self.sigma_kappa_ = fit.sigma_kappa
        return self

    def predict(self, X):
        check_is_fitted(self, "kappa_")
        X = check_array(X, dtype=float)
        return self.kappa_ * epsilon_0 * X[:, 0] / X[:, 1]


class LogNormalQDistribution(BaseEstimator):
    """Log-normal model of reference Q_open values."""

    def fit(self, X, y=None):
        q = check_array(np.asarray(X, dtype=float).reshape(-1, 1), ensure_min_samples=3).ravel()
        fit = fit_lognormal(q)
        self.mu_, self.sigma_ = fit.mu, fit.sigma
        self.samples_ = q
        return self

    def sample(self, n, random_state=None):
        check_is_fitted(self, "mu_")
        rng = check_random_state(random_state)
        return np.exp(self.mu_ + self.sigma_ * rng.standard_normal(n))

    def tan_delta_distribution(self, q_i, phi, s=1.0):
        check_is_fitted(self, "samples_")
        return single_mode_tand_distribution(q_i, phi, self.samples_, s)
