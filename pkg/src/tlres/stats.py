"""Uncertainty propagation, reference-ensemble statistics and the kappa fit."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.constants import epsilon_0

from .exceptions import DivergentUncertaintyError, DomainError
from .loss import tan_delta_single_mode
from .resonance import participation, reactance_from_frequencies
from .txline import LoadKind

CHUNK = 8192
# interquartile range of a unit normal
_IQR_UNIT = 2.0 * 0.6744897501960817


@dataclass(frozen=True)
class UncertaintyReport:
    analytic_relative_sigma: float
    monte_carlo_relative_sigma: float
    n_samples: int
    seed: int
    divergent: bool = False
    monte_carlo_relative_std: float = float("nan")

    @property
    def ratio(self):
        return self.monte_carlo_relative_sigma / self.analytic_relative_sigma


@dataclass(frozen=True)
class LogNormalFit:
    mu: float
    sigma: float
    n: int
    degenerate: bool = False

    @property
    def median(self):
        return math.exp(self.mu)


@dataclass(frozen=True)
class TanDeltaDistribution:
    median: float
    iqr: tuple
    fraction_negative: float
    samples: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class KappaFit:
    kappa: float
    sigma_kappa: float
    points: tuple
    sigma_kappa_unscaled: float = float("nan")


def reactance_value_uncertainty(p, rel_sigma_f_open):
    """Relative uncertainty of C or L from a relative f_open uncertainty."""
    if not 0 < p < 1:
        if p == 0:
            raise DivergentUncertaintyError("zero participation: load value is unconstrained")
        raise DomainError(f"participation must lie in (0, 1), got {p}")
    return (1.0 - p) / p * rel_sigma_f_open


def tan_delta_denominator(p, q_open, q_i):
    return q_open / q_i - (1.0 - p)


def tan_delta_uncertainty(p, q_open, q_i, rel_sigma_q_open):
    """Relative uncertainty of tan delta when the reference Q_open dominates.

    Exact to first order for an attenuation exponent of 1. The denominator
    changes sign where Q_open/Q_i = 1 - p; callers can check
    :func:`tan_delta_denominator` to see how close they are.
    """
    den = tan_delta_denominator(p, q_open, q_i)
    if den == 0:
        raise DivergentUncertaintyError("Q_open/Q_i = 1 - p: tan delta is zero at first order")
    return (1.0 - p) / abs(den) * rel_sigma_q_open


def standard_normals(seed, n, chunk=CHUNK, workers=None, order=None):
    """``n`` standard normals; chunk ``k`` is drawn from ``default_rng([seed, k])``.

    Output is identical for any worker count or chunk evaluation ``order``.
    """
    n_chunks = -(-n // chunk)

    def draw(k):
        size = min(chunk, n - k * chunk)
        return k, np.random.default_rng([int(seed), k]).standard_normal(size)

    ks = list(range(n_chunks)) if order is None else list(order)
    if sorted(ks) != list(range(n_chunks)):
        raise DomainError("order must be a permutation of the chunk indices")
    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = dict(pool.map(draw, ks))
    else:
        parts = dict(map(draw, ks))
    return np.concatenate([parts[k] for k in range(n_chunks)]) if n_chunks else np.empty(0)


def robust_sigma(samples):
    """Normal-equivalent spread from the interquartile range.

    Extracted load values have a pole where the sampled reactance crosses
    zero, so their variance is unbounded; the IQR stays finite.
    """
    q1, q3 = np.percentile(samples, [25, 75])
    return float((q3 - q1) / _IQR_UNIT)


def _reactance_chain(kind, f_r, n, z0, f_open_samples):
    u = f_r / f_open_samples - n
    x = z0 / np.tan(np.pi * u)
    w = 2.0 * np.pi * f_r
    return -1.0 / (w * x) if kind is LoadKind.CAPACITOR else x / w


def monte_carlo_reactance(kind, f_r, f_open, n, z0, rel_sigma_f_open, n_samples=100_000, seed=0, workers=None):
    """Spread of the extracted C or L when f_open is known only to ``rel_sigma_f_open``."""
    if n_samples < 1000:
        raise DomainError("use at least 1000 samples")
    kind = LoadKind.parse(kind)
    nominal_x = reactance_from_frequencies(f_r, f_open, n, z0)
    nominal = float(_reactance_chain(kind, f_r, n, z0, np.array(f_open)))
    if (nominal_x < 0) != (kind is LoadKind.CAPACITOR):
        raise DomainError("mode frequency is on the other load kind's branch")
    p = participation(2.0 * math.pi * f_r / f_open)
    z = standard_normals(seed, n_samples, workers=workers)
    values = _reactance_chain(kind, f_r, n, z0, f_open * (1.0 + rel_sigma_f_open * z))
    return UncertaintyReport(
        analytic_relative_sigma=reactance_value_uncertainty(p, rel_sigma_f_open),
        monte_carlo_relative_sigma=robust_sigma(values) / abs(nominal),
        n_samples=n_samples,
        seed=seed,
        monte_carlo_relative_std=float(np.std(values) / abs(nominal)),
    )


def monte_carlo_tan_delta(q_i, q_open, phi, rel_sigma_q_open, s=1.0, n_samples=100_000, seed=0,
                          workers=None, divergence_margin=0.1):
    """Spread of the single-mode tan delta under a log-normal Q_open reference."""
    if n_samples < 1000:
        raise DomainError("use at least 1000 samples")
    p = participation(phi)
    nominal = tan_delta_single_mode(q_i, q_open, phi, s)
    z = standard_normals(seed, n_samples, workers=workers)
    samples = tan_delta_single_mode(q_i, q_open * np.exp(rel_sigma_q_open * z), phi, s)
    den = tan_delta_denominator(p, q_open, q_i)
    return UncertaintyReport(
        analytic_relative_sigma=tan_delta_uncertainty(p, q_open, q_i, rel_sigma_q_open),
        monte_carlo_relative_sigma=robust_sigma(samples) / abs(nominal),
        n_samples=n_samples,
        seed=seed,
        divergent=abs(den) < divergence_margin,
        monte_carlo_relative_std=float(np.std(samples) / abs(nominal)),
    )


def monte_carlo_uncertainty(model: dict, n_samples=100_000, seed=0, workers=None):
    """Dispatch on ``model["quantity"]``: ``"reactance"`` or ``"tan_delta"``."""
    model = dict(model)
    quantity = model.pop("quantity")
    if quantity == "reactance":
        return monte_carlo_reactance(n_samples=n_samples, seed=seed, workers=workers, **model)
    if quantity == "tan_delta":
        return monte_carlo_tan_delta(n_samples=n_samples, seed=seed, workers=workers, **model)
    raise DomainError(f"unknown quantity {quantity!r}")


def fit_lognormal(samples):
    """Maximum-likelihood log-normal fit."""
    x = np.asarray(samples, dtype=float)
    if x.size < 3:
        raise DomainError("need at least three samples")
    if np.any(~(x > 0)):
        raise DomainError("log-normal samples must be positive")
    logs = np.log(x)
    sigma = float(np.std(logs))
    return LogNormalFit(float(np.mean(logs)), sigma, int(x.size), degenerate=sigma == 0.0)


def single_mode_tand_distribution(q_i, phi, q_open_samples, s=1.0):
    """Pair one measured Q_i with every reference Q_open and summarize the tan delta spread."""
    q_open_samples = np.asarray(q_open_samples, dtype=float)
    if q_open_samples.size < 3:
        raise DomainError("need at least three reference samples")
    t = tan_delta_single_mode(q_i, q_open_samples, phi, s)
    q1, med, q3 = np.percentile(t, [25, 50, 75])
    return TanDeltaDistribution(
        median=float(med),
        iqr=(float(q1), float(q3)),
        fraction_negative=float(np.mean(t < 0)),
        samples=t,
    )


def kappa_fit(points):
    """Dielectric constant from capacitance versus epsilon_0 A / d, through the origin.

    ``points`` holds ``(area_m2, thickness_m, capacitance_f, area_sigma)``
    with ``area_sigma`` a fractional area uncertainty, giving each point a
    capacitance sigma of ``area_sigma * C``. ``sigma_kappa`` is scaled by
    the reduced chi-square when there is more than one point.
    """
    pts = [tuple(float(v) for v in p) for p in points]
    if not pts:
        raise DomainError("need at least one point")
    arr = np.array(pts)
    area, thick, cap, frac = arr.T
    if np.any(area <= 0) or np.any(thick <= 0) or np.any(cap <= 0):
        raise DomainError("areas, thicknesses and capacitances must be positive")
    x = epsilon_0 * area / thick
    sig = np.where(frac > 0, frac * cap, 1.0)
    w = 1.0 / sig**2
    sxx = np.sum(w * x * x)
    kappa = float(np.sum(w * x * cap) / sxx)
    unscaled = float(1.0 / math.sqrt(sxx))
    if len(pts) > 1:
        chi2 = float(np.sum(w * (cap - kappa * x) ** 2))
        scaled = unscaled * math.sqrt(chi2 / (len(pts) - 1))
    else:
        scaled = unscaled
    return KappaFit(kappa, scaled, tuple(pts), unscaled)
