"""Notch-type resonator fitting in the complex plane.

The trace model is

    S21 = a e^{j alpha} e^{-2 pi j f tau} [1 - (Q_l/|Q_c|) e^{j phi0} / (1 + 2j Q_l (f/f_r - 1))]

The pipeline removes the cable delay, fits a circle algebraically, fits the
phase around the circle centre, then normalizes by the off-resonance point.
Q_i uses the diameter-corrected form 1/Q_i = 1/Q_l - cos(phi0)/|Q_c|.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares, minimize_scalar

from .exceptions import DegenerateGeometryError, DomainError, FitError, LowConfidenceWarning
from .netsynth import ComplexTrace

# relative circle residual above which the delay search is considered failed
DELAY_FAIL_RESIDUAL = 0.1
# notch diameter must exceed this many noise floors
DEPTH_NOISE_FACTOR = 3.0


@dataclass(frozen=True)
class CircleGeometry:
    center: complex
    radius: float

    def residuals(self, points):
        return np.abs(np.asarray(points) - self.center) - self.radius


@dataclass(frozen=True)
class NotchFitResult:
    f_r: float
    q_loaded: float
    q_coupling_mag: float
    impedance_mismatch_phi0: float
    q_internal: float
    amplitude_a: float
    phase_alpha: float
    delay_tau: float
    fit_residual: float
    noise_floor: float = 0.0
    flags: tuple = ()

    @property
    def low_confidence(self):
        return bool(self.flags)

    @property
    def q_coupling(self):
        """Real part of the complex coupling Q, |Q_c| / cos(phi0)."""
        return self.q_coupling_mag / math.cos(self.impedance_mismatch_phi0)


def notch_model(freqs, f_r, q_loaded, q_coupling_mag, phi0=0.0, a=1.0, alpha=0.0, tau=0.0):
    f = np.asarray(freqs, dtype=float)
    env = a * np.exp(1j * alpha) * np.exp(-2j * np.pi * f * tau)
    return env * (1 - (q_loaded / q_coupling_mag) * np.exp(1j * phi0) / (1 + 2j * q_loaded * (f / f_r - 1)))


def fit_circle(points):
    """Algebraic (Taubin) circle fit through complex ``points``."""
    z = np.asarray(points, dtype=complex).ravel()
    if z.size < 3:
        raise DegenerateGeometryError("need at least three points")
    if not np.all(np.isfinite(z)):
        raise DomainError("points must be finite")
    centroid = z.mean()
    x, y = (z - centroid).real, (z - centroid).imag
    sv = np.linalg.svd(np.column_stack([x, y]), compute_uv=False)
    if sv[0] == 0 or sv[1] <= 1e-12 * sv[0]:
        raise DegenerateGeometryError("points are collinear")

    zz = x * x + y * y
    zmean = zz.mean()
    z0 = (zz - zmean) / (2.0 * math.sqrt(zmean))
    _, _, vt = np.linalg.svd(np.column_stack([z0, x, y]), full_matrices=False)
    a0, a1, a2 = vt[-1]
    a0 = a0 / (2.0 * math.sqrt(zmean))
    a3 = -zmean * a0
    if abs(a0) < 1e-14 * math.hypot(a1, a2):
        raise DegenerateGeometryError("fitted circle has unbounded radius")
    center = complex(-a1 / (2 * a0), -a2 / (2 * a0)) + centroid
    radius = math.sqrt(a1 * a1 + a2 * a2 - 4 * a0 * a3) / (2 * abs(a0))
    return CircleGeometry(center, radius)


def _circle_residual(z):
    """Absolute rms distance to the best circle, and that circle's radius.

    The absolute value is the delay-search objective: a relative residual
    would reward wrong delays, which smear a small notch circle along a
    large arc centred on the origin.
    """
    try:
        c = fit_circle(z)
    except DegenerateGeometryError:
        return math.inf, math.nan
    return float(np.sqrt(np.mean(c.residuals(z) ** 2))), c.radius


def _phase_slope_delay(f, z):
    """Delay from a straight-line fit to the unwrapped phase of the outer wings."""
    k = max(2, len(f) // 10)
    idx = np.r_[0:k, len(f) - k:len(f)]
    ph = np.unwrap(np.angle(z))
    slope = np.polyfit(f[idx] - f.mean(), ph[idx], 1)[0]
    return -slope / (2 * np.pi)


def estimate_delay(trace: ComplexTrace, grid=41, zoom_levels=6):
    """Return ``(tau, relative_residual, fell_back)``."""
    f, z = trace.freqs, trace.s21
    if len(f) < 10:
        raise DomainError("need at least 10 points to estimate the delay")
    span = f[-1] - f[0]
    fc = f.mean()
    tau0 = _phase_slope_delay(f, z)

    def corrected(tau):
        return z * np.exp(2j * np.pi * (f - fc) * tau)

    def cost(tau):
        return _circle_residual(corrected(tau))[0]

    # Far from the true delay the residual is a flat plateau; the valley
    # narrows with the circle radius. Probe log-spaced offsets around the
    # phase-slope seed, then zoom a linear grid tenfold per level.
    outer = 0.5 / span
    offsets = np.logspace(math.log10(outer) - 12, math.log10(outer), 97)
    cands = np.sort(np.r_[tau0 - offsets, tau0, tau0 + offsets])
    costs = np.array([cost(t) for t in cands])
    i = int(np.argmin(costs))
    tau, best = float(cands[i]), float(costs[i])
    half = max(cands[min(i + 1, cands.size - 1)] - tau, tau - cands[max(i - 1, 0)])
    for _ in range(zoom_levels):
        taus = tau + np.linspace(-half, half, grid)
        costs = np.array([cost(t) for t in taus])
        i = int(np.argmin(costs))
        if costs[i] < best:
            tau, best = float(taus[i]), float(costs[i])
        half *= 4.0 / (grid - 1)
    res = minimize_scalar(cost, bounds=(tau - half, tau + half), method="bounded",
                          options={"xatol": 1e-3 * half})
    if res.fun < best:
        tau = float(res.x)
    rms, radius = _circle_residual(corrected(tau))
    rel = rms / radius if radius > 0 else math.inf
    if not rel <= DELAY_FAIL_RESIDUAL:
        return float(tau0), rel, True
    return tau, rel, False


def remove_delay(trace: ComplexTrace):
    """Strip the cable delay; returns the corrected trace and tau."""
    tau, _, fell_back = estimate_delay(trace)
    if fell_back:
        warnings.warn(
            "delay search did not find a circular locus; using the phase-slope estimate",
            LowConfidenceWarning,
            stacklevel=2,
        )
    return ComplexTrace(trace.freqs, trace.s21 * np.exp(2j * np.pi * trace.freqs * tau)), tau


def noise_rms(z):
    """Complex rms noise per point from robust second differences.

    A second difference of complex Gaussian noise has mean square 6x the
    per-point mean square and an exponential distribution, so the median
    of its squared modulus is 6 ln 2 times the noise power. Smooth signal
    contributes only where the trace curves sharply, which the median ignores.
    """
    z = np.asarray(z, dtype=complex)
    if z.size < 3:
        return 0.0
    d2 = z[2:] - 2 * z[1:-1] + z[:-2]
    return float(math.sqrt(np.median(np.abs(d2) ** 2) / (6 * math.log(2))))


def _wrap(x):
    return np.angle(np.exp(1j * x))


def fit_phase(freqs, z_centered):
    """Fit theta(f) = theta0 + 2 arctan(2 Q_l (1 - f/f_r)); returns (theta0, q_l, f_r, result)."""
    f = np.asarray(freqs, dtype=float)
    theta = np.unwrap(np.angle(z_centered))
    # seed at the steepest point of a lightly smoothed phase
    k = max(1, len(f) // 200)
    kernel = np.ones(2 * k + 1) / (2 * k + 1)
    slope = np.convolve(np.gradient(theta, f), kernel, mode="same")
    i = int(np.argmax(np.abs(slope[k:-k] if len(f) > 2 * k + 2 else slope))) + (k if len(f) > 2 * k + 2 else 0)
    f0 = f[i]
    q0 = max(abs(slope[i]) * f0 / 4.0, 1.0)
    th0 = theta[i]
    lw = f0 / q0

    def model(p):
        th, logq, df = p
        fr = f0 + df * lw
        return th + 2 * np.arctan(2 * np.exp(logq) * (1 - f / fr))

    def resid(p):
        return _wrap(theta - model(p))

    res = least_squares(resid, [th0, math.log(q0), 0.0], method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15,
                        max_nfev=2000)
    th, logq, df = res.x
    return float(th), float(math.exp(logq)), float(f0 + df * lw), res


def fit_notch(trace: ComplexTrace):
    """Full notch fit with delay removal and diameter correction."""
    f = trace.freqs
    tau, delay_res, fell_back = estimate_delay(trace)
    flags = []
    if fell_back:
        flags.append("delay_fallback")
    z = trace.s21 * np.exp(2j * np.pi * f * tau)

    circle = fit_circle(z)
    theta0, q_l, f_r, res = fit_phase(f, z - circle.center)
    diagnostics = {
        "status": int(res.status),
        "message": str(res.message),
        "nfev": int(res.nfev),
        "delay_residual": delay_res,
    }
    if not res.success or not (np.isfinite(q_l) and np.isfinite(f_r)) or q_l <= 0:
        raise FitError("phase fit did not converge", diagnostics)
    if not f[0] <= f_r <= f[-1]:
        raise FitError("fitted resonance lies outside the sweep", diagnostics)

    p_off = circle.center + circle.radius * np.exp(1j * (theta0 + np.pi))
    a, alpha = abs(p_off), float(np.angle(p_off))
    zc_n = circle.center / p_off
    r_n = circle.radius / a
    phi0 = -math.asin(max(-1.0, min(1.0, zc_n.imag / r_n)))
    q_c = q_l / (2 * r_n)
    q_i_inv = 1.0 / q_l - math.cos(phi0) / q_c

    residual = float(np.sqrt(np.mean(circle.residuals(z) ** 2)))
    noise = noise_rms(z) / a
    if not 2 * r_n > DEPTH_NOISE_FACTOR * noise:
        flags.append("shallow_notch")
    if q_i_inv <= 0:
        flags.append("nonpositive_internal_loss")
    q_i = 1.0 / q_i_inv if q_i_inv != 0 else math.inf

    return NotchFitResult(
        f_r=f_r,
        q_loaded=q_l,
        q_coupling_mag=q_c,
        impedance_mismatch_phi0=phi0,
        q_internal=q_i,
        amplitude_a=a,
        phase_alpha=alpha,
        delay_tau=tau,
        fit_residual=residual,
        noise_floor=noise,
        flags=tuple(flags),
    )
