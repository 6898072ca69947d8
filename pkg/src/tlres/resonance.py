"""Resonance condition, participation ratio and stored energies.

A line of impedance ``z0`` whose open-ended fundamental is ``f_open`` is
terminated by a reactance X. Mode ``n`` resonates at

    f_r = (arctan(z0 / X) / pi + n) * f_open

with the principal arctan. Capacitive modes sit in ((n - 1/2), n) * f_open,
inductive modes in (n, n + 1/2) * f_open.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .exceptions import (
    DomainError,
    InaccessibleModeWarning,
    SingularInputError,
    UnphysicalModeError,
)
from .txline import LineSpec, LoadKind, LoadModel, reactance, reflection_coefficient

# inductive n = 0 solutions below f_open * MIN_FREQ_FRACTION are flagged
MIN_FREQ_FRACTION = 0.01


@dataclass(frozen=True)
class ResonanceSolution:
    mode_n: int
    f_r: float
    phi: float
    participation: float
    x_at_resonance: float
    load: LoadModel
    line: LineSpec

    @property
    def residual(self):
        """Resonance-condition residual f_r/f_open - n - arctan(z0/X)/pi at the solution."""
        return (
            self.f_r / self.line.f_open
            - self.mode_n
            - math.atan(self.line.z0 / self.x_at_resonance) / math.pi
        )


@dataclass(frozen=True)
class StandingWaveProfile:
    """Lossless standing wave along the line.

    ``positions`` are z/l in [-1, 0] with the DUT at -1 and the coupling
    end at 0. Voltage is normalized to the forward amplitude, current is
    multiplied by z0.
    """

    positions: np.ndarray
    voltage: np.ndarray
    current: np.ndarray


@dataclass(frozen=True)
class EnergyBreakdown:
    """Time-averaged energies in units of |V0+|^2 (1 + |Gamma|^2) / (8 f_open z0)."""

    w_res_electric: float
    w_res_magnetic: float
    w_dut: float

    @property
    def total(self):
        return self.w_res_electric + self.w_res_magnetic + self.w_dut

    @property
    def participation(self):
        return self.w_dut / self.total


@dataclass(frozen=True)
class MaxParticipation:
    phi_star: float
    p_max: float
    attained: bool = True


@dataclass(frozen=True)
class DesignPoint:
    load: LoadModel
    phi_star: float
    p_max: float
    rule_of_thumb_load: LoadModel
    rule_of_thumb_p: float


def _check_mode(n):
    if int(n) != n:
        raise DomainError(f"mode index must be an integer, got {n}")
    return int(n)


def mode_frequency_from_reactance(x, z0, f_open, n):
    """Resonant frequency for a frequency-independent reactance ``x``."""
    n = _check_mode(n)
    if x == 0:
        raise SingularInputError("x = 0 is the short-circuit boundary between mode indices")
    f = (math.atan(z0 / x) / math.pi + n) * f_open
    if not f > 0:
        raise UnphysicalModeError(
            f"mode n={n} with x={x:g} requires a non-positive resonant frequency"
        )
    return f


def reactance_from_frequencies(f_r, f_open, n, z0):
    """Invert the resonance condition: X = z0 / tan(pi (f_r/f_open - n))."""
    n = _check_mode(n)
    u = f_r / f_open - n
    if not -0.5 < u < 0.5 or u == 0:
        raise SingularInputError(
            f"f_r/f_open - n = {u:g} is outside (-1/2, 1/2) or at the open-circuit point"
        )
    return z0 / math.tan(math.pi * u)


def phase_parameter(f_r, f_open):
    """phi = 2 pi f_r / f_open."""
    if not (f_r > 0 and f_open > 0):
        raise DomainError("frequencies must be positive")
    return 2.0 * math.pi * f_r / f_open


def participation(phi):
    """Fraction of stored energy in the DUT, |sin phi| / (phi + |sin phi|)."""
    phi = np.asarray(phi, dtype=float)
    if np.any(~(phi > 0)):
        raise DomainError("phi must be positive")
    s = np.abs(np.sin(phi))
    p = s / (phi + s)
    return float(p) if p.ndim == 0 else p


def _mode_brackets(load, line, n):
    """Sub-intervals of ((n-1/2), (n+1/2)) f_open on which X keeps one sign."""
    lo, hi = (n - 0.5) * line.f_open, (n + 0.5) * line.f_open
    if load.kind is LoadKind.CAPACITOR:
        return [(lo, n * line.f_open)]
    if load.kind is LoadKind.INDUCTOR:
        return [(n * line.f_open, hi)]

    # series composite: X is increasing in f, so at most one sign change
    lo = max(lo, 1e-9 * line.f_open)
    x_lo, x_hi = reactance(load, lo), reactance(load, hi)
    if x_lo >= 0:
        return [(n * line.f_open, hi)]
    if x_hi <= 0:
        return [(lo, n * line.f_open)]
    f_s = brentq(lambda f: reactance(load, f), lo, hi, xtol=1e-15 * hi, rtol=1e-15)
    brackets = []
    if f_s > lo:
        brackets.append((lo, min(f_s, n * line.f_open)))
    if f_s < hi:
        brackets.append((max(f_s, n * line.f_open), hi))
    return [(a, b) for a, b in brackets if b > a]


def solve_resonance(load: LoadModel, line: LineSpec, n: int, *, min_freq=None):
    """Resonant frequency of mode ``n`` with the frequency-dependent load reactance."""
    n = _check_mode(n)
    if n < 0:
        raise UnphysicalModeError("mode index must be non-negative")
    if n == 0 and load.kind is LoadKind.CAPACITOR:
        raise UnphysicalModeError(
            "capacitive n=0 would need a negative resonant frequency"
        )
    f_open, z0 = line.f_open, line.z0

    def h(f):
        return f / f_open - n - math.atan(z0 / reactance(load, f)) / math.pi

    roots = []
    for lo, hi in _mode_brackets(load, line, n):
        # nudge inward so X never hits its 0 / infinity endpoints exactly
        a = max(lo, 1e-12 * f_open) * (1 + 1e-15)
        b = hi * (1 - 1e-15)
        ha, hb = h(a), h(b)
        if ha == 0:
            roots.append(a)
            continue
        if hb == 0:
            roots.append(b)
            continue
        if ha * hb > 0:
            continue
        roots.append(brentq(h, a, b, xtol=1e-300, rtol=1e-15, maxiter=500))

    if not roots:
        raise UnphysicalModeError(f"no resonance for mode n={n} with load {load}")
    if len(roots) > 1:
        warnings.warn(
            f"series load has {len(roots)} resonances labelled n={n}; returning the lowest",
            UserWarning,
            stacklevel=2,
        )
    f_r = min(roots)

    threshold = MIN_FREQ_FRACTION * f_open if min_freq is None else min_freq
    if n == 0 and f_r < threshold:
        warnings.warn(
            f"n=0 inductive mode at {f_r:.4g} Hz is experimentally inaccessible",
            InaccessibleModeWarning,
            stacklevel=2,
        )

    phi = phase_parameter(f_r, f_open)
    return ResonanceSolution(
        mode_n=n,
        f_r=f_r,
        phi=phi,
        participation=participation(phi),
        x_at_resonance=reactance(load, f_r),
        load=load,
        line=line,
    )


def standing_wave(solution: ResonanceSolution, num_points=201):
    """Voltage and current along the lossless line at resonance."""
    if num_points < 2:
        raise DomainError("num_points must be at least 2")
    z0 = solution.line.z0
    gamma = reflection_coefficient(1j * solution.x_at_resonance, z0)
    positions = np.linspace(-1.0, 0.0, num_points)
    # beta * (distance from the DUT)
    bd = math.pi * solution.f_r / solution.line.f_open * (positions + 1.0)
    fwd = np.exp(1j * bd)
    back = gamma * np.exp(-1j * bd)
    return StandingWaveProfile(positions, fwd + back, fwd - back)


def stored_energies(solution: ResonanceSolution):
    r = math.sin(solution.phi) / solution.phi
    return EnergyBreakdown(1.0 + r, 1.0 - r, 2.0 * abs(r))


def _stationary_phi(lo):
    # phi cos(phi) = sin(phi) has exactly one root in (lo, lo + pi/2) for lo = k pi, k >= 1
    g = lambda phi: phi * math.cos(phi) - math.sin(phi)  # noqa: E731
    return brentq(g, lo, lo + 0.5 * math.pi, xtol=1e-15, rtol=1e-15)


def max_participation_point(n, kind):
    """Stationary point of the participation ratio on branch ``n``."""
    n = _check_mode(n)
    kind = LoadKind.parse(kind)
    if kind is LoadKind.CAPACITOR:
        if n < 1:
            raise UnphysicalModeError("capacitive branches start at n=1")
        phi = _stationary_phi((2 * n - 1) * math.pi)
    elif kind is LoadKind.INDUCTOR:
        if n < 0:
            raise UnphysicalModeError("mode index must be non-negative")
        if n == 0:
            # monotone branch; p -> 1/2 as phi -> 0 but never reaches it
            return MaxParticipation(phi_star=0.0, p_max=0.5, attained=False)
        phi = _stationary_phi(2 * n * math.pi)
    else:
        raise DomainError("max participation is defined for pure capacitors or inductors")
    return MaxParticipation(phi, participation(phi))


def _load_from_reactance(kind, x, f, tan_delta=0.0):
    w = 2.0 * math.pi * f
    if kind is LoadKind.CAPACITOR:
        return LoadModel.capacitor(-1.0 / (w * x), tan_delta)
    return LoadModel.inductor(x / w, tan_delta)


def design_load_for_max_p(line: LineSpec, n, kind, tan_delta=0.0):
    """Load value whose resonance lands on the exact max-participation phase.

    The |X| = z0 rule of thumb is returned alongside for comparison.
    """
    kind = LoadKind.parse(kind)
    best = max_participation_point(n, kind)
    if not best.attained:
        raise UnphysicalModeError("branch has no attained participation maximum")
    f_star = best.phi_star / (2.0 * math.pi) * line.f_open
    x_star = reactance_from_frequencies(f_star, line.f_open, n, line.z0)
    exact = _load_from_reactance(kind, x_star, f_star, tan_delta)

    if kind is LoadKind.CAPACITOR:
        f_rot, x_rot = (n - 0.25) * line.f_open, -line.z0
    else:
        f_rot, x_rot = (n + 0.25) * line.f_open, line.z0
    rule = _load_from_reactance(kind, x_rot, f_rot, tan_delta)
    return DesignPoint(
        load=exact,
        phi_star=best.phi_star,
        p_max=best.p_max,
        rule_of_thumb_load=rule,
        rule_of_thumb_p=participation(phase_parameter(f_rot, line.f_open)),
    )


def load_from_solution(kind, f_r, f_open, n, z0, tan_delta=0.0):
    """Capacitance or inductance implied by a measured mode and a known f_open."""
    x = reactance_from_frequencies(f_r, f_open, n, z0)
    kind = LoadKind.parse(kind)
    if (x < 0) != (kind is LoadKind.CAPACITOR):
        raise SingularInputError(
            f"mode at f_r/f_open={f_r / f_open:.6f} implies X={x:.4g}, not a {kind.value}"
        )
    return _load_from_reactance(kind, x, f_r, tan_delta)
