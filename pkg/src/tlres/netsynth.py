"""Cascade-matrix model of a hanger resonator, used as an independent oracle.

The resonator branch (coupling capacitor, lossy line, DUT) is a shunt
element across an ideal matched feedline. Everything is built from 2x2
ABCD matrices evaluated on a frequency grid, shape ``(N, 2, 2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .exceptions import DomainError
from .resonance import solve_resonance
from .txline import LineSpec, LoadModel, load_impedance, reactance


@dataclass(frozen=True)
class HangerNetwork:
    line: LineSpec
    coupling_c: float
    load: LoadModel
    feed_z0: float = 50.0

    def __post_init__(self):
        if not self.coupling_c > 0:
            raise DomainError("coupling_c must be positive")
        if not self.feed_z0 > 0:
            raise DomainError("feed_z0 must be positive")


@dataclass(frozen=True)
class ComplexTrace:
    freqs: np.ndarray
    s21: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.freqs, dtype=float)
        z = np.asarray(self.s21, dtype=complex)
        if f.ndim != 1 or f.shape != z.shape:
            raise DomainError("freqs and s21 must be 1-D arrays of equal length")
        if f.size > 1 and np.any(np.diff(f) <= 0):
            raise DomainError("freqs must be strictly increasing")
        object.__setattr__(self, "freqs", f)
        object.__setattr__(self, "s21", z)

    def __len__(self):
        return self.freqs.size


def abcd_series(z):
    z = np.asarray(z, dtype=complex)
    m = np.zeros(z.shape + (2, 2), dtype=complex)
    m[..., 0, 0] = 1
    m[..., 0, 1] = z
    m[..., 1, 1] = 1
    return m


def abcd_shunt(y):
    y = np.asarray(y, dtype=complex)
    m = np.zeros(y.shape + (2, 2), dtype=complex)
    m[..., 0, 0] = 1
    m[..., 1, 0] = y
    m[..., 1, 1] = 1
    return m


def abcd_line(z0, gamma_l):
    gl = np.asarray(gamma_l, dtype=complex)
    m = np.empty(gl.shape + (2, 2), dtype=complex)
    ch, sh = np.cosh(gl), np.sinh(gl)
    m[..., 0, 0] = ch
    m[..., 0, 1] = z0 * sh
    m[..., 1, 0] = sh / z0
    m[..., 1, 1] = ch
    return m


def cascade(*mats):
    out = mats[0]
    for m in mats[1:]:
        out = out @ m
    return out


def abcd_to_s(m, z0):
    """Full S-matrix, shape ``(..., 2, 2)``, for reference impedance ``z0``."""
    a, b, c, d = m[..., 0, 0], m[..., 0, 1], m[..., 1, 0], m[..., 1, 1]
    den = a + b / z0 + c * z0 + d
    s = np.empty(m.shape, dtype=complex)
    s[..., 0, 0] = (a + b / z0 - c * z0 - d) / den
    s[..., 0, 1] = 2 * (a * d - b * c) / den
    s[..., 1, 0] = 2 / den
    s[..., 1, 1] = (-a + b / z0 - c * z0 + d) / den
    return s


def terminate(m, z_load):
    """Input impedance of a two-port terminated by ``z_load`` (``inf`` = open)."""
    a, b, c, d = m[..., 0, 0], m[..., 0, 1], m[..., 1, 0], m[..., 1, 1]
    z_load = np.asarray(z_load, dtype=complex)
    if np.all(np.isinf(z_load)):
        return a / c
    return (a * z_load + b) / (c * z_load + d)


def input_impedance(line: LineSpec, z_load, f):
    """Impedance looking into the line from the coupling end.

    Equivalent to z0 (Z_L + z0 tanh(gl)) / (z0 + Z_L tanh(gl)) with
    ``gl = alpha*l + j pi f / f_open``. Pass ``np.inf`` for an open end.
    """
    f = np.asarray(f, dtype=float)
    if np.any(~(f > 0)):
        raise DomainError("frequency must be positive")
    with np.errstate(divide="ignore", invalid="ignore"):
        z = terminate(abcd_line(line.z0, line.gamma_length(f)), z_load)
    return complex(z) if z.ndim == 0 else z


def branch_impedance(net: HangerNetwork, f):
    """Coupling capacitor in series with the loaded line."""
    f = np.asarray(f, dtype=float)
    zl = load_impedance(net.load, f)
    m = cascade(
        abcd_series(1.0 / (2j * np.pi * f * net.coupling_c)),
        abcd_line(net.line.z0, net.line.gamma_length(f)),
    )
    return terminate(m, zl)


def network_abcd(net: HangerNetwork, f):
    return abcd_shunt(1.0 / branch_impedance(net, f))


def synth_s21(net: HangerNetwork, freqs):
    freqs = np.asarray(freqs, dtype=float)
    s = abcd_to_s(network_abcd(net, freqs), net.feed_z0)
    return ComplexTrace(freqs, s[..., 1, 0])


def with_environment(trace: ComplexTrace, amplitude=1.0, phase=0.0, delay=0.0):
    """Apply a cable background a * exp(j alpha) * exp(-2 pi j f tau)."""
    env = amplitude * np.exp(1j * phase) * np.exp(-2j * np.pi * trace.freqs * delay)
    return ComplexTrace(trace.freqs, trace.s21 * env)


def notch_frequency(net: HangerNetwork, n=1):
    """Series resonance of the lossless branch nearest to the uncoupled mode ``n``."""
    f_r = solve_resonance(net.load, net.line, n).f_r
    z0, f_open, cc = net.line.z0, net.line.f_open, net.coupling_c

    def g(f):
        # Im(Z_branch) multiplied through by (z0 - X tan(bl)) to remove the pole
        t = math.tan(math.pi * f / f_open)
        x = reactance(net.load, f)
        return -(z0 - x * t) / (2 * math.pi * f * cc) + z0 * (x + z0 * t)

    g_r = g(f_r)
    if g_r == 0:
        return f_r
    # coupling capacitance only pulls the notch downward
    step, hi = 1e-13 * f_r, f_r
    while True:
        lo = f_r - step
        if step > 0.25 * f_open:
            raise DomainError("no notch found below the uncoupled resonance")
        if g(lo) * g_r <= 0:
            break
        hi, step = lo, step * 2
    return brentq(g, lo, hi, xtol=1e-300, rtol=1e-15)


def frequency_pull(net: HangerNetwork, n=1):
    """Notch frequency minus the uncoupled resonance from the analytic solver."""
    return notch_frequency(net, n) - solve_resonance(net.load, net.line, n).f_r


def coupling_for_pull(line: LineSpec, load: LoadModel, rel_pull, n=1):
    """Coupling capacitance giving |pull| / f_r equal to ``rel_pull``."""
    f_r = solve_resonance(load, line, n).f_r

    def excess(log_cc):
        net = HangerNetwork(line, math.exp(log_cc), load)
        return math.log(abs(frequency_pull(net, n)) / f_r) - math.log(rel_pull)

    # pull grows roughly linearly with Cc; walk a decade bracket from 1 fF
    lo = hi = math.log(1e-15)
    while excess(lo) > 0:
        lo -= math.log(10.0)
    while excess(hi) < 0:
        hi += math.log(10.0)
    if lo == hi:
        return math.exp(lo)
    return math.exp(brentq(excess, lo, hi, xtol=1e-9))
