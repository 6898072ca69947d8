"""Multimode self-calibration.

Two or more modes of one loaded line fix both ``f_open`` and the load value
(frequencies), and both ``tan_delta`` and ``Q_open`` (quality factors),
without a separate reference resonator.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, least_squares

from .exceptions import DegenerateModesError, DomainError, KindMismatchError
from .resonance import reactance_from_frequencies
from .txline import LineSpec, LoadKind, LoadModel

DEFAULT_F_R_REL_SIGMA = 1e-6
_SCAN_DECADES = 4
_SCAN_POINTS = 401


@dataclass(frozen=True)
class ModeMeasurement:
    mode_n: int
    f_r: float
    q_i: float | None = None
    f_r_sigma: float | None = None
    q_i_sigma: float | None = None

    def __post_init__(self):
        if int(self.mode_n) != self.mode_n or self.mode_n < 0:
            raise DomainError(f"mode_n must be a non-negative integer, got {self.mode_n}")
        object.__setattr__(self, "mode_n", int(self.mode_n))
        if not self.f_r > 0:
            raise DomainError(f"f_r must be positive, got {self.f_r}")
        if self.q_i is not None and not self.q_i > 0:
            raise DomainError(f"q_i must be positive, got {self.q_i}")


@dataclass(frozen=True)
class ReactanceCalibration:
    f_open: float
    load_value: float
    kind: LoadKind
    z0: float
    residuals: tuple
    covariance: np.ndarray = field(repr=False)

    @property
    def sigma_f_open(self):
        return math.sqrt(self.covariance[0, 0])

    @property
    def sigma_load_value(self):
        return math.sqrt(self.covariance[1, 1])

    @property
    def load(self):
        return LoadModel(self.kind, self.load_value)

    @property
    def line(self):
        return LineSpec(self.z0, self.f_open)


@dataclass(frozen=True)
class LossCalibration:
    tan_delta: float
    q_open_ref: float
    exponent_s: float
    residuals: tuple
    covariance: np.ndarray = field(repr=False)
    condition_number: float = float("nan")

    @property
    def sigma_tan_delta(self):
        return math.sqrt(self.covariance[0, 0])

    @property
    def sigma_q_open_inv(self):
        return math.sqrt(self.covariance[1, 1])


@dataclass(frozen=True)
class ModelFit:
    name: str
    params: dict
    rss: float
    dof: int
    physical: bool


@dataclass(frozen=True)
class ParasiticReport:
    reactances: tuple
    fits: dict
    best: str
    ambiguous: bool


def _as_modes(measurements):
    modes = [m if isinstance(m, ModeMeasurement) else ModeMeasurement(*m) for m in measurements]
    if len(modes) < 2:
        raise DomainError("multimode calibration needs at least two modes")
    if len({m.mode_n for m in modes}) != len(modes):
        raise DomainError("mode indices must be distinct")
    return sorted(modes, key=lambda m: m.mode_n)


def _reactance(kind, value, f):
    w = 2.0 * np.pi * f
    return -1.0 / (w * value) if kind is LoadKind.CAPACITOR else w * value


def _offsets(kind, value, freqs, z0):
    """arctan(z0/X)/pi for each mode, i.e. f_r/f_open - n."""
    return np.arctan(z0 / _reactance(kind, value, freqs)) / np.pi


def _residuals(f_open, kind, value, freqs, ns, z0):
    return freqs / f_open - ns - _offsets(kind, value, freqs, z0)


def _jacobians(f_open, kind, value, freqs, z0):
    """d r_k / d(f_open, value) and d r_k / d f_k."""
    x = _reactance(kind, value, freqs)
    da_dx = -z0 / (np.pi * (x**2 + z0**2))
    dx_dv = -x / value if kind is LoadKind.CAPACITOR else x / value
    dx_df = np.abs(x) / freqs
    jac = np.column_stack([-freqs / f_open**2, -da_dx * dx_dv])
    dr_df = 1.0 / f_open - da_dx * dx_df
    return jac, dr_df


def _scale_value(kind, f, z0):
    # load value whose reactance magnitude equals z0 at f
    w = 2.0 * math.pi * f
    return 1.0 / (w * z0) if kind is LoadKind.CAPACITOR else z0 / w


def _two_mode_solve(kind, m1, m2, z0):
    def implied_f_open(value, m):
        return m.f_r / (m.mode_n + float(_offsets(kind, value, m.f_r, z0)))

    def g(log_v):
        v = math.exp(log_v)
        return implied_f_open(v, m1) - implied_f_open(v, m2)

    center = math.log(_scale_value(kind, m1.f_r, z0))
    span = _SCAN_DECADES * math.log(10.0)
    grid = np.linspace(center - span, center + span, _SCAN_POINTS)
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = np.array([g(t) for t in grid])
    ok = np.isfinite(vals)
    roots = []
    for i in range(len(grid) - 1):
        if ok[i] and ok[i + 1] and vals[i] * vals[i + 1] <= 0:
            if vals[i] == 0:
                roots.append(grid[i])
            elif vals[i + 1] != 0:
                roots.append(brentq(g, grid[i], grid[i + 1], xtol=1e-15, rtol=1e-15))
    roots = [r for r in roots if implied_f_open(math.exp(r), m1) > 0]
    if not roots:
        other = LoadKind.INDUCTOR if kind is LoadKind.CAPACITOR else LoadKind.CAPACITOR
        raise KindMismatchError(
            f"modes {m1.mode_n},{m2.mode_n} admit no {kind.value} solution; try {other.value}",
            suggested_kind=other,
        )
    if len(roots) > 1:
        warnings.warn(f"{len(roots)} candidate solutions; using the first", UserWarning, stacklevel=3)
    value = math.exp(roots[0])
    return implied_f_open(value, m1), value


def _check_branches(kind, f_open, modes):
    other = LoadKind.INDUCTOR if kind is LoadKind.CAPACITOR else LoadKind.CAPACITOR
    for m in modes:
        u = m.f_r / f_open - m.mode_n
        inside = -0.5 < u < 0 if kind is LoadKind.CAPACITOR else 0 < u < 0.5
        if not inside:
            raise KindMismatchError(
                f"mode {m.mode_n} at f_r/f_open={m.f_r / f_open:.6f} is outside the "
                f"{kind.value} branch; try {other.value}",
                suggested_kind=other,
            )


def calibrate_reactance(measurements, z0=50.0, kind="capacitor", *, f_r_rel_sigma=DEFAULT_F_R_REL_SIGMA):
    """Solve for ``f_open`` and the load value from two or more mode frequencies.

    Two modes reduce to a scalar root find after eliminating ``f_open``;
    more modes are refined by least squares from the two lowest. Per-mode
    ``f_r_sigma`` (or ``f_r_rel_sigma * f_r``) is propagated linearly into
    the 2x2 covariance of (f_open, value).
    """
    kind = LoadKind.parse(kind)
    if kind is LoadKind.SERIES:
        raise DomainError("calibrate a pure capacitor or inductor hypothesis")
    modes = _as_modes(measurements)
    if kind is LoadKind.CAPACITOR and modes[0].mode_n < 1:
        raise KindMismatchError("capacitive modes start at n=1", suggested_kind=LoadKind.INDUCTOR)

    f_open, value = _two_mode_solve(kind, modes[0], modes[1], z0)
    freqs = np.array([m.f_r for m in modes])
    ns = np.array([m.mode_n for m in modes], dtype=float)

    if len(modes) > 2:
        def fun(t):
            return _residuals(math.exp(t[0]), kind, math.exp(t[1]), freqs, ns, z0)

        sol = least_squares(fun, [math.log(f_open), math.log(value)], xtol=1e-15, ftol=1e-15, gtol=1e-15)
        f_open, value = math.exp(sol.x[0]), math.exp(sol.x[1])

    _check_branches(kind, f_open, modes)
    res = _residuals(f_open, kind, value, freqs, ns, z0)
    jac, dr_df = _jacobians(f_open, kind, value, freqs, z0)
    sig_f = np.array([m.f_r_sigma if m.f_r_sigma is not None else f_r_rel_sigma * m.f_r for m in modes])
    sig_r = np.abs(dr_df) * sig_f
    # work in relative parameters; raw columns differ by ~20 decades
    d = np.diag([f_open, value])
    jp = d @ np.linalg.pinv(jac @ d)
    cov = jp @ np.diag(sig_r**2) @ jp.T
    return ReactanceCalibration(
        f_open=f_open,
        load_value=value,
        kind=kind,
        z0=z0,
        residuals=tuple(float(r) for r in res),
        covariance=cov,
    )


def loss_system(phis, exponent_s):
    """Coefficient matrix of Q_i^-1 (phi + |sin phi|) = 2|sin phi| tan_delta + 2 pi (phi/2 pi)^s / Q_open."""
    phis = np.asarray(phis, dtype=float)
    return np.column_stack([
        2.0 * np.abs(np.sin(phis)),
        2.0 * np.pi * np.power(phis / (2.0 * np.pi), exponent_s),
    ])


def calibrate_loss(measurements, calib: ReactanceCalibration, s=1.0, *, cond_limit=1e12):
    """Solve for tan_delta and Q_open from two or more mode quality factors."""
    modes = _as_modes(measurements)
    if any(m.q_i is None for m in modes):
        raise DomainError("every mode needs q_i for loss calibration")
    phis = np.array([2.0 * math.pi * m.f_r / calib.f_open for m in modes])
    q = np.array([m.q_i for m in modes])
    a = loss_system(phis, s)
    b = (phis + np.abs(np.sin(phis))) / q
    cond = float(np.linalg.cond(a))
    if not np.isfinite(cond) or cond > cond_limit:
        raise DegenerateModesError(f"mode loss equations are degenerate (cond={cond:.3g})")
    if len(modes) == 2:
        x = np.linalg.solve(a, b)
    else:
        x = np.linalg.lstsq(a, b, rcond=None)[0]
    sig_q = np.array([m.q_i_sigma or 0.0 for m in modes])
    sig_b = b * sig_q / q
    ap = np.linalg.pinv(a)
    cov = ap @ np.diag(sig_b**2) @ ap.T
    predicted = (a @ x) / (phis + np.abs(np.sin(phis)))
    return LossCalibration(
        tan_delta=float(x[0]),
        q_open_ref=float(1.0 / x[1]) if x[1] != 0 else float("inf"),
        exponent_s=s,
        residuals=tuple(float(r) for r in predicted - 1.0 / q),
        covariance=cov,
        condition_number=cond,
    )


def discriminate_parasitics(measurements, z0, f_open, *, rel_tol=1e-10):
    """Compare pure-C, pure-L and series L+C descriptions of the mode reactances.

    Each mode gives X_k from the resonance condition at the supplied
    ``f_open``; the three candidate models are linear in (1/C, L) and are
    fitted by least squares. The simplest model whose residual is within
    ``rel_tol`` of sum(X_k^2) wins.
    """
    modes = _as_modes(measurements)
    freqs = np.array([m.f_r for m in modes])
    w = 2.0 * np.pi * freqs
    x = np.array([reactance_from_frequencies(m.f_r, f_open, m.mode_n, z0) for m in modes])
    designs = {
        "capacitor": np.column_stack([-1.0 / w]),
        "inductor": np.column_stack([w]),
        "series": np.column_stack([w, -1.0 / w]),
    }
    fits = {}
    for name, design in designs.items():
        # column scaling keeps lstsq well conditioned across 1/C ~ 1e12, L ~ 1e-10
        scale = np.abs(design).max(axis=0)
        coef = np.linalg.lstsq(design / scale, x, rcond=None)[0] / scale
        rss = float(np.sum((design @ coef - x) ** 2))
        if name == "capacitor":
            params = {"c": 1.0 / coef[0] if coef[0] != 0 else math.inf}
            physical = coef[0] > 0
        elif name == "inductor":
            params = {"l": float(coef[0])}
            physical = coef[0] > 0
        else:
            params = {"l": float(coef[0]), "c": 1.0 / coef[1] if coef[1] != 0 else math.inf}
            physical = coef[0] >= 0 and coef[1] > 0
        fits[name] = ModelFit(name, params, rss, len(modes) - design.shape[1], bool(physical))

    tol = rel_tol * float(np.sum(x**2))
    order = ["capacitor", "inductor", "series"]
    acceptable = [n for n in order if fits[n].rss <= tol and fits[n].physical]
    if acceptable:
        best = acceptable[0]
        ambiguous = acceptable[:2] == ["capacitor", "inductor"]
    else:
        ranked = sorted(order, key=lambda n: (not fits[n].physical, fits[n].rss))
        best = ranked[0]
        r0, r1 = fits[ranked[0]].rss, fits[ranked[1]].rss
        ambiguous = r1 <= 1.1 * r0
    return ParasiticReport(tuple(float(v) for v in x), fits, best, bool(ambiguous))
