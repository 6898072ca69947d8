"""Internal quality factor of a loaded line and its inversion for tan delta.

The line contribution carries the attenuation scaling ``(phi / 2 pi) ** s``
(alpha evaluated at f_r). ``s = 0`` is a frequency-independent alpha; with
``s = 1`` an unloaded line has the same Q in every mode.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError
from .resonance import participation
from .txline import AttenuationModel

# participation below this is treated as zero (phi at a multiple of 2 pi up to rounding)
ZERO_PARTICIPATION = 1e-12


@dataclass(frozen=True)
class LossBreakdown:
    q_i_inv: float
    q_dut_inv: float
    q_res_inv: float

    @property
    def q_i(self):
        return 1.0 / self.q_i_inv


@dataclass(frozen=True)
class PerturbativeComparison:
    order: int
    exact_q_i_inv: float
    perturbative_q_i_inv: float
    relative_deviation: float


def _line_term(phi, q_open_ref, s):
    return 2.0 * np.pi / q_open_ref * np.power(phi / (2.0 * np.pi), s)


def qi_forward(phi, tan_delta, atten: AttenuationModel):
    """Split Q_i^-1 into DUT and line contributions at phase ``phi``."""
    phi = np.asarray(phi, dtype=float)
    if np.any(~(phi > 0)):
        raise DomainError("phi must be positive")
    if np.any(np.asarray(tan_delta) < 0):
        raise DomainError("tan_delta must be non-negative")
    s = np.abs(np.sin(phi))
    den = phi + s
    q_dut = 2.0 * s * tan_delta / den
    q_res = _line_term(phi, atten.q_open_ref, atten.exponent_s) / den
    if np.ndim(q_dut) == 0 and np.ndim(q_res) == 0:
        return LossBreakdown(float(q_dut + q_res), float(q_dut), float(q_res))
    return LossBreakdown(q_dut + q_res, q_dut, q_res)


def tan_delta_single_mode(q_i, q_open_ref, phi, s=1.0):
    """Loss tangent from one mode's Q_i and a reference Q_open.

    Exact inverse of :func:`qi_forward`. Noisy references can push the
    result below zero; the value is returned unclipped.
    """
    q_i = np.asarray(q_i, dtype=float)
    q_open_ref = np.asarray(q_open_ref, dtype=float)
    if np.any(~(q_i > 0)) or np.any(~(q_open_ref > 0)):
        raise DomainError("quality factors must be positive")
    p = participation(phi)
    if np.any(np.asarray(p) < ZERO_PARTICIPATION):
        raise DomainError("zero participation: tan delta is not observable at this phi")
    # same algebra as qi_forward, solved for tan_delta
    den = phi + np.abs(np.sin(phi))
    t = (den / q_i - _line_term(phi, q_open_ref, s)) / (2.0 * np.abs(np.sin(phi)))
    return float(t) if np.ndim(t) == 0 else t


def tan_delta_participation_form(q_i, q_open_ref, phi, s=1.0):
    """Same extraction written in participation form (independent evaluation path)."""
    p = participation(phi)
    scale = (2.0 * math.pi / phi) ** (1.0 - s)
    return q_i ** -1 / (2 * p) - (1 - p) / (2 * p) * scale / q_open_ref


def perturbative_limits(phi, tan_delta, atten: AttenuationModel):
    """Compare Q_i^-1 against its first-order expansion about phi = m pi.

    The expansion replaces |sin phi| by |phi - m pi| and keeps terms linear
    in the offset; the relative deviation is second order near m pi.
    """
    m = max(1, round(phi / math.pi))
    phi0 = m * math.pi
    e = phi - phi0
    k = float(_line_term(phi0, atten.q_open_ref, atten.exponent_s))
    s = atten.exponent_s
    pert = (2.0 * abs(e) * tan_delta + k + k * s * e / phi0 - k * (e + abs(e)) / phi0) / phi0
    exact = qi_forward(phi, tan_delta, atten).q_i_inv
    return PerturbativeComparison(
        order=m,
        exact_q_i_inv=exact,
        perturbative_q_i_inv=pert,
        relative_deviation=abs(exact - pert) / exact,
    )
