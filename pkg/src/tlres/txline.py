"""Transmission-line and load arithmetic.

Loads follow the series model ``Z_L = r + jX`` with ``tan_delta = r/|X|``.
Impedances are plain Python/numpy complex numbers.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DomainError, SingularInputError, ValidityWarning

TAN_DELTA_WARN = 0.1


class LoadKind(str, enum.Enum):
    CAPACITOR = "capacitor"
    INDUCTOR = "inductor"
    SERIES = "series"

    @classmethod
    def parse(cls, value) -> "LoadKind":
        if isinstance(value, cls):
            return value
        aliases = {"c": "capacitor", "l": "inductor", "cap": "capacitor", "ind": "inductor"}
        key = str(value).strip().lower()
        return cls(aliases.get(key, key))


@dataclass(frozen=True)
class AttenuationModel:
    """Line loss expressed through the open-resonator quality factor.

    ``q_open_ref`` is Q_open at ``f_open``; the attenuation constant scales
    as ``(f / f_open) ** exponent_s``.
    """

    q_open_ref: float
    exponent_s: float = 1.0

    def __post_init__(self):
        if not self.q_open_ref > 0:
            raise DomainError(f"q_open_ref must be positive, got {self.q_open_ref}")
        if not math.isfinite(self.exponent_s):
            raise DomainError("exponent_s must be finite")

    def q_open_inv(self, f, f_open):
        """Inverse open-resonator Q with alpha evaluated at ``f``."""
        return np.power(np.asarray(f, dtype=float) / f_open, self.exponent_s) / self.q_open_ref

    def alpha_length(self, f, f_open):
        """Attenuation times line length, from Q_open^-1 = 2 alpha l / pi."""
        return 0.5 * np.pi * self.q_open_inv(f, f_open)


@dataclass(frozen=True)
class LineSpec:
    z0: float
    f_open: float
    attenuation: AttenuationModel | None = None

    def __post_init__(self):
        if not self.z0 > 0:
            raise DomainError(f"z0 must be positive, got {self.z0}")
        if not self.f_open > 0:
            raise DomainError(f"f_open must be positive, got {self.f_open}")

    def beta_length(self, f):
        """Electrical length beta*l = pi f / f_open."""
        return np.pi * np.asarray(f, dtype=float) / self.f_open

    def gamma_length(self, f):
        bl = self.beta_length(f)
        if self.attenuation is None:
            return 1j * bl
        return self.attenuation.alpha_length(f, self.f_open) + 1j * bl


@dataclass(frozen=True)
class LoadModel:
    """Reactive DUT with a single shared loss tangent.

    For ``kind == SERIES`` the ``elements`` tuple lists ``(kind, value)``
    pairs connected in series; ``value`` is then unused and set to 0.
    """

    kind: LoadKind
    value: float = 0.0
    tan_delta: float = 0.0
    elements: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "kind", LoadKind.parse(self.kind))
        if self.tan_delta < 0:
            raise DomainError(f"tan_delta must be non-negative, got {self.tan_delta}")
        if self.kind is LoadKind.SERIES:
            if not self.elements:
                raise DomainError("series load needs at least one element")
            parsed = []
            for kind, value in self.elements:
                kind = LoadKind.parse(kind)
                if kind is LoadKind.SERIES:
                    raise DomainError("series elements must be capacitors or inductors")
                if not value > 0:
                    raise DomainError(f"element value must be positive, got {value}")
                parsed.append((kind, float(value)))
            object.__setattr__(self, "elements", tuple(parsed))
        elif not self.value > 0:
            raise DomainError(f"load value must be positive, got {self.value}")

    @classmethod
    def capacitor(cls, c, tan_delta=0.0):
        return cls(LoadKind.CAPACITOR, c, tan_delta)

    @classmethod
    def inductor(cls, l, tan_delta=0.0):
        return cls(LoadKind.INDUCTOR, l, tan_delta)

    @classmethod
    def series(cls, elements, tan_delta=0.0):
        return cls(LoadKind.SERIES, 0.0, tan_delta, tuple(elements))

    def with_tan_delta(self, tan_delta):
        return LoadModel(self.kind, self.value, tan_delta, self.elements)

    def parts(self):
        if self.kind is LoadKind.SERIES:
            return self.elements
        return ((self.kind, self.value),)


def _element_reactance(kind, value, f):
    w = 2.0 * np.pi * f
    if kind is LoadKind.CAPACITOR:
        return -1.0 / (w * value)
    return w * value


def reactance(load: LoadModel, f):
    """Signed reactance of ``load`` at frequency ``f`` (Hz), in ohm."""
    f = np.asarray(f, dtype=float)
    if np.any(~(f > 0)):
        raise DomainError("frequency must be positive")
    x = sum(_element_reactance(kind, value, f) for kind, value in load.parts())
    return float(x) if x.ndim == 0 else x


def reactance_derivative(load: LoadModel, f):
    """dX/df, used by the calibration Jacobians."""
    f = np.asarray(f, dtype=float)
    total = 0.0
    for kind, value in load.parts():
        total = total + np.abs(_element_reactance(kind, value, f)) / f
    return total


def load_impedance(load: LoadModel, f):
    """Complex impedance ``|X| tan_delta + jX``."""
    if load.tan_delta > TAN_DELTA_WARN:
        warnings.warn(
            f"tan_delta={load.tan_delta:g} is outside the small-loss regime",
            ValidityWarning,
            stacklevel=2,
        )
    x = reactance(load, f)
    return np.abs(x) * load.tan_delta + 1j * np.asarray(x)


def reflection_coefficient(z_load, z0):
    """Gamma = (Z_L - Z_0) / (Z_L + Z_0)."""
    z_load = np.asarray(z_load, dtype=complex)
    den = z_load + z0
    if np.any(den == 0):
        raise SingularInputError("Z_L = -Z_0 makes the reflection coefficient singular")
    g = (z_load - z0) / den
    return complex(g) if g.ndim == 0 else g


def reflection_phase(x, z0):
    """Reflection phase of a pure reactance, branch fixed by tan(theta/2) = Z0/X.

    Capacitive loads give theta in (-pi, 0), inductive loads (0, pi).
    ``x == 0`` maps to the short-circuit limit with the sign of the zero.
    """
    if not z0 > 0:
        raise DomainError("z0 must be positive")
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        theta = 2.0 * np.arctan(z0 / x)
    theta = np.where(x == 0, np.copysign(np.pi, x), theta)
    return float(theta) if theta.ndim == 0 else theta


def reflection_magnitude(x, z0, tan_delta):
    """First-order |Gamma| of a lossy reactance: 1 - |sin theta| tan_delta."""
    if np.any(np.asarray(tan_delta) < 0):
        raise DomainError("tan_delta must be non-negative")
    theta = reflection_phase(x, z0)
    mag = 1.0 - np.abs(np.sin(theta)) * tan_delta
    return float(mag) if np.ndim(mag) == 0 else mag
