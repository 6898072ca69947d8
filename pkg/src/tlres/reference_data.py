"""Published device data for the hBN parallel-plate capacitor resonators.

Frequencies in Hz, capacitances in F, areas in m^2, thicknesses in m.
The first two entries of each mode table are the n=1 and n=2 modes.
"""

from __future__ import annotations

from dataclasses import dataclass

from .calibrate import ModeMeasurement

Z0 = 50.0
# f_open of the separately measured open reference resonator
REFERENCE_F_OPEN = 3.941e9
# relative spread of f_open across nominally identical references
REFERENCE_F_OPEN_REL_SIGMA = 0.0014
AREA_REL_SIGMA = 0.10


@dataclass(frozen=True)
class DutRecord:
    name: str
    area_m2: float
    thickness_m: float
    modes: tuple
    # single-mode analysis against REFERENCE_F_OPEN
    c_single_f: float
    # multimode self-calibration
    c_multi_f: float
    f_open_multi: float
    p_percent: tuple
    tand_multi: float
    tand_single_median: float
    tand_single_iqr: tuple


DUTS = {
    "A": DutRecord(
        name="A",
        area_m2=300e-12,
        thickness_m=20e-9,
        modes=(ModeMeasurement(1, 3.410e9, 2.103e5), ModeMeasurement(2, 6.927e9, 2.215e5)),
        c_single_f=421e-15,
        c_multi_f=388e-15,
        f_open_multi=3.899e9,
        p_percent=(11.43, 8.12),
        tand_multi=5.57e-6,
        tand_single_median=-0.37e-5,
        tand_single_iqr=(-1.10e-5, 0.79e-5),
    ),
    "B": DutRecord(
        name="B",
        area_m2=440e-12,
        thickness_m=30e-9,
        modes=(ModeMeasurement(1, 3.391e9, 1.601e5), ModeMeasurement(2, 6.900e9, 1.619e5)),
        c_single_f=440e-15,
        c_multi_f=406e-15,
        f_open_multi=3.897e9,
        p_percent=(11.76, 8.19),
        tand_multi=3.97e-6,
        tand_single_median=-0.10e-5,
        tand_single_iqr=(-0.80e-5, 1.03e-5),
    ),
    "C": DutRecord(
        name="C",
        area_m2=439e-12,
        thickness_m=35e-9,
        modes=(ModeMeasurement(1, 3.446e9, 1.479e5), ModeMeasurement(2, 6.980e9, 1.476e5)),
        c_single_f=385e-15,
        c_multi_f=354e-15,
        f_open_multi=3.900e9,
        p_percent=(10.74, 7.93),
        tand_multi=3.11e-6,
        tand_single_median=-0.52e-5,
        tand_single_iqr=(-1.29e-5, 0.74e-5),
    ),
}

KAPPA_MULTIMODE = 3.06
KAPPA_MULTIMODE_SIGMA = 0.08
KAPPA_SINGLE_MODE = 3.33
KAPPA_SINGLE_MODE_SIGMA = 0.06
KAPPA_BULK_HBN = 3.03

# (analytic, finite-element, measured) capacitances
FRINGING_COMPARISON = {
    "A": (399e-15, 400e-15, 388e-15),
    "B": (367e-15, 370e-15, 406e-15),
    "C": (336e-15, 339e-15, 354e-15),
}

# reference resonators at the single-photon limit: (type, f1, f2, Q1, Q2)
REFERENCE_RESONATORS = {
    "RR1": ("short", 2.971e9, 8.865e9, 0.983e5, 1.183e5),
    "RR2": ("short", 2.980e9, 8.895e9, 1.143e5, 0.847e5),
    "RR3": ("open", 3.941e9, 7.888e9, 2.089e5, 2.480e5),
}

# centre of the reference Q_open distribution
Q_OPEN_CENTER = 1.48e5
