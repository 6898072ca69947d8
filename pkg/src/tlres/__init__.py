"""Transmission-line resonators terminated by reactive loads.

Resonance conditions, participation ratios, loss extraction, multimode
self-calibration, uncertainty propagation, a network-synthesis oracle and
notch circle fitting.
"""

__version__ = "0.1.0"

from .calibrate import (  # noqa: E402
    LossCalibration,
    ModeMeasurement,
    ParasiticReport,
    ReactanceCalibration,
    calibrate_loss,
    calibrate_reactance,
    discriminate_parasitics,
)
from .circlefit import CircleGeometry, NotchFitResult, fit_circle, fit_notch, notch_model, remove_delay  # noqa: E402
from .exceptions import (  # noqa: E402
    DegenerateGeometryError,
    DegenerateModesError,
    DivergentUncertaintyError,
    DomainError,
    FitError,
    InaccessibleModeWarning,
    KindMismatchError,
    LowConfidenceWarning,
    SingularInputError,
    TlresError,
    UnphysicalModeError,
    ValidityWarning,
)
from .loss import LossBreakdown, perturbative_limits, qi_forward, tan_delta_single_mode  # noqa: E402
from .netsynth import (  # noqa: E402
    ComplexTrace,
    HangerNetwork,
    coupling_for_pull,
    frequency_pull,
    input_impedance,
    synth_s21,
    with_environment,
)
from .resonance import (  # noqa: E402
    ResonanceSolution,
    design_load_for_max_p,
    max_participation_point,
    mode_frequency_from_reactance,
    participation,
    phase_parameter,
    reactance_from_frequencies,
    solve_resonance,
    standing_wave,
    stored_energies,
)
from .stats import (  # noqa: E402
    fit_lognormal,
    kappa_fit,
    monte_carlo_uncertainty,
    reactance_value_uncertainty,
    single_mode_tand_distribution,
    tan_delta_uncertainty,
)
from .txline import (  # noqa: E402
    AttenuationModel,
    LineSpec,
    LoadKind,
    LoadModel,
    load_impedance,
    reactance,
    reflection_coefficient,
    reflection_magnitude,
    reflection_phase,
)
