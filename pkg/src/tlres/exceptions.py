"""Exception and warning types raised across the package."""


class TlresError(ValueError):
    """Base class for invalid-input and numerical errors."""


class DomainError(TlresError):
    """An argument lies outside the domain of the formula."""


class SingularInputError(TlresError):
    """The requested quantity is singular at the given input."""


class UnphysicalModeError(TlresError):
    """The requested mode index has no positive-frequency solution."""


class KindMismatchError(TlresError):
    """Mode data are inconsistent with the hypothesized load kind."""

    def __init__(self, message, suggested_kind=None):
        super().__init__(message)
        self.suggested_kind = suggested_kind


class DegenerateModesError(TlresError):
    """The multimode loss system is singular."""


class DivergentUncertaintyError(TlresError):
    """A first-order uncertainty formula has a vanishing denominator."""


class DegenerateGeometryError(TlresError):
    """Points do not determine a circle."""


class FitError(TlresError):
    """A nonlinear fit did not converge."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ValidityWarning(UserWarning):
    """Inputs are outside the small-loss regime the model assumes."""


class InaccessibleModeWarning(UserWarning):
    """A solution exists but sits far below any practical measurement band."""


class LowConfidenceWarning(UserWarning):
    """A fit finished but its quality flags are raised."""
