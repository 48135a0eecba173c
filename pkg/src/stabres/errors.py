"""Exception types raised by the solvers and extraction methods."""


class StabilizationError(Exception):
    """Base class for all numerical failures in this package."""


class DomainError(StabilizationError, ValueError):
    """An argument lies outside the region where the model is defined."""


class RootLoss(StabilizationError):
    """A root-tracking step lost or merged a root."""


class DegenerateRoot(StabilizationError):
    """The quantization function is tangent at a root (zero q-derivative)."""


class NoConvergence(StabilizationError):
    """An iterative solver hit its iteration cap."""


class SingularJacobian(StabilizationError):
    """The least-squares Jacobian is rank deficient."""


class EnergyOutOfRange(StabilizationError):
    """A requested energy is not attained by the selected levels."""


class ExtractionFailure(StabilizationError):
    """A resonance-extraction method could not produce a reliable result."""


class NoPlateau(ExtractionFailure):
    """No qualifying plateau was found in a level sweep."""


class NoPeak(ExtractionFailure):
    """A curve has no interior maximum to fit."""


class WeakPeak(ExtractionFailure):
    """A peak is too weak to separate from its background."""
