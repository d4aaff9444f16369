"""Exception hierarchy for the bounds engine."""


class BdcertError(Exception):
    """Base class for all engine errors."""


class ModelValidationError(BdcertError):
    """The intensity model violates a structural requirement."""


class SeriesDivergenceError(BdcertError):
    """A required state-series (plain, weighted or index-weighted) diverges."""


class EssentialRateError(BdcertError):
    """The catastrophe-rate floor has nonpositive period mean, so no
    exponential decay envelope exists and no ergodicity certificate can
    be issued."""


class CertificationError(BdcertError):
    """A self-check of a certified quantity failed (envelope inequality,
    non-stabilized infimum probe, ...)."""


class TruncationTargetError(BdcertError):
    """No admissible truncation level meets the requested accuracy."""


class IntegrationError(BdcertError):
    """The ODE integration was refused or produced an unacceptable state."""


class SimulationError(BdcertError):
    """The thinning simulation was invalid (majorant violated, bad config)."""
