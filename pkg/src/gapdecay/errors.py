"""Exception hierarchy for gapdecay."""


class GapDecayError(Exception):
    """Base class for all gapdecay errors."""


class ConfigError(GapDecayError):
    """Invalid physical configuration (parameter out of its admissible range)."""


class QuadratureError(GapDecayError):
    """A quadrature failed to reach the requested accuracy."""


class SeriesError(GapDecayError):
    """Series evaluation exhausted its term budget or lost too much significance."""


class RootError(GapDecayError):
    """Polynomial root finding failed its residual gate."""


class RepresentationError(GapDecayError):
    """A requested analytic representation is not applicable to this configuration."""


class StepSizeError(GapDecayError):
    """Volterra step size rejected: self-consistency estimate above tolerance."""


class FitError(GapDecayError):
    """Samples are not in a power-law regime (log-log residual too large)."""
