"""Exception hierarchy for the cavitation package."""


class CavitationError(Exception):
    """Base class for all errors raised by this package."""


class StrainDomainError(CavitationError, ValueError):
    """A stretch, determinant or radius left the admissible domain (x > 0)."""


class NumericalError(CavitationError, RuntimeError):
    """A numerical procedure (root finder, integrator, line search) failed."""


class BracketError(NumericalError):
    """No sign change was found for a bracketed root search."""


class StepSizeError(NumericalError):
    """The adaptive integrator step size underflowed."""


class StagnationError(NumericalError):
    """The descent iteration could not decrease the energy any further.

    The best iterate found so far is attached as ``field``.
    """

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class ConfigError(CavitationError, ValueError):
    """Invalid experiment configuration or unsupported material setup."""
