"""Exception hierarchy shared by all modules."""


class BiofilmError(Exception):
    """Base class for every error raised by the package."""


class InvalidParameter(BiofilmError, ValueError):
    pass


class DomainError(BiofilmError, ValueError):
    """A state lies outside 0 < L < 1 or has a vanishing component."""


class NotSymmetrizable(DomainError):
    """eta <= 0: the diagonal symmetrizer is not positive definite."""


class ComplexEigenvalues(DomainError):
    """Delta < 0: the flux Jacobian has a complex pair."""


class NoPositiveEquilibrium(BiofilmError, ValueError):
    """kB <= kD, so the interior equilibrium has non-positive fractions."""


class LeftHyperbolicDomain(BiofilmError, RuntimeError):
    """Raised by the solver when a cell leaves W or hits the component floor.

    ``cell`` is the first offending cell index, ``state`` its (B, E, D, v)
    values and ``field`` the last valid field, kept for diagnostics.
    """

    def __init__(self, message, cell=None, state=None, field=None):
        super().__init__(message)
        self.cell = cell
        self.state = state
        self.field = field
        self.trace = None


class NonFiniteValue(LeftHyperbolicDomain):
    pass


class PerturbationTooLarge(LeftHyperbolicDomain):
    """Initial data outside W or the component floors; ``field`` is the rejected data."""


class GridTooSmall(BiofilmError, ValueError):
    pass


class OutOfRange(BiofilmError, ValueError):
    pass


class InsufficientData(BiofilmError, ValueError):
    pass


class NonPositiveNorm(InsufficientData):
    pass


class ConfigError(BiofilmError, ValueError):
    pass
