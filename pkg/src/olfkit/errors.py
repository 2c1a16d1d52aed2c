"""Exception types shared across the package."""


class OlfkitError(Exception):
    """Base class for package-specific errors."""


class ConstructionError(OlfkitError, ValueError):
    """Problem or encoding data is inconsistent (dimensions, ranks, signs)."""


class ConfigError(OlfkitError, ValueError):
    """A run configuration could not be resolved."""


class HorizonExceeded(OlfkitError):
    """Prescribed-horizon law evaluated at or beyond its horizon."""


class FieldError(OlfkitError):
    """A feedback field could not be evaluated; carries the offending state."""

    def __init__(self, message, z=None, t=None):
        super().__init__(message)
        self.z = None if z is None else list(map(float, z))
        self.t = t


class SingularityEncountered(FieldError):
    """The Lyapunov gradient vanished away from the stationarity set."""


class JacobianSingular(FieldError):
    """The residual derivative is rank-deficient to machine precision."""


class DomainViolation(FieldError):
    """The state left the domain on which the problem is defined."""


class ConvergedAlready(FieldError):
    """Signal: the Lyapunov value is below the numerical floor; stop instead."""


class UnsupportedRealization(OlfkitError):
    """The chosen dynamics cannot be paired with this encoding."""


class OracleFailure(OlfkitError):
    """A direct linear-algebra oracle hit a singular or inconsistent system."""


class OracleAmbiguous(OlfkitError):
    """Active-set enumeration found zero or several distinct candidates."""
