"""Exception hierarchy shared by all weakmeter modules."""


class WeakMeterError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(WeakMeterError, ValueError):
    """An input violates a documented invariant."""


class InvalidProbeError(ValidationError):
    """Probe parameters describe a non-positive-semidefinite density matrix."""


class PhysicsDomainError(WeakMeterError):
    """The requested quantity is undefined for this physical configuration."""


class OrthogonalPostselectionError(PhysicsDomainError):
    """Pre- and postselected states are (numerically) orthogonal."""


class VanishingPostselectionError(PhysicsDomainError):
    """The postselection probability is below the numeric floor."""

    def __init__(self, message, probability=None):
        super().__init__(message)
        self.probability = probability


class DegenerateGeometryError(PhysicsDomainError):
    """Spin geometry with the observable parallel to the preselection axis."""


class RegimeNotApplicableError(PhysicsDomainError):
    """A closed-form approximation is requested outside its validity regime."""


class NumericalAssertionError(WeakMeterError, ArithmeticError):
    """An internal numeric sanity check failed (grid or phase bug)."""


class ConfigError(WeakMeterError):
    """Scenario configuration could not be parsed or validated."""
