"""Exception hierarchy.

Every error raised by the library derives from :class:`MmqiError`, which the
CLI maps to exit code 3 (numerical domain error). Config problems raise
:class:`ConfigError` and map to exit code 2.
"""


class MmqiError(ValueError):
    """Base class for all library errors."""


class InvalidArgs(MmqiError):
    pass


class DimensionCap(MmqiError):
    pass


class NotInBasis(MmqiError):
    pass


class NonHermitianCoeff(MmqiError):
    pass


class DimMismatch(MmqiError):
    pass


class NonRealExpectation(MmqiError):
    pass


class ModeOutOfRange(MmqiError):
    pass


class NonUnitDirection(MmqiError):
    pass


class NormalizationError(MmqiError):
    pass


class RangeError(MmqiError):
    pass


class ProbabilityNormalization(MmqiError):
    pass


class NonPhysicalState(MmqiError):
    pass


class NonPositiveFisher(MmqiError):
    pass


class VanishingSignal(MmqiError):
    pass


class NoMaximumInInterval(MmqiError):
    pass


class WindowTooSmall(MmqiError):
    pass


class ZeroVisibility(MmqiError):
    pass


class PhaseFullySmeared(MmqiError):
    pass


class ConfigError(Exception):
    """Raised for schema-invalid run configurations."""
