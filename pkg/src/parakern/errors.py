"""Exception hierarchy shared by all parakern modules."""


class ParakernError(Exception):
    """Base class for all errors raised by this package."""


class StructureError(ParakernError, ValueError):
    """Operands have mismatched dimension, center, or degree cap."""


class ParameterError(ParakernError, ValueError):
    """A scalar argument is outside its admissible range."""


class UnsupportedSpecError(ParakernError, ValueError):
    """A coefficient or function spec falls outside the supported classes."""


class SequencingError(ParakernError, RuntimeError):
    """A recursion step was requested before its prerequisites exist."""


class AccuracyError(ParakernError, RuntimeError):
    """An adaptive routine failed to reach the requested tolerance."""


class ConditioningError(ParakernError, RuntimeError):
    """A linear step of a marching scheme is numerically singular."""


class ScalingError(ParakernError, RuntimeError):
    """Values left the representable floating-point range; rescale inputs."""


class SchemaError(ParakernError, ValueError):
    """A problem file failed JSON schema validation."""
