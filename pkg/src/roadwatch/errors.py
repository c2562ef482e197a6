"""Exception types shared across the package."""


class RoadwatchError(Exception):
    """Base class for all package-specific errors."""


class SchemaError(RoadwatchError):
    """A record file violates its schema. Carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DuplicateFrameRow(SchemaError):
    """A frame_id appears in two non-contiguous blocks of a stub fixture."""


class ManifestSchemaError(SchemaError):
    """Frame manifest record is malformed."""


class NonMonotoneTimestamps(RoadwatchError):
    """Timestamps decrease for a single camera in the manifest."""


class BackendUnavailable(RoadwatchError):
    """The selected detector backend cannot be loaded or used."""


class FrameNotFound(RoadwatchError):
    """The active backend cannot resolve the requested frame."""


class EmptyAfterNormalization(RoadwatchError):
    """Plate text contains no usable characters after cleanup."""


class TooLong(RoadwatchError):
    """Normalized plate text exceeds the maximum plate length."""


class DimensionMismatch(RoadwatchError):
    """Embeddings of different dimensions were compared."""


class UnknownImageId(RoadwatchError):
    """A prediction references an image absent from the ground truth."""


class ConfigError(RoadwatchError):
    """Pipeline configuration is invalid (unknown key or out-of-range value)."""
