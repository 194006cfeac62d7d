"""Exception hierarchy shared across the package.

Everything raised on bad data or bad files derives from SegragError so the
CLI can map failures to exit codes in one place. DivergenceError is kept
separate because it signals a numeric failure, not a data problem.
"""


class SegragError(Exception):
    """Base class for data and format errors."""


class XmlParseError(SegragError):
    """Malformed XML input. Carries the approximate byte offset of the failure."""

    def __init__(self, message: str, byte_offset: int | None = None):
        if byte_offset is not None:
            message = f"{message} (byte offset {byte_offset})"
        super().__init__(message)
        self.byte_offset = byte_offset


class EmptyDocumentError(SegragError):
    """Document has neither an abstract nor any body text."""


class ValidationError(SegragError):
    """A record in a data file violates the schema."""


class DimensionMismatchError(SegragError):
    """Vector or model dimension differs from what the consumer expects."""

    def __init__(self, expected: int, actual: int, context: str = ""):
        where = f" in {context}" if context else ""
        super().__init__(f"dimension mismatch{where}: expected {expected}, got {actual}")
        self.expected = expected
        self.actual = actual


class MissingEmbeddingError(SegragError):
    """Text not present in an embedding cache. Carries the key hash."""

    def __init__(self, key_hex: str, hint: str = ""):
        extra = f" ({hint})" if hint else ""
        super().__init__(f"no cached embedding for key {key_hex}{extra}")
        self.key_hex = key_hex


class CacheFormatError(SegragError):
    """Embedding cache file has a wrong magic or unsupported version."""


class CacheCorruptionError(SegragError):
    """Embedding cache file is structurally inconsistent (truncation, bad sizes)."""


class InsufficientSectionsError(SegragError):
    """Document cannot supply cross-section negative pairs."""


class EmptyDatasetError(SegragError):
    """Pair construction produced no pairs at all."""


class ModelFormatError(SegragError):
    """Boundary-model file has a wrong magic, version, variant, or size."""


class DivergenceError(Exception):
    """Training produced a non-finite loss."""

    def __init__(self, epoch: int, batch: int):
        super().__init__(f"non-finite loss at epoch {epoch}, batch {batch}")
        self.epoch = epoch
        self.batch = batch


class ConfigError(SegragError):
    """Invalid chunker or run configuration."""
