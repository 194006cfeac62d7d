"""Batch sentence-embedding export into the segrag binary cache format."""

from .cache import canonical_text, key_hash, read_header, write_cache
from .cli import export
from .encoders import load_encoder
from .errors import (
    CacheFormatError,
    DimensionMismatchError,
    EncoderError,
    ExportError,
)

__all__ = [
    "CacheFormatError",
    "DimensionMismatchError",
    "EncoderError",
    "ExportError",
    "canonical_text",
    "export",
    "key_hash",
    "load_encoder",
    "read_header",
    "write_cache",
]
