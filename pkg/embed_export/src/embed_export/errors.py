"""Exception hierarchy for the exporter."""


class ExportError(Exception):
    """Base class for everything this package raises on purpose."""


class CacheFormatError(ExportError):
    """An existing output file has a cache header we do not understand."""


class DimensionMismatchError(ExportError):
    """The encoder's dimension conflicts with an existing cache file."""


class EncoderError(ExportError):
    """The requested encoder cannot be loaded or produced bad output."""
