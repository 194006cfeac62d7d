"""Writer for the segrag binary embedding-cache format.

Implemented from the documented file layout so this package only couples to
the format, not to the consumer's code:

    magic "SEGRAGEC" | u16 version=1 | u32 dimension | u64 count
    then per record: 16-byte key hash | u32 text byte length | dimension * f32

All integers little-endian. The key is a 128-bit BLAKE2b digest of the
NFC-normalized, whitespace-collapsed sentence text; the stored byte length of
that canonical text serves as a collision check on the reader side. Vectors
are stored bit-exactly as float32, unnormalized.
"""

import hashlib
import os
import struct
import tempfile
import unicodedata

import numpy as np

from .errors import CacheFormatError

MAGIC = b"SEGRAGEC"
VERSION = 1
_HEADER = struct.Struct("<8sHIQ")
_RECORD_HEAD = struct.Struct("<16sI")

KEY_BYTES = 16


def canonical_text(text: str) -> str:
    """NFC-normalize, then collapse whitespace runs and trim the ends."""
    return " ".join(unicodedata.normalize("NFC", text).split())


def key_hash(text: str) -> bytes:
    """The 128-bit cache key for one sentence."""
    canon = canonical_text(text)
    return hashlib.blake2b(canon.encode("utf-8"), digest_size=KEY_BYTES).digest()


def read_header(path: str) -> tuple[int, int]:
    """(dimension, count) from an existing cache file's header."""
    with open(path, "rb") as handle:
        head = handle.read(_HEADER.size)
    if len(head) < _HEADER.size:
        raise CacheFormatError(f"{path}: file shorter than a cache header")
    magic, version, dimension, count = _HEADER.unpack(head)
    if magic != MAGIC:
        raise CacheFormatError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise CacheFormatError(f"{path}: unsupported cache version {version}")
    return dimension, count


def write_cache(path: str, texts: list[str], vectors: np.ndarray, dimension: int) -> int:
    """Write one record per text, in order. Returns the record count.

    texts must already be key-unique; vectors is the matching (n, dimension)
    float32 array. The file appears atomically (temp + rename).
    """
    vectors = np.ascontiguousarray(vectors, dtype="<f4")
    if vectors.shape != (len(texts), dimension):
        raise ValueError(
            f"vector array shape {vectors.shape} does not match "
            f"{len(texts)} texts of dimension {dimension}"
        )
    parts = [_HEADER.pack(MAGIC, VERSION, dimension, len(texts))]
    for text, vector in zip(texts, vectors):
        canon = canonical_text(text)
        parts.append(_RECORD_HEAD.pack(key_hash(text), len(canon.encode("utf-8"))))
        parts.append(vector.tobytes())
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".cache-")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(b"".join(parts))
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return len(texts)
