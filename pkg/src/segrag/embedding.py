"""Sentence-embedding providers and the on-disk embedding cache.

Vectors enter the pipeline either from the deterministic bag-of-words test
encoder or from a binary cache file produced offline by a real encoder.
Nothing in this package runs a neural model; the cache keeps the pipeline
free of any ML runtime.

Cache file layout (little-endian):
    magic "SEGRAGEC" | u16 version=1 | u32 dimension | u64 count
    then per record: 16-byte key hash | u32 text byte length | dimension * f32

The key is a 128-bit BLAKE2b digest of the NFC-normalized,
whitespace-collapsed text; the stored text length doubles as a collision
check. Vectors are stored exactly as produced, unnormalized.
"""

import hashlib
import os
import struct
from typing import Iterable

import numpy as np

from .errors import CacheCorruptionError, CacheFormatError, MissingEmbeddingError
from .ioutil import atomic_write_bytes
from .textutil import canonical_key_text, tokenize

CACHE_MAGIC = b"SEGRAGEC"
CACHE_VERSION = 1
_HEADER = struct.Struct("<8sHIQ")
_RECORD_HEAD = struct.Struct("<16sI")

KEY_BYTES = 16


def key_hash(text: str) -> bytes:
    """128-bit cache key for a sentence: BLAKE2b over the canonical text."""
    canon = canonical_key_text(text)
    return hashlib.blake2b(canon.encode("utf-8"), digest_size=KEY_BYTES).digest()


class EmbeddingProvider:
    """Uniform interface: a name, a fixed dimension, and a deterministic embed()."""

    name: str
    dimension: int

    def embed(self, text: str) -> np.ndarray:
        raise NotImplementedError


class HashedBagOfWordsEncoder(EmbeddingProvider):
    """Deterministic stand-in for a neural sentence encoder.

    Every vocabulary token hashes (seeded) to a fixed random unit vector;
    a sentence embeds as the L2-normalized sum of its token vectors. Two
    instances with the same seed and dimension are interchangeable.
    """

    def __init__(self, dimension: int = 64, seed: int = 0):
        if dimension < 8:
            raise ValueError(f"dimension must be at least 8, got {dimension}")
        self.dimension = dimension
        self.seed = seed
        self.name = f"test:{dimension}:{seed}"
        self._token_cache: dict[str, np.ndarray] = {}

    def token_vector(self, token: str) -> np.ndarray:
        """The fixed unit vector assigned to one token."""
        vec = self._token_cache.get(token)
        if vec is None:
            digest = hashlib.blake2b(
                token.encode("utf-8"),
                digest_size=8,
                key=self.seed.to_bytes(8, "little", signed=True),
            ).digest()
            rng = np.random.default_rng(int.from_bytes(digest, "little"))
            raw = rng.standard_normal(self.dimension)
            vec = raw / np.linalg.norm(raw)
            vec.flags.writeable = False
            self._token_cache[token] = vec
        return vec

    def embed(self, text: str) -> np.ndarray:
        tokens = tokenize(text) or [""]
        total = np.zeros(self.dimension)
        for token in tokens:
            total += self.token_vector(token)
        norm = np.linalg.norm(total)
        if norm == 0.0:
            # Token vectors summed to exactly zero; fall back to a fixed
            # direction so the output stays finite and unit length.
            total = self.token_vector("")
            norm = 1.0
        return (total / norm).astype(np.float32)


def test_encoder(dimension: int = 64, seed: int = 0) -> HashedBagOfWordsEncoder:
    return HashedBagOfWordsEncoder(dimension=dimension, seed=seed)


class CachedEmbeddings(EmbeddingProvider):
    """Read-only provider backed by a cache file loaded fully into memory."""

    def __init__(self, path: str, dimension: int, entries: dict[bytes, tuple[int, np.ndarray]]):
        self.name = f"cache:{os.path.basename(path)}"
        self.path = path
        self.dimension = dimension
        self._entries = entries

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, text: str) -> bool:
        return key_hash(text) in self._entries

    def embed(self, text: str) -> np.ndarray:
        canon = canonical_key_text(text)
        key = key_hash(text)
        entry = self._entries.get(key)
        if entry is None:
            raise MissingEmbeddingError(key.hex(), hint=f"cache {self.path}")
        length, vector = entry
        if length != len(canon.encode("utf-8")):
            raise CacheCorruptionError(
                f"key {key.hex()} matched a record with text length {length}, "
                f"expected {len(canon.encode('utf-8'))} (hash collision or corrupt file)"
            )
        return vector


def open_cache(path: str) -> CachedEmbeddings:
    """Load an embedding cache file, verifying its structure."""
    with open(path, "rb") as handle:
        data = handle.read()
    if len(data) < _HEADER.size:
        raise CacheCorruptionError(f"{path}: file shorter than header")
    magic, version, dimension, count = _HEADER.unpack_from(data, 0)
    if magic != CACHE_MAGIC:
        raise CacheFormatError(f"{path}: bad magic {magic!r}")
    if version != CACHE_VERSION:
        raise CacheFormatError(f"{path}: unsupported version {version}")
    if dimension == 0:
        raise CacheCorruptionError(f"{path}: zero dimension in header")
    record_size = _RECORD_HEAD.size + 4 * dimension
    expected = _HEADER.size + count * record_size
    if len(data) != expected:
        raise CacheCorruptionError(
            f"{path}: size {len(data)} does not match header (expected {expected})"
        )
    entries: dict[bytes, tuple[int, np.ndarray]] = {}
    offset = _HEADER.size
    for _ in range(count):
        key, length = _RECORD_HEAD.unpack_from(data, offset)
        offset += _RECORD_HEAD.size
        vector = np.frombuffer(data, dtype="<f4", count=dimension, offset=offset).copy()
        vector.flags.writeable = False
        offset += 4 * dimension
        entries[key] = (length, vector)
    return CachedEmbeddings(path, dimension, entries)


def write_cache(path: str, entries: Iterable[tuple[str, np.ndarray]], dimension: int | None = None) -> int:
    """Write (text, vector) pairs to a cache file. Returns the record count.

    Duplicate texts collapse to a single record (first occurrence wins).
    Vectors are stored bit-exactly as float32.
    """
    records: dict[bytes, bytes] = {}
    for text, vector in entries:
        arr = np.asarray(vector, dtype="<f4")
        if arr.ndim != 1:
            raise ValueError("embedding vectors must be one-dimensional")
        if dimension is None:
            dimension = arr.shape[0]
        elif arr.shape[0] != dimension:
            raise ValueError(
                f"vector length {arr.shape[0]} does not match cache dimension {dimension}"
            )
        canon = canonical_key_text(text)
        key = key_hash(text)
        if key in records:
            continue
        records[key] = _RECORD_HEAD.pack(key, len(canon.encode("utf-8"))) + arr.tobytes()
    if dimension is None:
        raise ValueError("cannot write an empty cache without an explicit dimension")
    header = _HEADER.pack(CACHE_MAGIC, CACHE_VERSION, dimension, len(records))
    atomic_write_bytes(path, header + b"".join(records.values()))
    return len(records)


def embed_many(provider: EmbeddingProvider, texts: Iterable[str]) -> np.ndarray:
    """Stack embeddings for a sequence of texts, memoizing repeats."""
    memo: dict[str, np.ndarray] = {}
    rows = []
    for text in texts:
        vec = memo.get(text)
        if vec is None:
            vec = memo[text] = provider.embed(text)
        rows.append(vec)
    if not rows:
        return np.zeros((0, provider.dimension), dtype=np.float32)
    return np.stack(rows)
