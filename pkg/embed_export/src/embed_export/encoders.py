"""Encoder backends behind one interface: a dimension and encode(texts).

Two families:
  - any sentence-transformers model name, loaded lazily so the heavy ML
    stack is only imported when actually requested;
  - "hashed:<dim>[:<seed>]", a deterministic offline stand-in that maps each
    canonical sentence to a fixed unit vector. It lets the full export path
    run in tests and air-gapped environments.
"""

import hashlib

import numpy as np

from .cache import canonical_text
from .errors import EncoderError


class HashedEncoder:
    """Deterministic per-sentence unit vectors seeded by a text digest."""

    def __init__(self, dimension: int, seed: int = 0):
        if dimension < 1:
            raise EncoderError(f"hashed encoder dimension must be positive, got {dimension}")
        self.dimension = dimension
        self.seed = seed
        self.name = f"hashed:{dimension}:{seed}"

    def encode(self, texts: list[str]) -> np.ndarray:
        out = np.empty((len(texts), self.dimension), dtype=np.float32)
        for row, text in enumerate(texts):
            digest = hashlib.blake2b(
                canonical_text(text).encode("utf-8"),
                digest_size=8,
                key=self.seed.to_bytes(8, "little", signed=True),
            ).digest()
            rng = np.random.default_rng(int.from_bytes(digest, "little"))
            raw = rng.standard_normal(self.dimension)
            norm = np.linalg.norm(raw)
            if norm == 0.0:
                raw[0] = 1.0
                norm = 1.0
            out[row] = (raw / norm).astype(np.float32)
        return out


class TransformerEncoder:
    """sentence-transformers model with its default pooling."""

    def __init__(self, name: str, batch_size: int = 64):
        try:
            from sentence_transformers import SentenceTransformer
        except ImportError as exc:
            raise EncoderError(
                "sentence-transformers is not installed; "
                "pip install 'embed-export[models]'"
            ) from exc
        try:
            self._model = SentenceTransformer(name)
        except Exception as exc:
            raise EncoderError(f"cannot load encoder {name!r}: {exc}") from exc
        self.name = name
        self.batch_size = batch_size
        dimension = self._model.get_sentence_embedding_dimension()
        if not dimension:
            raise EncoderError(f"encoder {name!r} reports no output dimension")
        self.dimension = int(dimension)

    def encode(self, texts: list[str]) -> np.ndarray:
        vectors = self._model.encode(
            list(texts),
            batch_size=self.batch_size,
            convert_to_numpy=True,
            show_progress_bar=False,
        )
        return np.asarray(vectors, dtype=np.float32)


def load_encoder(name: str, batch_size: int = 64):
    """Resolve a model name to a backend instance."""
    if name.startswith("hashed:"):
        parts = name.split(":")
        try:
            dimension = int(parts[1])
            seed = int(parts[2]) if len(parts) > 2 else 0
        except (IndexError, ValueError):
            raise EncoderError(
                f"bad hashed encoder spec {name!r}, expected hashed:<dim>[:<seed>]"
            ) from None
        return HashedEncoder(dimension, seed)
    return TransformerEncoder(name, batch_size=batch_size)
