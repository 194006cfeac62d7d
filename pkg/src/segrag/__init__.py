"""Section-aware document chunking for retrieval pipelines.

Cleans JATS articles into sectioned documents, trains a lightweight
same-section classifier over sentence-embedding pairs, chunks documents
with it (or with standard baselines), and evaluates the result with
retrieval and generation metrics.
"""

__version__ = "0.1.0"

from .corpus import Document, QARecord, Section, clean_jats
from .boundary import BoundaryModel, init_model, load_model, save_model, train
from .chunkers import Chunk, ChunkerConfig, chunk_document
from .embedding import EmbeddingProvider, open_cache, test_encoder, write_cache
from .errors import DivergenceError, SegragError
from .pairgen import SentencePair, build_dataset
from .retrieval import build_index, evaluate_retrieval, query, run_retrieval

__all__ = [
    "BoundaryModel",
    "Chunk",
    "ChunkerConfig",
    "Document",
    "DivergenceError",
    "EmbeddingProvider",
    "QARecord",
    "Section",
    "SegragError",
    "SentencePair",
    "__version__",
    "build_dataset",
    "build_index",
    "chunk_document",
    "clean_jats",
    "evaluate_retrieval",
    "init_model",
    "load_model",
    "open_cache",
    "query",
    "run_retrieval",
    "save_model",
    "test_encoder",
    "train",
    "write_cache",
]
