"""Document chunking: the trained boundary-model chunker and four baselines.

Sentence-based chunkers (model, cosine, sentence windows) work on the
document's sentence sequence with sections concatenated in order; section
titles never influence output. Text-based chunkers (fixed windows,
recursive splitting) see the document as one flat string and measure size
in whitespace-delimited tokens by default, with a character mode.

Chunk spans are half-open ranges in the coordinate space named by `unit`,
and chunk text is always recoverable from the source: a slice for char and
token units, a space-join of sentences for sentence units.
"""

import re
from dataclasses import dataclass

import numpy as np

from .boundary import BoundaryModel, raw_scores
from .corpus import Document
from .embedding import EmbeddingProvider, embed_many
from .errors import ConfigError, ValidationError
from .ioutil import read_jsonl, write_jsonl

UNIT_SENTENCE = "sentence"
UNIT_CHAR = "char"
UNIT_TOKEN = "token"
UNITS = (UNIT_SENTENCE, UNIT_CHAR, UNIT_TOKEN)

KINDS = ("fixed", "sentence", "recursive", "cosine", "model")

_WS_TOKEN = re.compile(r"\S+")

# Separator hierarchy for recursive splitting, coarsest first: blank line,
# newline, sentence terminator followed by space, then single space.
_SEPARATORS = (
    re.compile(r"\n[ \t]*\n"),
    re.compile(r"\n"),
    re.compile(r"(?<=[.!?]) "),
    re.compile(r" "),
)


@dataclass(frozen=True)
class Chunk:
    doc_id: str
    index: int
    span: tuple[int, int]
    unit: str
    text: str


@dataclass
class ChunkerConfig:
    kind: str
    size: int = 1000
    overlap: int = 200
    window: int = 3
    window_overlap: int = 1
    percentile: float = 95.0
    unit: str = UNIT_TOKEN
    max_sentences: int | None = None


def validate_config(config: ChunkerConfig) -> None:
    if config.kind not in KINDS:
        raise ConfigError(f"unknown chunker kind {config.kind!r}, expected one of {KINDS}")
    if config.size <= 0:
        raise ConfigError(f"size must be positive, got {config.size}")
    if not 0 <= config.overlap < config.size:
        raise ConfigError(f"overlap must satisfy 0 <= overlap < size, got {config.overlap}")
    if config.window < 1:
        raise ConfigError(f"window must be at least 1, got {config.window}")
    if not 0 <= config.window_overlap < config.window:
        raise ConfigError(
            f"window overlap must satisfy 0 <= overlap < window, got {config.window_overlap}"
        )
    if not 0.0 < config.percentile < 100.0:
        raise ConfigError(f"percentile must lie in (0, 100), got {config.percentile}")
    if config.unit not in (UNIT_CHAR, UNIT_TOKEN):
        raise ConfigError(f"unit must be 'token' or 'char', got {config.unit!r}")
    if config.max_sentences is not None and config.max_sentences < 1:
        raise ConfigError(f"max sentences must be at least 1, got {config.max_sentences}")


def document_text(doc: Document) -> str:
    """The document as one flat string: all sentences joined by spaces."""
    return " ".join(doc.all_sentences())


def _window_spans(length: int, size: int, stride: int) -> list[tuple[int, int]]:
    spans = []
    start = 0
    while True:
        end = min(start + size, length)
        spans.append((start, end))
        if end == length:
            break
        start += stride
    return spans


def chunk_fixed(
    text: str, size: int = 1000, overlap: int = 200, unit: str = UNIT_TOKEN, doc_id: str = ""
) -> list[Chunk]:
    """Windows of `size` units advancing by size - overlap; last may be short."""
    if size <= 0:
        raise ConfigError(f"size must be positive, got {size}")
    if not 0 <= overlap < size:
        raise ConfigError(f"overlap must satisfy 0 <= overlap < size, got {overlap}")
    stride = size - overlap
    if unit == UNIT_CHAR:
        if not text:
            return []
        return [
            Chunk(doc_id, i, (s, e), UNIT_CHAR, text[s:e])
            for i, (s, e) in enumerate(_window_spans(len(text), size, stride))
        ]
    if unit != UNIT_TOKEN:
        raise ConfigError(f"unit must be 'token' or 'char', got {unit!r}")
    tokens = [m.span() for m in _WS_TOKEN.finditer(text)]
    if not tokens:
        return []
    return [
        Chunk(doc_id, i, (s, e), UNIT_TOKEN, text[tokens[s][0] : tokens[e - 1][1]])
        for i, (s, e) in enumerate(_window_spans(len(tokens), size, stride))
    ]


def chunk_sentences(doc: Document, window: int = 3, overlap: int = 1) -> list[Chunk]:
    """Sliding windows over the sentence sequence, stride window - overlap."""
    if window < 1:
        raise ConfigError(f"window must be at least 1, got {window}")
    if not 0 <= overlap < window:
        raise ConfigError(f"window overlap must satisfy 0 <= overlap < window, got {overlap}")
    sentences = doc.all_sentences()
    return [
        Chunk(doc.id, i, (s, e), UNIT_SENTENCE, " ".join(sentences[s:e]))
        for i, (s, e) in enumerate(_window_spans(len(sentences), window, window - overlap))
    ]


def _measure(text: str, span: tuple[int, int], unit: str) -> int:
    if unit == UNIT_CHAR:
        return span[1] - span[0]
    return len(_WS_TOKEN.findall(text[span[0] : span[1]]))


def _split_recursive(text: str, span: tuple[int, int], level: int, size: int, unit: str):
    """Pieces of the span, each within `size` unless indivisible at every level."""
    if _measure(text, span, unit) <= size or level == len(_SEPARATORS):
        return [span]
    parts: list[tuple[int, int]] = []
    pos = span[0]
    for match in _SEPARATORS[level].finditer(text, span[0], span[1]):
        if match.start() > pos:
            parts.append((pos, match.start()))
        pos = match.end()
    if pos < span[1]:
        parts.append((pos, span[1]))
    parts = [p for p in parts if text[p[0] : p[1]].strip()]
    if len(parts) <= 1:
        return _split_recursive(text, span, level + 1, size, unit)
    out = []
    for part in parts:
        out.extend(_split_recursive(text, part, level + 1, size, unit))
    return out


def chunk_recursive(
    text: str, size: int = 1000, overlap: int = 200, unit: str = UNIT_TOKEN, doc_id: str = ""
) -> list[Chunk]:
    """Split on the separator hierarchy, then greedily merge back up to size.

    An emitted chunk carries over its trailing pieces, up to `overlap` units,
    into the next chunk. No chunk exceeds `size` unless a single piece is
    indivisible at every separator level. Spans are character ranges into
    the source regardless of the measuring unit.
    """
    if size <= 0:
        raise ConfigError(f"size must be positive, got {size}")
    if not 0 <= overlap < size:
        raise ConfigError(f"overlap must satisfy 0 <= overlap < size, got {overlap}")
    if unit not in (UNIT_CHAR, UNIT_TOKEN):
        raise ConfigError(f"unit must be 'token' or 'char', got {unit!r}")
    if not text.strip():
        return []
    pieces = _split_recursive(text, (0, len(text)), 0, size, unit)

    spans: list[tuple[int, int]] = []
    current: list[tuple[int, int]] = []
    current_len = 0
    for piece in pieces:
        piece_len = _measure(text, piece, unit)
        if current and current_len + piece_len > size:
            spans.append((current[0][0], current[-1][1]))
            kept: list[tuple[int, int]] = []
            kept_len = 0
            for prev in reversed(current):
                prev_len = _measure(text, prev, unit)
                if kept_len + prev_len > overlap or kept_len + prev_len + piece_len > size:
                    break
                kept.insert(0, prev)
                kept_len += prev_len
            current, current_len = kept, kept_len
        current.append(piece)
        current_len += piece_len
    if current:
        spans.append((current[0][0], current[-1][1]))
    return [
        Chunk(doc_id, i, (s, e), UNIT_CHAR, text[s:e]) for i, (s, e) in enumerate(spans)
    ]


def _chunks_from_starts(doc: Document, starts: list[int]) -> list[Chunk]:
    sentences = doc.all_sentences()
    bounds = starts + [len(sentences)]
    return [
        Chunk(doc.id, i, (s, e), UNIT_SENTENCE, " ".join(sentences[s:e]))
        for i, (s, e) in enumerate(zip(bounds, bounds[1:]))
    ]


def _walk_boundaries(n: int, breaks: set[int], max_sentences: int | None) -> list[int]:
    starts = [0]
    for i in range(1, n):
        if i in breaks or (max_sentences is not None and i - starts[-1] >= max_sentences):
            starts.append(i)
    return starts


def chunk_cosine(
    doc: Document,
    provider: EmbeddingProvider,
    percentile: float = 95.0,
    max_sentences: int | None = None,
) -> list[Chunk]:
    """Split where adjacent-sentence cosine distance exceeds the percentile.

    The threshold is np.percentile over this document's adjacent distances;
    the comparison is strictly greater, so uniform documents stay whole.
    """
    if not 0.0 < percentile < 100.0:
        raise ConfigError(f"percentile must lie in (0, 100), got {percentile}")
    sentences = doc.all_sentences()
    if len(sentences) < 2:
        return _chunks_from_starts(doc, [0])
    matrix = embed_many(provider, sentences).astype(np.float64)
    norms = np.linalg.norm(matrix, axis=1)
    dots = np.einsum("nd,nd->n", matrix[:-1], matrix[1:])
    scale = norms[:-1] * norms[1:]
    # A zero vector has no direction; treat its similarity as 0.
    sims = np.where(scale > 0.0, dots / np.where(scale > 0.0, scale, 1.0), 0.0)
    distances = 1.0 - sims
    threshold = np.percentile(distances, percentile)
    breaks = {i + 1 for i in range(len(distances)) if distances[i] > threshold}
    return _chunks_from_starts(doc, _walk_boundaries(len(sentences), breaks, max_sentences))


def chunk_model(
    doc: Document,
    model: BoundaryModel,
    provider: EmbeddingProvider,
    max_sentences: int | None = None,
) -> list[Chunk]:
    """Start a new chunk exactly where the model says the pair splits.

    Adjacent sentences with same-section probability below 0.5 (raw score
    below zero) are separated; everything else stays together. Sections are
    concatenated first, so the model alone decides every boundary.
    """
    sentences = doc.all_sentences()
    if len(sentences) < 2:
        return _chunks_from_starts(doc, [0])
    matrix = embed_many(provider, sentences).astype(np.float64)
    raw = raw_scores(model, matrix[:-1], matrix[1:])
    breaks = {i + 1 for i in range(raw.size) if raw[i] < 0.0}
    return _chunks_from_starts(doc, _walk_boundaries(len(sentences), breaks, max_sentences))


def chunk_document(
    doc: Document,
    config: ChunkerConfig,
    provider: EmbeddingProvider | None = None,
    model: BoundaryModel | None = None,
) -> list[Chunk]:
    """Dispatch on config.kind; provider/model only required when used."""
    validate_config(config)
    if config.kind == "fixed":
        return chunk_fixed(document_text(doc), config.size, config.overlap, config.unit, doc.id)
    if config.kind == "recursive":
        return chunk_recursive(
            document_text(doc), config.size, config.overlap, config.unit, doc.id
        )
    if config.kind == "sentence":
        return chunk_sentences(doc, config.window, config.window_overlap)
    if config.kind == "cosine":
        if provider is None:
            raise ConfigError("cosine chunker needs an embedding provider")
        return chunk_cosine(doc, provider, config.percentile, config.max_sentences)
    if provider is None or model is None:
        raise ConfigError("model chunker needs both a model and an embedding provider")
    return chunk_model(doc, model, provider, config.max_sentences)


def mean_token_count(chunks: list[Chunk]) -> float:
    """Average whitespace-token count per chunk; reported, never asserted."""
    if not chunks:
        return 0.0
    return float(np.mean([len(_WS_TOKEN.findall(c.text)) for c in chunks]))


def save_chunks(chunks: list[Chunk], path: str) -> None:
    write_jsonl(
        path,
        (
            {
                "doc_id": c.doc_id,
                "index": c.index,
                "span": [c.span[0], c.span[1]],
                "unit": c.unit,
                "text": c.text,
            }
            for c in chunks
        ),
    )


def load_chunks(path: str) -> list[Chunk]:
    chunks: list[Chunk] = []
    for lineno, raw in read_jsonl(path):
        doc_id = raw.get("doc_id")
        index = raw.get("index")
        span = raw.get("span")
        unit = raw.get("unit")
        text = raw.get("text")
        if not (isinstance(doc_id, str) and doc_id != ""):
            raise ValidationError(f"record {lineno}: missing or empty field 'doc_id'")
        if type(index) is not int or index < 0:
            raise ValidationError(f"record {lineno}: field 'index' must be a non-negative integer")
        if (
            not isinstance(span, list)
            or len(span) != 2
            or any(type(v) is not int for v in span)
            or not 0 <= span[0] < span[1]
        ):
            raise ValidationError(f"record {lineno}: field 'span' must be [start, end] with 0 <= start < end")
        if unit not in UNITS:
            raise ValidationError(f"record {lineno}: field 'unit' must be one of {UNITS}")
        if not (isinstance(text, str) and text != ""):
            raise ValidationError(f"record {lineno}: missing or empty field 'text'")
        chunks.append(Chunk(doc_id, index, (span[0], span[1]), unit, text))
    return chunks
