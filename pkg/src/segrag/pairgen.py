"""Sentence-pair generation for boundary model training.

Positives are adjacent sentence pairs inside a section, in document order.
Negatives pair sentences that never share a section anywhere in the
document, sampled uniformly without replacement until that pool runs out
and with replacement after. Each document derives its own RNG stream from
the global seed and its id, so output is reproducible no matter how the
documents are batched or ordered.
"""

import hashlib
import logging
from dataclasses import dataclass

import numpy as np

from .corpus import Document
from .errors import EmptyDatasetError, InsufficientSectionsError, ValidationError
from .ioutil import read_jsonl, write_jsonl

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SentencePair:
    doc_id: str
    a: str
    b: str
    label: int


def document_rng(seed: int, doc_id: str) -> np.random.Generator:
    """RNG stream unique to (seed, document), independent of corpus order."""
    digest = hashlib.blake2b(f"{seed}:{doc_id}".encode("utf-8"), digest_size=8).digest()
    return np.random.default_rng(int.from_bytes(digest, "little"))


def positive_pairs(doc: Document) -> list[SentencePair]:
    """Adjacent same-section sentence pairs, labeled 1."""
    pairs: list[SentencePair] = []
    for section in doc.sections:
        for a, b in zip(section.sentences, section.sentences[1:]):
            pairs.append(SentencePair(doc.id, a, b, 1))
    return pairs


def _disjoint_pool(doc: Document) -> tuple[list[str], list[tuple[int, int]]]:
    """Unique sentence texts and all unordered index pairs that never co-occur.

    A sentence text repeated across sections belongs to every section that
    contains it; a pair is eligible only if the two membership sets are
    disjoint.
    """
    membership: dict[str, set[int]] = {}
    texts: list[str] = []
    for si, section in enumerate(doc.sections):
        for sentence in section.sentences:
            if sentence not in membership:
                membership[sentence] = set()
                texts.append(sentence)
            membership[sentence].add(si)
    pool: list[tuple[int, int]] = []
    for i in range(len(texts)):
        left = membership[texts[i]]
        for j in range(i + 1, len(texts)):
            if left.isdisjoint(membership[texts[j]]):
                pool.append((i, j))
    return texts, pool


def negative_pairs(doc: Document, count: int, seed: int) -> list[SentencePair]:
    """Sample cross-section sentence pairs, labeled 0.

    Raises InsufficientSectionsError when the document has fewer than two
    sections, or when every sentence pair shares a section.
    """
    if len(doc.sections) < 2:
        raise InsufficientSectionsError(
            f"document {doc.id} has {len(doc.sections)} section(s); "
            "negative sampling needs at least 2"
        )
    if count <= 0:
        return []
    texts, pool = _disjoint_pool(doc)
    if not pool:
        raise InsufficientSectionsError(
            f"document {doc.id} has no pair of sentences outside a shared section"
        )
    rng = document_rng(seed, doc.id)
    chosen = list(rng.permutation(len(pool))[:count])
    if count > len(pool):
        chosen.extend(rng.integers(0, len(pool), size=count - len(pool)))
    out: list[SentencePair] = []
    for k in chosen:
        i, j = pool[int(k)]
        out.append(SentencePair(doc.id, texts[i], texts[j], 0))
    return out


def build_dataset(
    docs: list[Document], neg_ratio: float = 1.0, seed: int = 42
) -> list[SentencePair]:
    """Positives plus sampled negatives over a corpus, globally shuffled.

    Each document contributes round(positives * neg_ratio) negatives.
    Documents that cannot supply negatives are skipped whole, with a
    warning. Raises EmptyDatasetError when nothing survives.
    """
    pairs: list[SentencePair] = []
    for doc in docs:
        pos = positive_pairs(doc)
        want = int(round(len(pos) * neg_ratio))
        try:
            neg = negative_pairs(doc, want, seed)
        except InsufficientSectionsError as exc:
            log.warning("skipping document %s: %s", doc.id, exc)
            continue
        pairs.extend(pos)
        pairs.extend(neg)
    if not pairs:
        raise EmptyDatasetError("no training pairs could be generated from the corpus")
    order = np.random.default_rng(seed).permutation(len(pairs))
    return [pairs[int(k)] for k in order]


def save_pairs(pairs: list[SentencePair], path: str) -> None:
    write_jsonl(
        path,
        ({"doc_id": p.doc_id, "a": p.a, "b": p.b, "label": p.label} for p in pairs),
    )


def load_pairs(path: str) -> list[SentencePair]:
    pairs: list[SentencePair] = []
    for lineno, raw in read_jsonl(path):
        doc_id = raw.get("doc_id")
        a = raw.get("a")
        b = raw.get("b")
        label = raw.get("label")
        if not (isinstance(doc_id, str) and doc_id != ""):
            raise ValidationError(f"record {lineno}: missing or empty field 'doc_id'")
        if not (isinstance(a, str) and a != "" and isinstance(b, str) and b != ""):
            raise ValidationError(f"record {lineno}: fields 'a' and 'b' must be non-empty strings")
        if type(label) is not int or label not in (0, 1):
            raise ValidationError(f"record {lineno}: field 'label' must be 0 or 1")
        pairs.append(SentencePair(doc_id=doc_id, a=a, b=b, label=label))
    return pairs
