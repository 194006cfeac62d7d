"""Exact vector retrieval over chunks, relevance judging, and rank metrics.

The index is brute force on purpose: with exact cosine ranking, metric
differences between runs are attributable to chunking alone. Query timing
covers embedding the question and ranking, never index construction or
relevance judging.
"""

import time
from dataclasses import dataclass

import numpy as np

from .chunkers import Chunk
from .corpus import QARecord
from .embedding import EmbeddingProvider, embed_many, key_hash
from .errors import MissingEmbeddingError, ValidationError
from .ioutil import read_jsonl, write_jsonl
from .textutil import normalize_for_match, tokenize

DEFAULT_KS = (3, 5)
DEFAULT_F1_THRESHOLD = 0.8


@dataclass(frozen=True)
class RetrievalResult:
    qid: str
    ranks: list[tuple[str, int, float]]   # (doc_id, chunk index, similarity)
    first_relevant_rank: int | None
    query_time_s: float


class ChunkIndex:
    """Immutable dense index: chunk list plus a row-aligned vector matrix."""

    def __init__(self, chunks: list[Chunk], matrix: np.ndarray):
        self.chunks = list(chunks)
        self.matrix = matrix
        self.norms = np.linalg.norm(matrix, axis=1)

    def __len__(self) -> int:
        return len(self.chunks)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[1]


def build_index(chunks: list[Chunk], provider: EmbeddingProvider) -> ChunkIndex:
    """Embed every chunk text into one matrix; order follows the input."""
    try:
        matrix = embed_many(provider, (c.text for c in chunks)).astype(np.float64)
    except MissingEmbeddingError as exc:
        for chunk in chunks:
            if key_hash(chunk.text).hex() == exc.key_hex:
                raise MissingEmbeddingError(
                    exc.key_hex, hint=f"chunk {chunk.doc_id}[{chunk.index}]"
                ) from exc
        raise
    return ChunkIndex(chunks, matrix)


def _cosine_against(index: ChunkIndex, vector: np.ndarray) -> np.ndarray:
    qnorm = float(np.linalg.norm(vector))
    scale = index.norms * qnorm
    dots = index.matrix @ vector
    # Zero vectors have no direction: similarity 0 instead of a division error.
    return np.where(scale > 0.0, dots / np.where(scale > 0.0, scale, 1.0), 0.0)


def judge_relevant(
    chunk_text: str,
    gold_context: list[str],
    f1_threshold: float = DEFAULT_F1_THRESHOLD,
    use_substring: bool = True,
    use_overlap: bool = True,
) -> bool:
    """True when any gold sentence appears in the chunk, by either prong.

    Prong one: the normalized gold sentence is a substring of the
    normalized chunk text. Prong two: token multiset overlap with some
    equal-length token window of the chunk reaches an F1 of f1_threshold.
    Gold sentences that normalize to nothing never match.
    """
    norm_chunk = normalize_for_match(chunk_text)
    chunk_tokens = tokenize(chunk_text)
    for gold in gold_context:
        norm_gold = normalize_for_match(gold)
        if not norm_gold:
            continue
        if use_substring and norm_gold in norm_chunk:
            return True
        if not use_overlap:
            continue
        gold_tokens = tokenize(gold)
        m = len(gold_tokens)
        if m == 0 or m > len(chunk_tokens):
            continue
        # Equal-length windows make precision = recall, so F1 = overlap / m.
        needed = f1_threshold * m
        counts: dict[str, int] = {}
        for token in gold_tokens:
            counts[token] = counts.get(token, 0) + 1
        window: dict[str, int] = {}
        overlap = 0
        for i, token in enumerate(chunk_tokens):
            window[token] = window.get(token, 0) + 1
            if window[token] <= counts.get(token, 0):
                overlap += 1
            if i >= m:
                old = chunk_tokens[i - m]
                if window[old] <= counts.get(old, 0):
                    overlap -= 1
                window[old] -= 1
            if i >= m - 1 and overlap >= needed:
                return True
    return False


def query(
    index: ChunkIndex,
    question: str,
    provider: EmbeddingProvider,
    k: int = 5,
    qid: str = "",
    gold_context: list[str] | None = None,
    f1_threshold: float = DEFAULT_F1_THRESHOLD,
) -> RetrievalResult:
    """Top-k chunks by cosine similarity, ties broken by entry order.

    query_time_s spans question embedding through ranking; judging the
    ranked chunks against gold context happens off the clock.
    """
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    start = time.perf_counter()
    vector = provider.embed(question).astype(np.float64)
    sims = _cosine_against(index, vector)
    order = np.argsort(-sims, kind="stable")[:k]
    elapsed = time.perf_counter() - start

    ranks = [
        (index.chunks[int(i)].doc_id, index.chunks[int(i)].index, float(sims[int(i)]))
        for i in order
    ]
    first_relevant = None
    if gold_context is not None:
        for position, i in enumerate(order, start=1):
            if judge_relevant(index.chunks[int(i)].text, gold_context, f1_threshold):
                first_relevant = position
                break
    return RetrievalResult(qid, ranks, first_relevant, elapsed)


def evaluate_retrieval(
    results: list[RetrievalResult], ks=DEFAULT_KS, include_timing: bool = True
) -> dict:
    """Hits@k, MRR, and query-time stats over per-query results.

    MRR counts 1/first_relevant_rank, zero for queries with nothing
    relevant in their ranking.
    """
    summary: dict = {"n_queries": len(results)}
    if results:
        fr = [r.first_relevant_rank for r in results]
        for k in ks:
            summary[f"hits_at_{k}"] = float(
                np.mean([1.0 if rank is not None and rank <= k else 0.0 for rank in fr])
            )
        summary["mrr"] = float(
            np.mean([1.0 / rank if rank is not None else 0.0 for rank in fr])
        )
    else:
        for k in ks:
            summary[f"hits_at_{k}"] = 0.0
        summary["mrr"] = 0.0
    if include_timing:
        times = np.array([r.query_time_s for r in results], dtype=np.float64)
        if times.size:
            summary["mean_query_time_s"] = float(times.mean())
            summary["median_query_time_s"] = float(np.median(times))
            summary["p95_query_time_s"] = float(np.percentile(times, 95))
        else:
            summary["mean_query_time_s"] = 0.0
            summary["median_query_time_s"] = 0.0
            summary["p95_query_time_s"] = 0.0
    return summary


def run_retrieval(
    chunks: list[Chunk],
    qa_records: list[QARecord],
    provider: EmbeddingProvider,
    ks=DEFAULT_KS,
    k: int | None = None,
    f1_threshold: float = DEFAULT_F1_THRESHOLD,
    include_timing: bool = True,
) -> tuple[list[RetrievalResult], dict]:
    """Index once, answer every question, and aggregate the metrics."""
    index = build_index(chunks, provider)
    if k is None:
        k = max(list(ks) + [5])
    results = [
        query(
            index,
            record.question,
            provider,
            k,
            qid=record.pubid,
            gold_context=record.gold_context,
            f1_threshold=f1_threshold,
        )
        for record in qa_records
    ]
    return results, evaluate_retrieval(results, ks, include_timing)


def save_results(results: list[RetrievalResult], path: str) -> None:
    write_jsonl(
        path,
        (
            {
                "qid": r.qid,
                "ranks": [
                    {"doc_id": doc_id, "index": index, "score": score}
                    for doc_id, index, score in r.ranks
                ],
                "first_relevant_rank": r.first_relevant_rank,
                "query_time_s": r.query_time_s,
            }
            for r in results
        ),
    )


def load_results(path: str) -> list[RetrievalResult]:
    results: list[RetrievalResult] = []
    for lineno, raw in read_jsonl(path):
        qid = raw.get("qid")
        if not (isinstance(qid, str) and qid != ""):
            raise ValidationError(f"record {lineno}: missing or empty field 'qid'")
        raw_ranks = raw.get("ranks")
        if not isinstance(raw_ranks, list):
            raise ValidationError(f"record {lineno}: field 'ranks' must be a list")
        ranks: list[tuple[str, int, float]] = []
        for ri, entry in enumerate(raw_ranks):
            ok = (
                isinstance(entry, dict)
                and isinstance(entry.get("doc_id"), str)
                and entry.get("doc_id") != ""
                and type(entry.get("index")) is int
                and entry.get("index") >= 0
                and isinstance(entry.get("score"), (int, float))
            )
            if not ok:
                raise ValidationError(f"record {lineno}: rank {ri} is malformed")
            ranks.append((entry["doc_id"], entry["index"], float(entry["score"])))
        fr = raw.get("first_relevant_rank")
        if fr is not None and (type(fr) is not int or fr < 1):
            raise ValidationError(
                f"record {lineno}: field 'first_relevant_rank' must be null or a positive integer"
            )
        qt = raw.get("query_time_s")
        if not isinstance(qt, (int, float)) or qt < 0:
            raise ValidationError(f"record {lineno}: field 'query_time_s' must be non-negative")
        results.append(RetrievalResult(qid, ranks, fr, float(qt)))
    return results
