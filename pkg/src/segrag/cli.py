"""Command-line pipeline: clean, pairs, train, chunk, eval, bench.

Every subcommand is deterministic given its inputs and seed: files are
written atomically, JSON key order is fixed, and randomness always flows
from an explicit seed. Exit codes: 0 success, 2 usage, 3 data or input
error, 4 numeric divergence during training.
"""

import argparse
import concurrent.futures
import json
import logging
import os
import sys

import numpy as np

from . import boundary, chunkers, corpus, evalmetrics, pairgen, retrieval
from .embedding import open_cache, test_encoder
from .errors import ConfigError, DivergenceError, SegragError
from .ioutil import atomic_write_text, write_jsonl

log = logging.getLogger(__name__)

DEFAULT_SEED = 42


def make_provider(spec: str):
    """Parse a provider spec: test:<dim>:<seed> or cache:<path>."""
    if spec.startswith("test:"):
        parts = spec.split(":")
        if len(parts) != 3:
            raise ConfigError(f"test provider must be test:<dim>:<seed>, got {spec!r}")
        try:
            dimension, seed = int(parts[1]), int(parts[2])
        except ValueError:
            raise ConfigError(f"test provider must be test:<dim>:<seed>, got {spec!r}") from None
        return test_encoder(dimension, seed)
    if spec.startswith("cache:"):
        return open_cache(spec[len("cache:") :])
    raise ConfigError(f"provider must be test:<dim>:<seed> or cache:<path>, got {spec!r}")


def _thread_count() -> int:
    raw = os.environ.get("SEGRAG_THREADS", "").strip()
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(f"SEGRAG_THREADS must be an integer, got {raw!r}") from None


def _print_json(payload: dict) -> None:
    print(json.dumps(payload, indent=2))


def _write_json(path: str | None, payload: dict) -> None:
    if path:
        atomic_write_text(path, json.dumps(payload, indent=2) + "\n")


def cmd_clean(args) -> int:
    names = sorted(
        name
        for name in os.listdir(args.xml_dir)
        if name.endswith((".xml", ".nxml"))
    )
    if not names:
        raise ConfigError(f"no .xml or .nxml files in {args.xml_dir}")

    def clean_one(name: str) -> corpus.Document:
        with open(os.path.join(args.xml_dir, name), "rb") as handle:
            data = handle.read()
        stem = name.rsplit(".", 1)[0]
        return corpus.clean_jats(data, fallback_id=stem)

    threads = _thread_count()
    if threads > 1:
        # Map preserves submission order, so output is deterministic
        # regardless of completion order.
        with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as pool:
            docs = list(pool.map(clean_one, names))
    else:
        docs = [clean_one(name) for name in names]
    corpus.save_documents(docs, args.out)
    print(f"cleaned {len(docs)} document(s) -> {args.out}")
    return 0


def cmd_pairs(args) -> int:
    docs = corpus.load_documents(args.docs)
    pairs = pairgen.build_dataset(docs, neg_ratio=args.neg_ratio, seed=args.seed)
    pairgen.save_pairs(pairs, args.out)
    positives = sum(p.label for p in pairs)
    print(f"wrote {len(pairs)} pair(s) ({positives} positive) -> {args.out}")
    return 0


def cmd_train(args) -> int:
    pairs = pairgen.load_pairs(args.pairs)
    provider = make_provider(args.provider)
    model = boundary.init_model(args.variant, provider.dimension, seed=args.seed)
    history = boundary.train(
        model,
        pairs,
        provider,
        epochs=args.epochs,
        batch_size=args.batch,
        lr=args.lr,
        seed=args.seed,
        progress=lambda rec: log.info(
            "epoch %d train_loss %.6f holdout_acc %.4f",
            rec["epoch"], rec["train_loss"], rec["holdout_acc"],
        ),
    )
    boundary.save_model(model, args.out)
    if args.log:
        write_jsonl(args.log, history)
    best = max((rec["holdout_acc"] for rec in history), default=float("nan"))
    print(
        f"trained {args.variant} model d={model.dimension} on {len(pairs)} pair(s), "
        f"best holdout_acc {best:.4f} -> {args.out}"
    )
    return 0


def _chunker_config(args) -> chunkers.ChunkerConfig:
    return chunkers.ChunkerConfig(
        kind=args.chunker,
        size=args.size,
        overlap=args.overlap,
        window=args.window,
        window_overlap=args.window_overlap,
        percentile=args.percentile,
        unit=args.unit,
        max_sentences=args.max_sentences,
    )


def cmd_chunk(args) -> int:
    docs = corpus.load_documents(args.docs)
    config = _chunker_config(args)
    chunkers.validate_config(config)
    provider = None
    model = None
    if config.kind in ("cosine", "model"):
        if not args.provider:
            raise ConfigError(f"--provider is required for the {config.kind} chunker")
        provider = make_provider(args.provider)
    if config.kind == "model":
        if not args.model:
            raise ConfigError("--model is required for the model chunker")
        model = boundary.load_model(args.model)
    all_chunks: list[chunkers.Chunk] = []
    for doc in docs:
        all_chunks.extend(chunkers.chunk_document(doc, config, provider, model))
    chunkers.save_chunks(all_chunks, args.out)
    mean_tokens = chunkers.mean_token_count(all_chunks)
    print(
        f"wrote {len(all_chunks)} chunk(s) from {len(docs)} document(s), "
        f"mean_tokens {mean_tokens:.1f} -> {args.out}"
    )
    return 0


def cmd_eval_retrieval(args) -> int:
    chunks = chunkers.load_chunks(args.chunks)
    qa = corpus.load_qa_records(args.qa)
    provider = make_provider(args.provider)
    results, summary = retrieval.run_retrieval(
        chunks,
        qa,
        provider,
        ks=args.k,
        f1_threshold=args.relevance_f1,
        include_timing=not args.no_timing,
    )
    if args.results:
        retrieval.save_results(results, args.results)
    _write_json(args.summary, summary)
    _print_json(summary)
    return 0


def cmd_eval_generation(args) -> int:
    answers = evalmetrics.load_answers(args.answers)
    references = evalmetrics.answers_from_records(corpus.load_qa_records(args.qa))
    rows, aggregate = evalmetrics.score_answers(answers, references)
    report = evalmetrics.report_dict(rows, aggregate)
    _write_json(args.out, report)
    _print_json({"n_scored": len(rows), "aggregate": report["aggregate"]})
    return 0


def cmd_bench(args) -> int:
    chunks = chunkers.load_chunks(args.chunks)
    qa = corpus.load_qa_records(args.qa)
    provider = make_provider(args.provider)
    index = retrieval.build_index(chunks, provider)
    times: list[float] = []
    for _ in range(args.repeats):
        for record in qa:
            result = retrieval.query(index, record.question, provider, k=args.top_k)
            times.append(result.query_time_s)
    arr = np.array(times, dtype=np.float64)
    summary = {
        "n_chunks": len(chunks),
        "n_queries": len(qa),
        "repeats": args.repeats,
        "mean_query_time_s": float(arr.mean()) if arr.size else 0.0,
        "median_query_time_s": float(np.median(arr)) if arr.size else 0.0,
        "p95_query_time_s": float(np.percentile(arr, 95)) if arr.size else 0.0,
    }
    _write_json(args.out, summary)
    _print_json(summary)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="segrag",
        description="Section-aware chunking and retrieval evaluation pipeline.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("clean", help="clean a directory of JATS XML into document JSONL")
    p.add_argument("xml_dir", help="directory containing .xml/.nxml files")
    p.add_argument("out", help="output document JSONL path")
    p.set_defaults(func=cmd_clean)

    p = sub.add_parser("pairs", help="generate labeled sentence pairs from documents")
    p.add_argument("docs", help="document JSONL path")
    p.add_argument("out", help="output pair JSONL path")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED, help="sampling seed (default 42)")
    p.add_argument(
        "--neg-ratio", type=float, default=1.0,
        help="negatives per positive, per document (default 1.0)",
    )
    p.set_defaults(func=cmd_pairs)

    p = sub.add_parser("train", help="train a boundary model on sentence pairs")
    p.add_argument("pairs", help="pair JSONL path")
    p.add_argument("out", help="output model path")
    p.add_argument("--provider", required=True, help="test:<dim>:<seed> or cache:<path>")
    p.add_argument(
        "--variant", choices=boundary.VARIANTS, default=boundary.VARIANT_PROJECTED,
        help="model variant (default projected)",
    )
    p.add_argument("--epochs", type=int, default=5, help="training epochs (default 5)")
    p.add_argument("--batch", type=int, default=256, help="minibatch size (default 256)")
    p.add_argument("--lr", type=float, default=1e-3, help="learning rate (default 1e-3)")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED, help="training seed (default 42)")
    p.add_argument("--log", help="optional path for the per-epoch training log JSONL")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("chunk", help="chunk documents with a chosen strategy")
    p.add_argument("docs", help="document JSONL path")
    p.add_argument("out", help="output chunk JSONL path")
    p.add_argument(
        "--chunker", choices=chunkers.KINDS, default="model", help="strategy (default model)"
    )
    p.add_argument("--size", type=int, default=1000, help="window size in units (default 1000)")
    p.add_argument("--overlap", type=int, default=200, help="window overlap in units (default 200)")
    p.add_argument(
        "--unit", choices=("token", "char"), default="token",
        help="measuring unit for fixed/recursive (default token)",
    )
    p.add_argument("--window", type=int, default=3, help="sentences per window (default 3)")
    p.add_argument(
        "--window-overlap", type=int, default=1, help="sentence window overlap (default 1)"
    )
    p.add_argument(
        "--percentile", type=float, default=95.0,
        help="cosine distance split percentile (default 95)",
    )
    p.add_argument(
        "--max-sentences", type=int, default=None,
        help="optional cap on sentences per chunk for model/cosine (default off)",
    )
    p.add_argument("--provider", help="embedding provider for cosine/model chunkers")
    p.add_argument("--model", help="trained model path for the model chunker")
    p.set_defaults(func=cmd_chunk)

    p = sub.add_parser("eval-retrieval", help="retrieve over chunks and score against QA gold")
    p.add_argument("chunks", help="chunk JSONL path")
    p.add_argument("qa", help="QA JSONL path")
    p.add_argument("--provider", required=True, help="test:<dim>:<seed> or cache:<path>")
    p.add_argument("--k", type=int, nargs="+", default=[3, 5], help="Hits@k cutoffs (default 3 5)")
    p.add_argument(
        "--relevance-f1", type=float, default=retrieval.DEFAULT_F1_THRESHOLD,
        help="token-overlap F1 threshold for relevance (default 0.8)",
    )
    p.add_argument("--results", help="optional per-query results JSONL path")
    p.add_argument("--summary", help="optional summary JSON path")
    p.add_argument(
        "--no-timing", action="store_true",
        help="omit timing keys so summaries are byte-identical across runs",
    )
    p.set_defaults(func=cmd_eval_retrieval)

    p = sub.add_parser("eval-generation", help="score generated answers against gold answers")
    p.add_argument("answers", help="answers JSONL path")
    p.add_argument("qa", help="QA JSONL path")
    p.add_argument("--out", help="optional report JSON path")
    p.set_defaults(func=cmd_eval_generation)

    p = sub.add_parser("bench", help="measure query latency over a chunk index")
    p.add_argument("chunks", help="chunk JSONL path")
    p.add_argument("qa", help="QA JSONL path")
    p.add_argument("--provider", required=True, help="test:<dim>:<seed> or cache:<path>")
    p.add_argument("--repeats", type=int, default=3, help="passes over the query set (default 3)")
    p.add_argument("--top-k", type=int, default=5, help="chunks retrieved per query (default 5)")
    p.add_argument("--out", help="optional summary JSON path")
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(
        stream=sys.stderr, level=logging.INFO, format="%(levelname)s %(name)s: %(message)s"
    )
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DivergenceError as exc:
        print(f"error: divergence: {exc}", file=sys.stderr)
        return 4
    except SegragError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
