"""Command-line exporter: sentences in, embedding cache out."""

import argparse
import sys

from .cache import key_hash, read_header, write_cache
from .encoders import load_encoder
from .errors import CacheFormatError, DimensionMismatchError, ExportError

E5_PREFIXES = {"query": "query: ", "passage": "passage: ", "none": ""}


def read_sentences(path: str) -> list[str]:
    """One sentence per line, order preserved; blank lines are skipped."""
    sentences = []
    with open(path, "r", encoding="utf-8") as handle:
        for line in handle:
            text = line.rstrip("\n")
            if text.strip():
                sentences.append(text)
    return sentences


def default_prefix_mode(model_name: str) -> str:
    # The e5 family was trained with role prefixes; other encoders were not.
    return "passage" if "e5" in model_name.lower() else "none"


def export(model: str, in_path: str, out_path: str, batch: int = 64,
           e5_prefix: str | None = None) -> int:
    """Embed every unique sentence of in_path into out_path. Returns the count.

    The prefix (if any) is applied only to the text the encoder sees; cache
    keys always hash the original sentence, which is what consumers look up.
    Re-exporting over an existing cache of the same dimension overwrites it;
    a differing dimension is refused rather than silently mixed.
    """
    encoder = load_encoder(model, batch_size=batch)
    try:
        existing_dim, _ = read_header(out_path)
    except FileNotFoundError:
        pass
    except CacheFormatError:
        pass  # not a cache; treat as a plain output path to overwrite
    else:
        if existing_dim != encoder.dimension:
            raise DimensionMismatchError(
                f"{out_path} holds dimension-{existing_dim} vectors but "
                f"{model} produces dimension {encoder.dimension}; refusing to mix"
            )
    unique_texts = []
    seen = set()
    for text in read_sentences(in_path):
        key = key_hash(text)
        if key not in seen:
            seen.add(key)
            unique_texts.append(text)
    prefix = E5_PREFIXES[e5_prefix if e5_prefix is not None else default_prefix_mode(model)]
    if unique_texts:
        vectors = encoder.encode([prefix + text for text in unique_texts])
        if vectors.shape != (len(unique_texts), encoder.dimension):
            raise ExportError(
                f"encoder returned shape {vectors.shape}, expected "
                f"({len(unique_texts)}, {encoder.dimension})"
            )
    else:
        import numpy as np

        vectors = np.zeros((0, encoder.dimension), dtype=np.float32)
    return write_cache(out_path, unique_texts, vectors, encoder.dimension)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="embed-export",
        description="Export sentence embeddings to a binary cache file.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    exp = sub.add_parser("export", help="embed a sentence list into a cache file")
    exp.add_argument("--model", required=True,
                     help="sentence-transformers model name, or hashed:<dim>[:<seed>]")
    exp.add_argument("--in", dest="in_path", required=True, metavar="SENTENCES",
                     help="input text file, one sentence per line")
    exp.add_argument("--out", dest="out_path", required=True, metavar="CACHE",
                     help="output cache path")
    exp.add_argument("--batch", type=int, default=64, help="encoder batch size")
    exp.add_argument("--e5-prefix", choices=sorted(E5_PREFIXES), default=None,
                     help="role prefix fed to e5-style encoders "
                          "(default: passage for e5 models, none otherwise)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        count = export(args.model, args.in_path, args.out_path,
                       batch=args.batch, e5_prefix=args.e5_prefix)
    except (ExportError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    print(f"exported {count} vector(s) -> {args.out_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
