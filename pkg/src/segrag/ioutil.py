"""File I/O helpers shared across the package: atomic writes and JSONL.

Every writer goes through a temporary sibling file plus os.replace, so a
crash mid-write never leaves a truncated artifact behind.
"""

import json
import os
import tempfile
from typing import Iterable, Iterator

from .errors import ValidationError


def _atomic(path: str, mode: str, write) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, mode, encoding=None if "b" in mode else "utf-8") as handle:
            write(handle)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_bytes(path: str, data: bytes) -> None:
    _atomic(path, "wb", lambda handle: handle.write(data))


def atomic_write_text(path: str, text: str) -> None:
    _atomic(path, "w", lambda handle: handle.write(text))


def atomic_write_lines(path: str, lines: Iterable[str]) -> None:
    def write(handle):
        for line in lines:
            handle.write(line)
            handle.write("\n")

    _atomic(path, "w", write)


def write_jsonl(path: str, objs: Iterable[dict]) -> None:
    atomic_write_lines(path, (json.dumps(obj, ensure_ascii=False) for obj in objs))


def read_jsonl(path: str) -> Iterator[tuple[int, dict]]:
    """Yield (line number, object) for each non-blank line of a JSONL file.

    Raises ValidationError on malformed JSON or a non-object line, naming
    the offending record.
    """
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, 1):
            line = line.strip()
            if not line:
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"record {lineno}: invalid JSON: {exc}") from exc
            if not isinstance(raw, dict):
                raise ValidationError(f"record {lineno}: not an object")
            yield lineno, raw
