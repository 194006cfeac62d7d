"""Small text helpers shared by several modules.

Tokenization here is the single definition used by the generation metrics,
the relevance judge, and the deterministic test encoder, so scores stay
reproducible bit-for-bit.
"""

import re
import unicodedata

_TOKEN_RE = re.compile(r"[0-9a-z]+")
_TERMINAL_PUNCT_RE = re.compile(r"[.!?…]+$")


def collapse_whitespace(text: str) -> str:
    """Collapse internal whitespace runs to single spaces and trim the ends."""
    return " ".join(text.split())


def canonical_key_text(text: str) -> str:
    """NFC-normalized, whitespace-collapsed form used for embedding-cache keys."""
    return collapse_whitespace(unicodedata.normalize("NFC", text))


def tokenize(text: str) -> list[str]:
    """Case-fold and split on non-alphanumeric runs."""
    return _TOKEN_RE.findall(text.casefold())


def normalize_for_match(text: str) -> str:
    """Case-fold, collapse whitespace, and strip terminal punctuation."""
    return _TERMINAL_PUNCT_RE.sub("", collapse_whitespace(text.casefold()))
