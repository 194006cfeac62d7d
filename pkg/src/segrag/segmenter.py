"""Rule-based sentence segmentation for scientific prose.

Splits on ``.``, ``!`` or ``?`` when followed by whitespace and an
uppercase letter or digit, with an abbreviation stop-list and a no-split
rule inside parentheses or brackets. Deterministic and dependency-free;
adequate for cleaned article text, not meant for arbitrary language.
"""

from dataclasses import dataclass

TERMINATORS = ".!?"
OPEN_BRACKETS = "([{"
CLOSE_BRACKETS = ")]}"

# Matched case-sensitively against the text ending at the period, on a word
# boundary. "No." is deliberately not matched lowercase: "The answer is no."
# is a real sentence end.
ABBREVIATIONS = ("Dr.", "Fig.", "et al.", "e.g.", "i.e.", "vs.", "No.")

MIN_SENTENCE_CHARS = 2


@dataclass(frozen=True)
class SentenceSpan:
    """Half-open [start, end) character span into the source paragraph."""

    start: int
    end: int
    text: str


def _is_abbreviation(text: str, dot_index: int) -> bool:
    """True if the period at dot_index closes a stop-listed abbreviation."""
    head = text[: dot_index + 1]
    for abbrev in ABBREVIATIONS:
        if head.endswith(abbrev):
            before = dot_index - len(abbrev)
            if before < 0 or text[before].isspace():
                return True
    return False


def _boundary_positions(paragraph: str) -> list[int]:
    """Indices one past each terminator run that ends a sentence."""
    boundaries = []
    depth = 0
    n = len(paragraph)
    i = 0
    while i < n:
        ch = paragraph[i]
        if ch in OPEN_BRACKETS:
            depth += 1
        elif ch in CLOSE_BRACKETS:
            depth = max(0, depth - 1)
        elif ch in TERMINATORS:
            run_start = i
            while i + 1 < n and paragraph[i + 1] in TERMINATORS:
                i += 1
            # Walk past whitespace to the character that would start the
            # next sentence.
            j = i + 1
            while j < n and paragraph[j].isspace():
                j += 1
            starts_new = j < n and j > i + 1 and (paragraph[j].isupper() or paragraph[j].isdigit())
            if (
                starts_new
                and depth == 0
                and not (
                    i == run_start
                    and paragraph[i] == "."
                    and _is_abbreviation(paragraph, i)
                )
            ):
                boundaries.append(i + 1)
        i += 1
    return boundaries


def split_sentences(paragraph: str) -> list[SentenceSpan]:
    """Split a paragraph into ordered, non-overlapping sentence spans.

    Every character of the paragraph lands in exactly one span or in the
    whitespace between spans. Fragments shorter than MIN_SENTENCE_CHARS are
    merged into the neighboring span rather than emitted on their own.
    """
    segments: list[tuple[int, int]] = []
    cursor = 0
    for boundary in _boundary_positions(paragraph):
        segments.append((cursor, boundary))
        cursor = boundary
    segments.append((cursor, len(paragraph)))

    trimmed: list[tuple[int, int]] = []
    for start, end in segments:
        while start < end and paragraph[start].isspace():
            start += 1
        while end > start and paragraph[end - 1].isspace():
            end -= 1
        if start < end:
            trimmed.append((start, end))

    # Merge short fragments into the previous span (or the next, for a
    # short fragment at the very front).
    merged: list[tuple[int, int]] = []
    for start, end in trimmed:
        if merged and end - start < MIN_SENTENCE_CHARS:
            merged[-1] = (merged[-1][0], end)
        elif merged and merged[-1][1] - merged[-1][0] < MIN_SENTENCE_CHARS:
            merged[-1] = (merged[-1][0], end)
        else:
            merged.append((start, end))

    return [SentenceSpan(start, end, paragraph[start:end]) for start, end in merged]
