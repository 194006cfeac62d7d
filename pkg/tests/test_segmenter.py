"""Tests for the rule-based sentence segmenter."""

from hypothesis import given
from hypothesis import strategies as st

from segrag.segmenter import split_sentences


def texts(spans):
    return [s.text for s in spans]


def test_two_plain_sentences():
    assert texts(split_sentences("A result. Another result.")) == [
        "A result.",
        "Another result.",
    ]


def test_abbreviations_and_decimals_do_not_split():
    spans = split_sentences("Dr. Smith et al. measured pH 7.4. Values rose.")
    assert texts(spans) == ["Dr. Smith et al. measured pH 7.4.", "Values rose."]


def test_stop_list_is_case_sensitive_for_no():
    assert texts(split_sentences("Sample No. 5 was used. It failed.")) == [
        "Sample No. 5 was used.",
        "It failed.",
    ]
    # Lowercase "no." is a real sentence end, not the abbreviation.
    assert texts(split_sentences("The answer is no. It failed.")) == [
        "The answer is no.",
        "It failed.",
    ]


def test_no_split_inside_brackets():
    spans = split_sentences("The result (see Fig. 2. Panel B) holds. Next claim follows.")
    assert texts(spans) == [
        "The result (see Fig. 2. Panel B) holds.",
        "Next claim follows.",
    ]


def test_terminator_runs_split_once():
    assert texts(split_sentences("Really?! Yes indeed.")) == ["Really?!", "Yes indeed."]


def test_split_requires_upper_or_digit_after_terminator():
    # Lowercase continuation stays in one sentence.
    assert texts(split_sentences("it stopped. then resumed.")) == [
        "it stopped. then resumed."
    ]
    assert texts(split_sentences("Step one. 2 follows.")) == ["Step one.", "2 follows."]


def test_short_trailing_fragment_merges():
    spans = split_sentences("Word one. X")
    assert texts(spans) == ["Word one. X"]


def test_empty_and_whitespace_input():
    assert split_sentences("") == []
    assert split_sentences("   \t ") == []


def test_spans_index_into_source():
    paragraph = "First point here. Second point there.  Third one."
    spans = split_sentences(paragraph)
    assert len(spans) == 3
    for span in spans:
        assert paragraph[span.start : span.end] == span.text


SEG_ALPHABET = "abcXYZ019 .!?()[]"


@given(st.text(alphabet=SEG_ALPHABET, max_size=80))
def test_spans_ordered_and_cover_all_nonspace(paragraph):
    spans = split_sentences(paragraph)
    pos = 0
    for span in spans:
        assert span.start < span.end
        assert span.start >= pos
        assert paragraph[span.start : span.end] == span.text
        # Anything between spans is whitespace.
        assert paragraph[pos : span.start].strip() == ""
        pos = span.end
    assert paragraph[pos:].strip() == ""


@given(st.text(alphabet=SEG_ALPHABET, max_size=80))
def test_resplitting_an_emitted_sentence_is_stable(paragraph):
    for span in split_sentences(paragraph):
        assert len(split_sentences(span.text)) == 1
