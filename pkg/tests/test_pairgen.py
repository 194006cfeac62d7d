"""Tests for labeled sentence-pair generation."""

import logging

import pytest

import synth
from segrag.corpus import Document, Section
from segrag.errors import EmptyDatasetError, InsufficientSectionsError, ValidationError
from segrag.pairgen import (
    SentencePair,
    build_dataset,
    document_rng,
    load_pairs,
    negative_pairs,
    positive_pairs,
    save_pairs,
)


def doc_of(doc_id, *sections):
    return Document(doc_id, [Section(f"s{i}", list(s)) for i, s in enumerate(sections)])


def test_positive_pairs_hand_enumeration():
    doc = doc_of("d", ["s1.", "s2.", "s3."], ["s4.", "s5."])
    pairs = positive_pairs(doc)
    assert [(p.a, p.b) for p in pairs] == [("s1.", "s2."), ("s2.", "s3."), ("s4.", "s5.")]
    assert all(p.label == 1 and p.doc_id == "d" for p in pairs)


def test_single_sentence_sections_contribute_no_positives():
    assert positive_pairs(doc_of("d", ["only one."])) == []
    assert len(positive_pairs(doc_of("d", ["a."], ["b.", "c."]))) == 1


def test_negative_pairs_come_from_the_cross_section_pool():
    doc = doc_of("d", ["s1.", "s2."], ["s3."])
    pairs = negative_pairs(doc, 2, seed=0)
    assert len(pairs) == 2
    allowed = {("s1.", "s3."), ("s2.", "s3.")}
    assert {(p.a, p.b) for p in pairs} <= allowed
    assert all(p.label == 0 for p in pairs)


def test_negative_pairs_without_replacement_until_pool_exhausted():
    doc = doc_of("d", ["s1.", "s2."], ["s3."])
    pairs = negative_pairs(doc, 2, seed=0)
    # Pool has exactly 2 candidates, so 2 draws must both appear once.
    assert len({(p.a, p.b) for p in pairs}) == 2
    # Beyond the pool, sampling continues with replacement inside it.
    many = negative_pairs(doc, 10, seed=0)
    assert len(many) == 10
    assert {(p.a, p.b) for p in many} <= {("s1.", "s3."), ("s2.", "s3.")}


def test_negative_pairs_are_deterministic():
    doc = doc_of("d", ["s1.", "s2.", "s3."], ["s4.", "s5."], ["s6."])
    assert negative_pairs(doc, 5, seed=9) == negative_pairs(doc, 5, seed=9)
    assert negative_pairs(doc, 5, seed=9) != negative_pairs(doc, 5, seed=10)


def test_single_section_document_cannot_supply_negatives():
    with pytest.raises(InsufficientSectionsError):
        negative_pairs(doc_of("d", ["s1.", "s2."]), 1, seed=0)


def test_sentence_repeated_across_sections_is_never_a_negative():
    doc = doc_of("d", ["dup.", "a1."], ["dup.", "b1."])
    pairs = negative_pairs(doc, 6, seed=0)
    # "dup." co-occurs with everything, so only (a1., b1.) survives.
    assert {(p.a, p.b) for p in pairs} == {("a1.", "b1.")}


def test_two_sections_sharing_all_sentences_raise():
    doc = doc_of("d", ["dup."], ["dup.", "dup."])
    with pytest.raises(InsufficientSectionsError, match="no pair"):
        negative_pairs(doc, 1, seed=0)


def test_no_negative_co_occurs_in_any_section():
    docs = synth.training_corpus(seed=0, n_docs=10)
    for doc in docs:
        memberships = {}
        for si, section in enumerate(doc.sections):
            for sentence in section.sentences:
                memberships.setdefault(sentence, set()).add(si)
        for pair in negative_pairs(doc, 50, seed=0):
            assert memberships[pair.a].isdisjoint(memberships[pair.b])


def test_document_rng_depends_on_seed_and_id():
    a = document_rng(0, "x").integers(0, 1 << 30)
    assert a == document_rng(0, "x").integers(0, 1 << 30)
    assert a != document_rng(1, "x").integers(0, 1 << 30)
    assert a != document_rng(0, "y").integers(0, 1 << 30)


def test_build_dataset_balance_and_ratio():
    docs = synth.training_corpus(seed=0, n_docs=20)
    balanced = build_dataset(docs, neg_ratio=1.0, seed=0)
    positives = sum(p.label for p in balanced)
    assert positives * 2 == len(balanced)
    doubled = build_dataset(docs, neg_ratio=2.0, seed=0)
    assert sum(p.label for p in doubled) * 3 == len(doubled)


def test_build_dataset_skips_undersectioned_documents(caplog):
    docs = synth.training_corpus(seed=0, n_docs=5)
    lonely = doc_of("lonely", ["a.", "b.", "c."])
    with caplog.at_level(logging.WARNING):
        pairs = build_dataset(docs + [lonely], neg_ratio=1.0, seed=0)
    assert "lonely" in caplog.text
    assert all(p.doc_id != "lonely" for p in pairs)
    # Skipping drops the document's positives too, keeping balance exact.
    assert sum(p.label for p in pairs) * 2 == len(pairs)


def test_build_dataset_is_order_independent_per_document():
    docs = synth.training_corpus(seed=0, n_docs=6)
    forward = build_dataset(docs, neg_ratio=1.0, seed=3)
    backward = build_dataset(list(reversed(docs)), neg_ratio=1.0, seed=3)
    keyfn = lambda p: (p.doc_id, p.a, p.b, p.label)
    assert sorted(forward, key=keyfn) == sorted(backward, key=keyfn)


def test_build_dataset_shuffle_is_seeded():
    docs = synth.training_corpus(seed=0, n_docs=6)
    assert build_dataset(docs, seed=3) == build_dataset(docs, seed=3)
    assert build_dataset(docs, seed=3) != build_dataset(docs, seed=4)


def test_build_dataset_with_nothing_usable_raises():
    only_single = [doc_of("d1", ["a.", "b."]), doc_of("d2", ["c."])]
    with pytest.raises(EmptyDatasetError):
        build_dataset(only_single, neg_ratio=1.0, seed=0)


def test_pairs_round_trip(tmp_path):
    pairs = [
        SentencePair("d1", "first a.", "first b.", 1),
        SentencePair("d2", "second a.", "second b.", 0),
    ]
    path = str(tmp_path / "pairs.jsonl")
    save_pairs(pairs, path)
    assert load_pairs(path) == pairs


@pytest.mark.parametrize(
    "record",
    [
        '{"a": "x", "b": "y", "label": 1}',
        '{"doc_id": "d", "a": "", "b": "y", "label": 1}',
        '{"doc_id": "d", "a": "x", "b": "y", "label": 2}',
        '{"doc_id": "d", "a": "x", "b": "y", "label": "1"}',
        '{"doc_id": "d", "a": "x", "b": "y", "label": 1.0}',
        '{"doc_id": "d", "a": "x", "b": "y", "label": true}',
    ],
)
def test_pair_schema_violations_raise(tmp_path, record):
    path = tmp_path / "pairs.jsonl"
    path.write_text(record + "\n", encoding="utf-8")
    with pytest.raises(ValidationError, match="record 1"):
        load_pairs(str(path))
