"""Tests for JATS cleaning and the document / QA JSONL formats."""

import pytest

from conftest import jats_article
from segrag.corpus import (
    QARecord,
    clean_jats,
    load_documents,
    load_qa_records,
    save_documents,
    save_qa_records,
)
from segrag.errors import EmptyDocumentError, ValidationError, XmlParseError


def test_abstract_and_body_sections_in_order():
    xml = jats_article(
        "PMC100",
        [
            ("Methods", ["We measured things. Twice in fact."]),
            ("Results", ["Values rose. Values fell."]),
        ],
        abstract="A short summary. It has two sentences.",
    )
    doc = clean_jats(xml)
    assert doc.id == "PMC100"
    assert [s.title for s in doc.sections] == ["abstract", "Methods", "Results"]
    assert doc.sections[0].sentences == ["A short summary.", "It has two sentences."]
    assert doc.sections[1].sentences == ["We measured things.", "Twice in fact."]
    assert doc.all_sentences()[-1] == "Values fell."


def test_single_sentence_body_survives_intact():
    xml = jats_article("PMC1", [("Only", ["One sentence stands alone here."])])
    doc = clean_jats(xml)
    assert len(doc.sections) == 1
    assert doc.sections[0].sentences == ["One sentence stands alone here."]


def test_excluded_elements_never_leak():
    sentinels = {
        "fig": "FIGSENTINEL",
        "table-wrap": "TABLESENTINEL",
        "caption": "CAPTIONSENTINEL",
        "ref-list": "REFLISTSENTINEL",
        "ref": "REFSENTINEL",
        "app": "APPSENTINEL",
        "app-group": "APPGROUPSENTINEL",
        "supplementary-material": "SUPPSENTINEL",
        "graphic": "GRAPHICSENTINEL",
        "media": "MEDIASENTINEL",
    }
    extra = "".join(f"<{tag}><p>{text}</p></{tag}>" for tag, text in sentinels.items())
    xml = jats_article(
        "PMC2",
        [("Body", ["Real text stays. More real text follows."])],
        abstract="Kept abstract text.",
        body_extra=f"<sec><title>Extras</title>{extra}</sec>",
    )
    doc = clean_jats(xml)
    joined = " ".join(doc.all_sentences())
    for text in sentinels.values():
        assert text not in joined
    assert "Real text stays." in doc.all_sentences()


def test_tail_text_after_pruned_element_is_preserved():
    xml = jats_article(
        "PMC3",
        [("S", [])],
        body_extra=(
            "<sec><p>Alpha keeps going "
            "<fig><caption><p>FIGSENTINEL</p></caption></fig>"
            "after the figure. Next sentence here.</p></sec>"
        ),
    )
    doc = clean_jats(xml)
    sentences = doc.all_sentences()
    assert sentences == ["Alpha keeps going after the figure.", "Next sentence here."]


def test_nested_sections_flatten_in_preorder():
    xml = jats_article(
        "PMC4",
        [],
        body_extra=(
            "<sec><title>Outer</title><p>Outer text first.</p>"
            "<sec><title>Inner</title><p>Inner text second.</p></sec></sec>"
            "<sec><title>After</title><p>Trailing text third.</p></sec>"
        ),
    )
    doc = clean_jats(xml)
    assert [s.title for s in doc.sections] == ["Outer", "Inner", "After"]
    assert [s.sentences[0] for s in doc.sections] == [
        "Outer text first.",
        "Inner text second.",
        "Trailing text third.",
    ]


def test_untitled_section_gets_none_title():
    xml = jats_article("PMC5", [(None, ["Text without a heading."])])
    doc = clean_jats(xml)
    assert doc.sections[0].title is None


def test_abstract_without_paragraph_elements():
    xml = (
        b"<article><front><article-meta>"
        b'<article-id pub-id-type="pmc">PMC6</article-id>'
        b"<abstract>Bare abstract text. Second sentence.</abstract>"
        b"</article-meta></front>"
        b"<body><sec><p>Body text stays.</p></sec></body></article>"
    )
    doc = clean_jats(xml)
    assert doc.sections[0].sentences == ["Bare abstract text.", "Second sentence."]


def test_namespaced_tags_are_recognized():
    xml = (
        b'<article xmlns="https://jats.example/ns"><front><article-meta>'
        b'<article-id pub-id-type="pmc">PMC7</article-id>'
        b"</article-meta></front>"
        b"<body><sec><title>T</title><p>Namespaced text here.</p></sec></body></article>"
    )
    doc = clean_jats(xml)
    assert doc.id == "PMC7"
    assert doc.sections[0].sentences == ["Namespaced text here."]


def test_id_precedence_pmc_over_pmid_over_doi():
    def with_ids(ids):
        id_xml = "".join(
            f'<article-id pub-id-type="{kind}">{value}</article-id>'
            for kind, value in ids
        )
        return (
            f"<article><front><article-meta>{id_xml}</article-meta></front>"
            "<body><sec><p>Text here.</p></sec></body></article>"
        ).encode()

    assert clean_jats(with_ids([("doi", "d"), ("pmid", "p"), ("pmc", "c")])).id == "c"
    assert clean_jats(with_ids([("doi", "d"), ("pmid", "p")])).id == "p"
    assert clean_jats(with_ids([("doi", "d")])).id == "d"
    assert clean_jats(with_ids([("other", "x")])).id == "x"


def test_missing_id_uses_fallback_then_errors():
    xml = jats_article(None, [("S", ["Some text here."])])
    assert clean_jats(xml, fallback_id="file-stem").id == "file-stem"
    with pytest.raises(ValidationError):
        clean_jats(xml)


def test_malformed_xml_raises_parse_error_with_offset():
    with pytest.raises(XmlParseError) as excinfo:
        clean_jats(b"<article><body>broken")
    assert excinfo.value.byte_offset is not None
    assert "byte offset" in str(excinfo.value)


def test_document_without_content_raises_empty():
    xml = (
        b"<article><front><article-meta>"
        b'<article-id pub-id-type="pmc">PMC8</article-id>'
        b"</article-meta></front><body/></article>"
    )
    with pytest.raises(EmptyDocumentError):
        clean_jats(xml)


def test_whitespace_is_collapsed_in_sentences():
    xml = jats_article("PMC9", [("S", ["Spread   out\n\ttext here."])])
    doc = clean_jats(xml)
    assert doc.sections[0].sentences == ["Spread out text here."]


# JSONL round-trips and validation


def test_documents_round_trip(tmp_path):
    xml = jats_article(
        "PMC10",
        [("A", ["First one. Second one."]), (None, ["Third one."])],
        abstract="Abstract line.",
    )
    docs = [clean_jats(xml)]
    path = str(tmp_path / "docs.jsonl")
    save_documents(docs, path)
    loaded = load_documents(path)
    assert loaded == docs


@pytest.mark.parametrize(
    "record",
    [
        '{"sections": [{"title": null, "sentences": ["a b."]}]}',
        '{"id": "", "sections": [{"title": null, "sentences": ["a b."]}]}',
        '{"id": "d", "sections": []}',
        '{"id": "d", "sections": [{"title": 3, "sentences": ["a b."]}]}',
        '{"id": "d", "sections": [{"title": null, "sentences": []}]}',
        '{"id": "d", "sections": [{"title": null, "sentences": ["  "]}]}',
        '{"id": "d", "sections": [{"title": null, "sentences": [5]}]}',
        "[1, 2]",
        "not json",
    ],
)
def test_document_schema_violations_raise(tmp_path, record):
    path = tmp_path / "docs.jsonl"
    path.write_text(record + "\n", encoding="utf-8")
    with pytest.raises(ValidationError, match="record 1"):
        load_documents(str(path))


def test_blank_lines_are_skipped(tmp_path):
    path = tmp_path / "docs.jsonl"
    path.write_text(
        '\n{"id": "d", "sections": [{"title": null, "sentences": ["a b."]}]}\n\n',
        encoding="utf-8",
    )
    assert len(load_documents(str(path))) == 1


def test_qa_records_round_trip(tmp_path):
    records = [
        QARecord("q1", "What rose?", ["Values rose."], "The values rose."),
        QARecord("q2", "What fell?", [], "Nothing fell."),
    ]
    path = str(tmp_path / "qa.jsonl")
    save_qa_records(records, path)
    assert load_qa_records(path) == records


@pytest.mark.parametrize(
    "record",
    [
        '{"question": "q?", "long_answer": "a"}',
        '{"pubid": "p", "long_answer": "a"}',
        '{"pubid": "p", "question": "q?", "long_answer": "  "}',
        '{"pubid": "p", "question": "q?", "long_answer": "a", "gold_context": "notalist"}',
        '{"pubid": "p", "question": "q?", "long_answer": "a", "gold_context": [1]}',
    ],
)
def test_qa_schema_violations_raise(tmp_path, record):
    path = tmp_path / "qa.jsonl"
    path.write_text(record + "\n", encoding="utf-8")
    with pytest.raises(ValidationError, match="record 1"):
        load_qa_records(str(path))
