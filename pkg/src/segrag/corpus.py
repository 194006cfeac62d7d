"""Sectioned documents: JATS XML cleaning and the JSONL document format.

The cleaner keeps only the abstract and the main body text of an article,
dropping figures, tables, captions, reference lists, appendices and other
supplementary material, and flattens nested sections in pre-order. Section
structure is what the pair generator later uses for labels, so the cleaner
is conservative: it never invents sections and preserves source order.
"""

import xml.etree.ElementTree as ET
from dataclasses import dataclass, field

from .errors import EmptyDocumentError, ValidationError, XmlParseError
from .ioutil import read_jsonl, write_jsonl
from .segmenter import split_sentences
from .textutil import collapse_whitespace

# Standard JATS mapping of "figures, tables, captions, references,
# appendices, and other supplementary materials".
EXCLUDED_TAGS = frozenset(
    {
        "fig",
        "table-wrap",
        "caption",
        "ref-list",
        "ref",
        "app",
        "app-group",
        "supplementary-material",
        "graphic",
        "media",
    }
)

ABSTRACT_TITLE = "abstract"


@dataclass(frozen=True)
class Section:
    title: str | None
    sentences: list[str]


@dataclass(frozen=True)
class Document:
    id: str
    sections: list[Section]

    def all_sentences(self) -> list[str]:
        """Sentences of every section concatenated in document order."""
        out: list[str] = []
        for section in self.sections:
            out.extend(section.sentences)
        return out


@dataclass(frozen=True)
class QARecord:
    pubid: str
    question: str
    gold_context: list[str] = field(default_factory=list)
    long_answer: str = ""


def _local(tag) -> str:
    """Tag name with any XML namespace stripped."""
    if not isinstance(tag, str):
        return ""
    return tag.rsplit("}", 1)[-1]


def _prune_excluded(parent: ET.Element) -> None:
    """Remove excluded subtrees, keeping each removed element's tail text."""
    prev: ET.Element | None = None
    for child in list(parent):
        if _local(child.tag) in EXCLUDED_TAGS:
            tail = child.tail or ""
            if prev is not None:
                prev.tail = (prev.tail or "") + tail
            else:
                parent.text = (parent.text or "") + tail
            parent.remove(child)
        else:
            _prune_excluded(child)
            prev = child


def _byte_offset(data: bytes, line: int, column: int) -> int:
    """Approximate byte offset of a (1-based line, 0-based column) position."""
    offset = 0
    for _ in range(line - 1):
        nl = data.find(b"\n", offset)
        if nl < 0:
            break
        offset = nl + 1
    return offset + column


def _find_first(root: ET.Element, *path: str) -> ET.Element | None:
    """Descend through the first child matching each local name in path."""
    node: ET.Element | None = root
    for name in path:
        if node is None:
            return None
        node = next((c for c in node if _local(c.tag) == name), None)
    return node


def _paragraph_sentences(el: ET.Element) -> list[str]:
    text = collapse_whitespace("".join(el.itertext()))
    return [span.text for span in split_sentences(text)]


def _own_paragraphs(sec: ET.Element) -> list[ET.Element]:
    """<p> elements belonging to this section but not to a nested <sec>."""
    paras: list[ET.Element] = []
    for child in sec:
        name = _local(child.tag)
        if name in ("sec", "title", "label"):
            continue
        if name == "p":
            paras.append(child)
        else:
            paras.extend(d for d in child.iter() if _local(d.tag) == "p")
    return paras


def _section_title(sec: ET.Element) -> str | None:
    title_el = next((c for c in sec if _local(c.tag) == "title"), None)
    if title_el is None:
        return None
    title = collapse_whitespace("".join(title_el.itertext()))
    return title or None


def _flatten_sections(container: ET.Element, title: str | None, out: list[Section]) -> None:
    """Pre-order flattening: a section's own text, then its child sections."""
    sentences: list[str] = []
    for para in _own_paragraphs(container):
        sentences.extend(_paragraph_sentences(para))
    if sentences:
        out.append(Section(title=title, sentences=sentences))
    for child in container:
        if _local(child.tag) == "sec":
            _flatten_sections(child, _section_title(child), out)


def _extract_id(root: ET.Element) -> str | None:
    meta = _find_first(root, "front", "article-meta")
    if meta is None:
        return None
    ids = {}
    for el in meta:
        if _local(el.tag) == "article-id" and el.text and el.text.strip():
            ids[el.get("pub-id-type", "")] = el.text.strip()
    for kind in ("pmc", "pmid", "doi"):
        if kind in ids:
            return ids[kind]
    return next(iter(ids.values()), None)


def clean_jats(xml_bytes: bytes, fallback_id: str | None = None) -> Document:
    """Parse JATS XML into a Document of abstract plus body sections.

    All content under excluded elements (figures, tables, captions,
    references, appendices, supplementary material) is absent from the
    output. The abstract, when present, becomes section 0 titled
    "abstract"; body sections follow in pre-order with their titles.

    Raises XmlParseError on malformed input and EmptyDocumentError when the
    article has neither abstract nor body text.
    """
    try:
        root = ET.fromstring(xml_bytes)
    except ET.ParseError as exc:
        line, column = getattr(exc, "position", (1, 0))
        raise XmlParseError(str(exc), _byte_offset(xml_bytes, line, column)) from exc

    _prune_excluded(root)

    sections: list[Section] = []

    abstract = _find_first(root, "front", "article-meta", "abstract")
    if abstract is not None:
        sentences: list[str] = []
        paras = [d for d in abstract.iter() if _local(d.tag) == "p"]
        if paras:
            for para in paras:
                sentences.extend(_paragraph_sentences(para))
        else:
            text = collapse_whitespace("".join(abstract.itertext()))
            sentences = [span.text for span in split_sentences(text)]
        if sentences:
            sections.append(Section(title=ABSTRACT_TITLE, sentences=sentences))

    body = next((c for c in root.iter() if _local(c.tag) == "body"), None)
    if body is not None:
        _flatten_sections(body, None, sections)

    if not sections:
        raise EmptyDocumentError("no abstract and no body text after cleaning")

    doc_id = _extract_id(root) or fallback_id
    if not doc_id:
        raise ValidationError("document has no article-id and no fallback id was given")

    return Document(id=doc_id, sections=sections)


def save_documents(docs: list[Document], path: str) -> None:
    """Write documents as JSONL, one document per line."""
    write_jsonl(
        path,
        (
            {
                "id": doc.id,
                "sections": [
                    {"title": s.title, "sentences": s.sentences} for s in doc.sections
                ],
            }
            for doc in docs
        ),
    )


def _require(condition: bool, record: int, message: str) -> None:
    if not condition:
        raise ValidationError(f"record {record}: {message}")


def load_documents(path: str) -> list[Document]:
    """Read a document JSONL file, validating every record."""
    docs: list[Document] = []
    for lineno, raw in read_jsonl(path):
        doc_id = raw.get("id")
        _require(isinstance(doc_id, str) and doc_id != "", lineno, "missing or empty field 'id'")
        raw_sections = raw.get("sections")
        _require(
            isinstance(raw_sections, list) and len(raw_sections) > 0,
            lineno,
            "field 'sections' must be a non-empty list",
        )
        sections = []
        for si, raw_sec in enumerate(raw_sections):
            _require(isinstance(raw_sec, dict), lineno, f"section {si} is not an object")
            title = raw_sec.get("title")
            _require(
                title is None or isinstance(title, str),
                lineno,
                f"section {si}: field 'title' must be a string or null",
            )
            sentences = raw_sec.get("sentences")
            _require(
                isinstance(sentences, list) and len(sentences) > 0,
                lineno,
                f"section {si}: field 'sentences' must be a non-empty list",
            )
            for ti, sentence in enumerate(sentences):
                _require(
                    isinstance(sentence, str) and sentence.strip() != "",
                    lineno,
                    f"section {si}: sentence {ti} is empty or not a string",
                )
            sections.append(Section(title=title, sentences=list(sentences)))
        docs.append(Document(id=doc_id, sections=sections))
    return docs


def save_qa_records(records: list[QARecord], path: str) -> None:
    write_jsonl(
        path,
        (
            {
                "pubid": r.pubid,
                "question": r.question,
                "gold_context": r.gold_context,
                "long_answer": r.long_answer,
            }
            for r in records
        ),
    )


def load_qa_records(path: str) -> list[QARecord]:
    records: list[QARecord] = []
    for lineno, raw in read_jsonl(path):
        pubid = raw.get("pubid")
        _require(isinstance(pubid, str) and pubid != "", lineno, "missing or empty field 'pubid'")
        question = raw.get("question")
        _require(
            isinstance(question, str) and question.strip() != "",
            lineno,
            "missing or empty field 'question'",
        )
        answer = raw.get("long_answer")
        _require(
            isinstance(answer, str) and answer.strip() != "",
            lineno,
            "missing or empty field 'long_answer'",
        )
        gold = raw.get("gold_context", [])
        _require(
            isinstance(gold, list) and all(isinstance(s, str) for s in gold),
            lineno,
            "field 'gold_context' must be a list of strings",
        )
        records.append(
            QARecord(pubid=pubid, question=question, gold_context=list(gold), long_answer=answer)
        )
    return records
