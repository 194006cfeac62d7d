"""Shared fixtures and fixture builders for the test suite."""

import sys
from pathlib import Path

from hypothesis import HealthCheck, settings

from segrag.embedding import test_encoder

# Test modules import the synthetic-corpus helpers by plain name.
sys.path.insert(0, str(Path(__file__).parent))

# The encoder factory is a library function whose name matches the test
# collector's pattern; mark it as data, not a test.
test_encoder.__test__ = False

# Derandomized so the suite is a deterministic gate, not a moving target.
settings.register_profile(
    "suite",
    derandomize=True,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


def jats_article(pub_id, sections, abstract=None, body_extra="", id_kind="pmc"):
    """Minimal JATS article bytes with titled body sections.

    sections is a list of (title, paragraphs) tuples; each paragraph string
    becomes its own <p>. abstract, when given, is a single paragraph.
    body_extra is raw XML appended inside <body> for planting excluded
    elements. pub_id may be None to omit the article-id element.
    """
    id_xml = (
        f'<article-id pub-id-type="{id_kind}">{pub_id}</article-id>' if pub_id else ""
    )
    abstract_xml = f"<abstract><p>{abstract}</p></abstract>" if abstract else ""
    body_xml = "".join(
        "<sec>"
        + (f"<title>{title}</title>" if title else "")
        + "".join(f"<p>{p}</p>" for p in paragraphs)
        + "</sec>"
        for title, paragraphs in sections
    )
    return (
        "<article>"
        f"<front><article-meta>{id_xml}{abstract_xml}</article-meta></front>"
        f"<body>{body_xml}{body_extra}</body>"
        "</article>"
    ).encode("utf-8")
