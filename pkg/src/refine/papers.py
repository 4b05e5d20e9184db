"""TEI paper ingestion.

Parses GROBID TEI XML into a structured document, extracts the
six-dimension design context and the paper's design implications via the
model provider, and assembles the record that feeds the vector index.
"""

from __future__ import annotations

import hashlib
import logging
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from pathlib import Path

from .context import DIMENSIONS, DesignContext
from .errors import EmptyBodyError, SchemaError, SchemaVersionError, XmlParseError
from .prompts import system_instruction
from .providers import ProviderRequest, SchemaHint, TextPart, call, parse_structured

logger = logging.getLogger(__name__)

RECORD_SCHEMA_VERSION = 1

# Section kinds. When a document exceeds the token budget, back matter is
# dropped first, then figure/table captions; front and body stay.
SECTION_KINDS = ("front", "body", "back", "figure")

# Budget for the document text sent to the model, in whitespace-separated
# words (a cheap token proxy).
DEFAULT_TOKEN_BUDGET = 12000

_XML_ID = "{http://www.w3.org/XML/1998/namespace}id"


@dataclass(frozen=True)
class Paragraph:
    para_key: str
    text: str


@dataclass(frozen=True)
class Section:
    heading: str
    kind: str  # one of SECTION_KINDS
    paragraphs: tuple[Paragraph, ...]


@dataclass(frozen=True)
class PaperDoc:
    """A parsed paper: ordered sections of key-addressable paragraphs."""

    paper_id: str
    title: str
    sections: tuple[Section, ...]
    source_path: str = ""

    def paragraph(self, para_key: str) -> Paragraph | None:
        for section in self.sections:
            for para in section.paragraphs:
                if para.para_key == para_key:
                    return para
        return None

    def all_paragraphs(self) -> list[Paragraph]:
        return [p for s in self.sections for p in s.paragraphs]


@dataclass(frozen=True)
class DesignImplication:
    """One actionable takeaway, tied to the paragraph it was drawn from."""

    implication_id: str
    paper_id: str
    text: str
    source_paragraph: str
    rationale_tags: tuple[str, ...] = ()
    para_key: str | None = None

    def to_dict(self) -> dict:
        return {
            "implication_id": self.implication_id,
            "paper_id": self.paper_id,
            "text": self.text,
            "source_paragraph": self.source_paragraph,
            "rationale_tags": list(self.rationale_tags),
            "para_key": self.para_key,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DesignImplication":
        return cls(
            implication_id=data["implication_id"],
            paper_id=data["paper_id"],
            text=data["text"],
            source_paragraph=data["source_paragraph"],
            rationale_tags=tuple(data.get("rationale_tags") or ()),
            para_key=data.get("para_key"),
        )


@dataclass(frozen=True)
class PaperRecord:
    """A fully ingested paper: document + context + implications."""

    doc: PaperDoc
    context: DesignContext
    implications: tuple[DesignImplication, ...]

    @property
    def paper_id(self) -> str:
        return self.doc.paper_id

    @property
    def excluded_from_index(self) -> bool:
        # Papers with no present dimension never enter the retrieval index.
        return not self.context.present_dimensions()

    def to_dict(self) -> dict:
        return {
            "schema_version": RECORD_SCHEMA_VERSION,
            "paper_id": self.doc.paper_id,
            "title": self.doc.title,
            "source_path": self.doc.source_path,
            "sections": [
                {
                    "heading": s.heading,
                    "kind": s.kind,
                    "paragraphs": [
                        {"para_key": p.para_key, "text": p.text} for p in s.paragraphs
                    ],
                }
                for s in self.doc.sections
            ],
            "context": self.context.to_dict(),
            "implications": [imp.to_dict() for imp in self.implications],
            "excluded_from_index": self.excluded_from_index,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PaperRecord":
        version = data.get("schema_version")
        if version != RECORD_SCHEMA_VERSION:
            raise SchemaVersionError(
                f"unsupported paper record schema_version {version!r}")
        doc = PaperDoc(
            paper_id=data["paper_id"],
            title=data["title"],
            sections=tuple(
                Section(
                    heading=s["heading"],
                    kind=s["kind"],
                    paragraphs=tuple(
                        Paragraph(para_key=p["para_key"], text=p["text"])
                        for p in s["paragraphs"]
                    ),
                )
                for s in data["sections"]
            ),
            source_path=data.get("source_path", ""),
        )
        return cls(
            doc=doc,
            context=DesignContext.from_dict(data["context"]),
            implications=tuple(
                DesignImplication.from_dict(d) for d in data["implications"]
            ),
        )


def _local(tag) -> str:
    if not isinstance(tag, str):  # comments / processing instructions
        return ""
    return tag.rsplit("}", 1)[-1]


def _collapse(text: str) -> str:
    return " ".join(text.split())


def _element_text(elem) -> str:
    return _collapse("".join(elem.itertext()))


def _paragraphs_in(elem, skip=("figure", "note", "listBibl")) -> list[tuple[str, str | None]]:
    """Collect (text, xml:id) for every <p> under elem, skipping embedded
    figures, notes and bibliographies (captured separately)."""
    found: list[tuple[str, str | None]] = []

    def walk(node):
        name = _local(node.tag)
        if name in skip and node is not elem:
            return
        if name == "p":
            text = _element_text(node)
            if text:
                found.append((text, node.get(_XML_ID)))
            return
        for child in node:
            walk(child)

    walk(elem)
    return found


def _heading_of(div) -> str:
    for child in div:
        if _local(child.tag) == "head":
            return _element_text(child)
    return ""


def _figure_sections(elem) -> list[tuple[str, str, list[tuple[str, str | None]]]]:
    sections = []
    for fig in elem.iter():
        if _local(fig.tag) != "figure":
            continue
        heading = _heading_of(fig) or "Figure"
        paras = []
        for node in fig.iter():
            if _local(node.tag) == "figDesc":
                text = _element_text(node)
                if text:
                    paras.append((text, node.get(_XML_ID)))
        if paras:
            sections.append((heading, "figure", paras))
    return sections


def _bibliography_paragraphs(div) -> list[tuple[str, str | None]]:
    paras = []
    for node in div.iter():
        if _local(node.tag) == "listBibl":
            for entry in node:
                if _local(entry.tag) in ("bibl", "biblStruct"):
                    text = _element_text(entry)
                    if text:
                        paras.append((text, entry.get(_XML_ID)))
    return paras


def parse_tei(xml_bytes: bytes, source_path: str = "") -> PaperDoc:
    """Parse GROBID TEI XML into a PaperDoc.

    Namespace-agnostic (matches on local tag names). Paragraphs keep their
    xml:id when present; otherwise they get a synthetic
    "<section-index>.<paragraph-index>" key. Raises XmlParseError on
    malformed input and EmptyBodyError when no body paragraphs exist.
    """
    try:
        root = ET.fromstring(xml_bytes)
    except ET.ParseError as exc:
        raise XmlParseError(f"not well-formed TEI XML: {exc}") from None

    # (heading, kind, [(text, xml_id)]) in document order: header abstract,
    # front divs, body divs with their figures, back matter.
    raw: list[tuple[str, str, list[tuple[str, str | None]]]] = []

    title = ""
    for elem in root.iter():
        if _local(elem.tag) == "titleStmt":
            for sub in elem.iter():
                if _local(sub.tag) == "title" and _element_text(sub):
                    title = _element_text(sub)
                    break
            if title:
                break

    for elem in root.iter():
        if _local(elem.tag) == "teiHeader":
            for sub in elem.iter():
                if _local(sub.tag) == "abstract":
                    paras = _paragraphs_in(sub)
                    if not paras and _element_text(sub):
                        paras = [(_element_text(sub), None)]
                    if paras:
                        raw.append(("Abstract", "front", paras))
            break

    text_elem = next((e for e in root.iter() if _local(e.tag) == "text"), None)
    front = body = back = None
    if text_elem is not None:
        for child in text_elem:
            name = _local(child.tag)
            if name == "front":
                front = child
            elif name == "body":
                body = child
            elif name == "back":
                back = child

    if front is not None:
        for child in front:
            if _local(child.tag) == "div":
                paras = _paragraphs_in(child)
                if paras:
                    raw.append((_heading_of(child), "front", paras))

    if body is not None:
        stray = _paragraphs_in(body, skip=("figure", "note", "listBibl", "div"))
        if stray:
            raw.append(("", "body", stray))
        for child in body:
            name = _local(child.tag)
            if name == "div":
                paras = _paragraphs_in(child)
                if paras:
                    raw.append((_heading_of(child), "body", paras))
                raw.extend(_figure_sections(child))
            elif name == "figure":
                raw.extend(_figure_sections(child))

    if back is not None:
        for child in back:
            if _local(child.tag) != "div":
                continue
            heading = _heading_of(child) or (child.get("type") or "").capitalize()
            paras = _paragraphs_in(child) + _bibliography_paragraphs(child)
            if paras:
                raw.append((heading or "Back matter", "back", paras))

    if not any(kind == "body" for _, kind, _ in raw):
        raise EmptyBodyError("no body paragraphs found")

    seen_keys: set[str] = set()
    sections = []
    for si, (heading, kind, paras) in enumerate(raw):
        paragraphs = []
        for pi, (text, xml_id) in enumerate(paras):
            key = xml_id or f"{si}.{pi}"
            while key in seen_keys:
                key = key + "+"
            seen_keys.add(key)
            paragraphs.append(Paragraph(para_key=key, text=text))
        sections.append(Section(heading=heading, kind=kind, paragraphs=tuple(paragraphs)))

    return PaperDoc(
        paper_id=hashlib.sha256(xml_bytes).hexdigest()[:16],
        title=title,
        sections=tuple(sections),
        source_path=source_path,
    )


def _word_count(text: str) -> int:
    return len(text.split())


def document_text(doc: PaperDoc, token_budget: int = DEFAULT_TOKEN_BUDGET) -> str:
    """Render the document for a model prompt.

    Each paragraph is prefixed with its para_key so responses can cite it;
    each section carries its kind so prompts can steer extraction away from
    front/back matter. Over budget, back matter goes first, then figure
    captions, then trailing paragraphs.
    """
    for kinds in (
        ("front", "body", "back", "figure"),
        ("front", "body", "figure"),
        ("front", "body"),
    ):
        text = _render(doc, kinds)
        if _word_count(text) <= token_budget:
            return text

    # Still over: cut paragraphs from the end, always keeping the first.
    lines = [f"Title: {doc.title}".rstrip()]
    used = _word_count(lines[0])
    kept_any = False
    for section in doc.sections:
        if section.kind not in ("front", "body"):
            continue
        header = f"## {section.heading or '(untitled section)'} [{section.kind}]"
        pending = ["", header]
        pending_cost = _word_count(header)
        for para in section.paragraphs:
            line = f"[{para.para_key}] {para.text}"
            cost = _word_count(line)
            if kept_any and used + pending_cost + cost > token_budget:
                return "\n".join(lines)
            lines.extend(pending)
            used += pending_cost
            pending, pending_cost = [], 0
            lines.append(line)
            used += cost
            kept_any = True
    return "\n".join(lines)


def _render(doc: PaperDoc, kinds) -> str:
    lines = [f"Title: {doc.title}".rstrip()]
    for section in doc.sections:
        if section.kind not in kinds:
            continue
        lines.append("")
        lines.append(f"## {section.heading or '(untitled section)'} [{section.kind}]")
        for para in section.paragraphs:
            lines.append(f"[{para.para_key}] {para.text}")
    return "\n".join(lines)


_CONTEXT_HINT = SchemaHint(
    description=(
        "JSON object with exactly the keys target_user, domain, modality, "
        "pain_point, client, metric; each value a short string, or null when "
        "the paper does not establish that dimension"
    ),
    kind="object",
    required_keys=DIMENSIONS,
)


def extract_paper_context(doc: PaperDoc, provider) -> DesignContext:
    """One chat call mapping the document onto the six context dimensions.

    An all-absent result is valid (the indexing layer excludes such papers).
    """
    request = ProviderRequest(
        kind="chat",
        stage="paper_context",
        system_instruction=system_instruction("paper_context"),
        user_parts=(TextPart(document_text(doc)),),
        response_schema_hint=_CONTEXT_HINT.description,
    )
    response = call(request, provider)
    payload = parse_structured(response.text, _CONTEXT_HINT)
    for name in DIMENSIONS:
        value = payload.get(name)
        if value is not None and not isinstance(value, str):
            raise SchemaError(f"dimension {name} must be a string or null",
                              span=str(payload)[:200])
    return DesignContext.from_dict(payload, origin="paper")


_IMPLICATIONS_HINT = SchemaHint(
    description=(
        "JSON array (possibly empty) of objects with keys text, "
        "source_paragraph, rationale_tags (array of strings), para_key "
        "(string or null)"
    ),
    kind="array",
    required_keys=("text", "source_paragraph"),
)


def _normalize(text: str) -> str:
    return " ".join(text.split()).casefold()


def _locate(doc: PaperDoc, source_paragraph: str, para_key_hint) -> str | None:
    """Find the paragraph containing source_paragraph; returns its para_key.

    Falls back to whole-document containment (source text spanning
    paragraph boundaries); returns None when the text is nowhere in the
    document.
    """
    needle = _normalize(source_paragraph)
    if not needle:
        return None
    if isinstance(para_key_hint, str):
        hinted = doc.paragraph(para_key_hint)
        if hinted is not None and needle in _normalize(hinted.text):
            return hinted.para_key
    for para in doc.all_paragraphs():
        if needle in _normalize(para.text):
            return para.para_key
    document = _normalize(" ".join(p.text for p in doc.all_paragraphs()))
    if needle in document:
        if isinstance(para_key_hint, str) and doc.paragraph(para_key_hint):
            return para_key_hint
        return ""
    return None


def _implication_id(paper_id: str, text: str, source_paragraph: str) -> str:
    payload = "\x1f".join((paper_id, _normalize(text), _normalize(source_paragraph)))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


def extract_implications(doc: PaperDoc, provider) -> list[DesignImplication]:
    """One chat call extracting design implications from the document.

    Implications whose quoted source paragraph cannot be located in the
    document (substring containment after whitespace collapsing and case
    folding) are dropped with a warning. An empty result is valid.
    """
    request = ProviderRequest(
        kind="chat",
        stage="paper_implications",
        system_instruction=system_instruction("paper_implications"),
        user_parts=(TextPart(document_text(doc)),),
        response_schema_hint=_IMPLICATIONS_HINT.description,
    )
    response = call(request, provider)
    payload = parse_structured(response.text, _IMPLICATIONS_HINT)

    out: list[DesignImplication] = []
    seen_ids: set[str] = set()
    for item in payload:
        text = item.get("text")
        source = item.get("source_paragraph")
        if not isinstance(text, str) or not text.strip():
            raise SchemaError("implication text must be a non-empty string",
                              span=str(item)[:200])
        if not isinstance(source, str) or not source.strip():
            raise SchemaError("source_paragraph must be a non-empty string",
                              span=str(item)[:200])
        tags = item.get("rationale_tags") or []
        if not isinstance(tags, list) or any(not isinstance(t, str) for t in tags):
            raise SchemaError("rationale_tags must be an array of strings",
                              span=str(item)[:200])
        para_key_hint = item.get("para_key")
        if para_key_hint is not None and not isinstance(para_key_hint, str):
            raise SchemaError("para_key must be a string or null",
                              span=str(item)[:200])

        located = _locate(doc, source, para_key_hint)
        if located is None:
            logger.warning(
                "paper %s: dropping implication whose source paragraph is not "
                "in the document: %.80s", doc.paper_id, source.strip())
            continue
        if _normalize(text) not in _normalize(source):
            # The model is allowed minor self-containment edits; record that
            # the wording diverged from the quoted source.
            logger.debug("paper %s: implication text edited relative to its "
                         "source paragraph", doc.paper_id)

        imp_id = _implication_id(doc.paper_id, text, source)
        if imp_id in seen_ids:
            logger.debug("paper %s: skipping duplicate implication", doc.paper_id)
            continue
        seen_ids.add(imp_id)
        out.append(DesignImplication(
            implication_id=imp_id,
            paper_id=doc.paper_id,
            text=text.strip(),
            source_paragraph=source.strip(),
            rationale_tags=tuple(t.strip() for t in tags if t.strip()),
            para_key=located or None,
        ))
    return out


def ingest_paper(xml_path, provider) -> PaperRecord:
    """Parse one TEI file and run both extraction stages.

    The record is keyed by a content hash, so re-ingesting the same bytes
    yields the same paper_id (downstream indexing replaces, not duplicates).
    """
    path = Path(xml_path)
    xml_bytes = path.read_bytes()
    doc = parse_tei(xml_bytes, source_path=str(path))
    context = extract_paper_context(doc, provider)
    implications = tuple(extract_implications(doc, provider))
    return PaperRecord(doc=doc, context=context, implications=implications)
