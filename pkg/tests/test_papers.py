import json

import pytest

from corpus import make_tei
from stubmodel import ScriptedProvider

from refine.errors import EmptyBodyError, SchemaError, SchemaVersionError, XmlParseError
from refine.papers import (
    DesignImplication,
    PaperRecord,
    document_text,
    extract_implications,
    extract_paper_context,
    ingest_paper,
    parse_tei,
)

TEI = """<?xml version="1.0" encoding="UTF-8"?>
<TEI xmlns="http://www.tei-c.org/ns/1.0">
  <teiHeader>
    <fileDesc><titleStmt><title>Example Study</title></titleStmt></fileDesc>
    <profileDesc><abstract><p>Short abstract.</p></abstract></profileDesc>
  </teiHeader>
  <text>
    <body>
      <div>
        <head>Method</head>
        <p xml:id="m1">We interviewed twelve people with an ID.</p>
        <p>This paragraph has no ID at all.</p>
      </div>
      <div>
        <head>Results</head>
        <p xml:id="m1">Duplicate ID paragraph.</p>
      </div>
      <figure><figDesc>A study apparatus photo.</figDesc></figure>
    </body>
    <back>
      <div type="references">
        <listBibl>
          <bibl>Someone et al. 2019.</bibl>
          <biblStruct><title>Another entry</title></biblStruct>
        </listBibl>
      </div>
    </back>
  </text>
</TEI>
"""


class TestParseTei:
    def test_title_and_section_kinds(self):
        doc = parse_tei(TEI.encode())
        assert doc.title == "Example Study"
        kinds = [(s.heading, s.kind) for s in doc.sections]
        assert ("Abstract", "front") in kinds
        assert ("Method", "body") in kinds
        assert ("Figure", "figure") in kinds
        assert any(kind == "back" for _, kind in kinds)

    def test_authored_ids_kept_and_synthetic_assigned(self):
        doc = parse_tei(TEI.encode())
        keys = [p.para_key for p in doc.all_paragraphs()]
        assert "m1" in keys
        # second paragraph of the Method div has no xml:id
        method = next(s for s in doc.sections if s.heading == "Method")
        assert method.paragraphs[1].para_key.count(".") == 1

    def test_duplicate_id_disambiguated(self):
        doc = parse_tei(TEI.encode())
        keys = [p.para_key for p in doc.all_paragraphs()]
        assert "m1" in keys and "m1+" in keys
        assert len(keys) == len(set(keys))

    def test_bibliography_lands_in_back_matter(self):
        doc = parse_tei(TEI.encode())
        back = next(s for s in doc.sections if s.kind == "back")
        texts = [p.text for p in back.paragraphs]
        assert "Someone et al. 2019." in texts
        assert "Another entry" in texts

    def test_paper_id_is_a_content_hash(self):
        a = parse_tei(TEI.encode())
        b = parse_tei(TEI.encode())
        c = parse_tei(TEI.replace("twelve", "ten").encode())
        assert a.paper_id == b.paper_id
        assert a.paper_id != c.paper_id
        assert len(a.paper_id) == 16

    def test_malformed_xml(self):
        with pytest.raises(XmlParseError):
            parse_tei(b"<TEI><unclosed>")

    def test_empty_body(self):
        xml = b"""<TEI xmlns="http://www.tei-c.org/ns/1.0">
          <teiHeader><fileDesc><titleStmt><title>T</title></titleStmt></fileDesc></teiHeader>
          <text><body><div><head>Empty</head></div></body></text></TEI>"""
        with pytest.raises(EmptyBodyError):
            parse_tei(xml)

    def test_namespace_free_tei_also_parses(self):
        xml = b"""<TEI><teiHeader><fileDesc><titleStmt><title>Plain</title>
          </titleStmt></fileDesc></teiHeader>
          <text><body><div><p>One body paragraph.</p></div></body></text></TEI>"""
        doc = parse_tei(xml)
        assert doc.title == "Plain"
        assert doc.all_paragraphs()[0].text == "One body paragraph."


class TestDocumentText:
    def test_paragraphs_carry_their_keys(self):
        doc = parse_tei(TEI.encode())
        text = document_text(doc)
        assert text.startswith("Title: Example Study")
        assert "[m1] We interviewed twelve people with an ID." in text
        assert "## Method [body]" in text

    def test_budget_drops_back_matter_first(self):
        doc = parse_tei(TEI.encode())
        full = document_text(doc)
        words = len(full.split())
        trimmed = document_text(doc, token_budget=words - 1)
        assert "Someone et al. 2019." not in trimmed
        assert "[m1]" in trimmed

    def test_budget_drops_figures_after_back(self):
        doc = parse_tei(TEI.encode())
        no_back = document_text(doc, token_budget=len(document_text(doc).split()) - 1)
        trimmed = document_text(doc, token_budget=len(no_back.split()) - 1)
        assert "apparatus" not in trimmed
        assert "[m1]" in trimmed

    def test_extreme_budget_keeps_first_body_paragraph(self):
        doc = parse_tei(TEI.encode())
        tiny = document_text(doc, token_budget=1)
        assert "Short abstract." in tiny or "[m1]" in tiny


class TestContextExtraction:
    def test_marker_round_trip(self, stub):
        doc = parse_tei(make_tei(3, dims={
            "target_user": "nurses", "domain": "", "modality": "mobile app",
            "pain_point": "", "client": "", "metric": "error rate"}))
        ctx = extract_paper_context(doc, stub)
        assert ctx.target_user == "nurses"
        assert ctx.domain is None
        assert ctx.modality == "mobile app"
        assert ctx.metric == "error rate"
        assert ctx.origin == "paper"

    def test_non_string_dimension_rejected(self):
        doc = parse_tei(TEI.encode())
        provider = ScriptedProvider([json.dumps({
            "target_user": 7, "domain": None, "modality": None,
            "pain_point": None, "client": None, "metric": None})])
        with pytest.raises(SchemaError):
            extract_paper_context(doc, provider)

    def test_missing_dimension_key_rejected(self):
        doc = parse_tei(TEI.encode())
        provider = ScriptedProvider([json.dumps({"target_user": "x"})])
        with pytest.raises(SchemaError):
            extract_paper_context(doc, provider)


def _implications_response(entries):
    return [json.dumps(entries)]


class TestImplicationExtraction:
    def test_stub_extraction_locates_sources(self, stub):
        doc = parse_tei(make_tei(5, n_implications=2))
        imps = extract_implications(doc, stub)
        assert len(imps) == 2
        for imp in imps:
            assert imp.paper_id == doc.paper_id
            assert doc.paragraph(imp.para_key) is not None
            assert imp.text in imp.source_paragraph

    def test_unlocatable_source_dropped(self):
        doc = parse_tei(TEI.encode())
        provider = ScriptedProvider(_implications_response([
            {"text": "Do the thing.", "source_paragraph": "not in the document"},
            {"text": "We interviewed twelve people",
             "source_paragraph": "We interviewed twelve people with an ID."},
        ]))
        imps = extract_implications(doc, provider)
        assert len(imps) == 1
        assert imps[0].para_key == "m1"

    def test_location_is_case_and_whitespace_insensitive(self):
        doc = parse_tei(TEI.encode())
        provider = ScriptedProvider(_implications_response([
            {"text": "x", "source_paragraph": "WE  interviewed\nTWELVE people"},
        ]))
        imps = extract_implications(doc, provider)
        assert len(imps) == 1
        assert imps[0].para_key == "m1"

    def test_duplicates_collapse(self):
        doc = parse_tei(TEI.encode())
        entry = {"text": "x", "source_paragraph": "We interviewed twelve people"}
        provider = ScriptedProvider(_implications_response([entry, dict(entry)]))
        assert len(extract_implications(doc, provider)) == 1

    def test_ids_are_stable_content_hashes(self):
        doc = parse_tei(TEI.encode())
        entry = {"text": "x", "source_paragraph": "We interviewed twelve people"}
        a = extract_implications(doc, ScriptedProvider(_implications_response([entry])))
        b = extract_implications(doc, ScriptedProvider(_implications_response([entry])))
        assert a[0].implication_id == b[0].implication_id
        assert len(a[0].implication_id) == 16

    def test_empty_text_rejected(self):
        doc = parse_tei(TEI.encode())
        provider = ScriptedProvider(_implications_response([
            {"text": "  ", "source_paragraph": "We interviewed twelve people"}]))
        with pytest.raises(SchemaError):
            extract_implications(doc, provider)

    def test_empty_result_is_valid(self):
        doc = parse_tei(TEI.encode())
        assert extract_implications(doc, ScriptedProvider(["[]"])) == []


class TestRecordPersistence:
    def test_round_trip(self, stub, small_corpus):
        record = ingest_paper(small_corpus["papers"][0], stub)
        data = record.to_dict()
        clone = PaperRecord.from_dict(json.loads(json.dumps(data)))
        assert clone.to_dict() == data
        assert clone.paper_id == record.paper_id

    def test_excluded_flag_is_recomputed(self, stub, small_corpus):
        record = ingest_paper(small_corpus["papers"][-1], stub)  # all-absent
        data = record.to_dict()
        assert data["excluded_from_index"] is True
        data["excluded_from_index"] = False  # tampering must not matter
        assert PaperRecord.from_dict(data).excluded_from_index is True

    def test_schema_version_checked(self, stub, small_corpus):
        record = ingest_paper(small_corpus["papers"][0], stub)
        data = record.to_dict()
        data["schema_version"] = 99
        with pytest.raises(SchemaVersionError):
            PaperRecord.from_dict(data)

    def test_ingest_is_deterministic(self, stub, small_corpus):
        a = ingest_paper(small_corpus["papers"][1], stub)
        b = ingest_paper(small_corpus["papers"][1], stub)
        assert a.to_dict() == b.to_dict()
