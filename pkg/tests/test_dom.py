import pytest

from refine.errors import (
    FragmentParseError,
    HtmlParseError,
    InvalidReferenceError,
    SchemaError,
)
from refine.mockup.dom import (
    DomEdit,
    apply_edits,
    assign_ids,
    canonicalize,
    collect_ids,
    element_by_id,
    parse_document,
    parse_fragment,
    sanitize,
    serialize,
)

PAGE = """<!doctype html>
<html>
  <head>
    <title>Shift Notes</title>
  </head>
  <body id="b">
    <header id="h"><h1 id="t">Notes</h1></header>
    <main id="m">
      <p id="p1">First paragraph.</p>
      <p id="p2">Second <em id="em">useful</em> paragraph.</p>
    </main>
  </body>
</html>
"""


def _edit(**kwargs):
    defaults = {"rationale": "test"}
    defaults.update(kwargs)
    return DomEdit(**defaults)


class TestParse:
    def test_canonicalize_is_a_fixpoint(self):
        once = canonicalize(PAGE)
        assert canonicalize(once) == once

    def test_doctype_and_trailing_newline(self):
        out = canonicalize("<p>hi</p>")
        assert out.startswith("<!doctype html>\n")
        assert out.endswith("\n")

    def test_bare_content_gets_wrapped(self):
        out = canonicalize("<p>hi</p>")
        assert "<html>" in out and "<head>" in out and "<body>" in out

    def test_tag_and_attr_names_lowercased(self):
        out = canonicalize('<DIV CLASS="Big">x</DIV>')
        assert '<div class="Big">x</div>' in out

    def test_attrs_sorted_and_quoted(self):
        out = canonicalize('<p id=a class=b data-x=c>t</p>')
        assert '<p class="b" data-x="c" id="a">t</p>' in out

    def test_duplicate_attrs_first_wins(self):
        out = canonicalize('<p id="one" id="two">t</p>')
        assert 'id="one"' in out and "two" not in out

    def test_unclosed_tags_recovered(self):
        out = canonicalize("<div><p>alpha<p>beta</div>")
        assert out.count("<p>") == 2

    def test_stray_end_tag_ignored(self):
        assert "beta" in canonicalize("<div>beta</span></div>")

    def test_comments_dropped(self):
        assert "secret" not in canonicalize("<p>a<!-- secret --></p>")

    def test_entities_survive_round_trips(self):
        once = canonicalize("<p>a &lt; b &amp; c</p>")
        assert "a &lt; b &amp; c" in once
        assert canonicalize(once) == once

    def test_no_elements_at_all(self):
        with pytest.raises(HtmlParseError):
            parse_document("just text, no tags")

    def test_adjacent_text_merges(self):
        root = parse_document("<p>a&amp;b</p>")
        p = next(e for e in root.iter_elements() if e.tag == "p")
        assert len(p.children) == 1
        assert p.children[0].data == "a&b"


class TestSerializeShapes:
    def test_void_elements_have_no_close_tag(self):
        out = canonicalize('<div><br><img src="x.png"></div>')
        assert "<br>" in out and "</br>" not in out
        assert "</img>" not in out

    def test_raw_text_not_escaped_in_script(self):
        out = canonicalize("<script>if (a < b) { go(); }</script>")
        assert "if (a < b) { go(); }" in out

    def test_style_preserved_raw(self):
        out = canonicalize("<style>a > b { color: red; }</style>")
        assert "a > b { color: red; }" in out

    def test_pre_whitespace_kept(self):
        out = canonicalize("<pre>line one\n  line two</pre>")
        assert "line one\n  line two" in out

    def test_textarea_whitespace_kept(self):
        out = canonicalize("<textarea>  padded  </textarea>")
        assert ">  padded  </textarea>" in out

    def test_inline_text_collapses_whitespace(self):
        out = canonicalize("<p>spaced   out\n   text</p>")
        assert "<p>spaced out text</p>" in out

    def test_edge_whitespace_around_inline_children(self):
        out = canonicalize("<p>before <em>mid</em> after</p>")
        assert "<p>before <em>mid</em> after</p>" in out

    def test_block_children_indent_two_spaces(self):
        out = canonicalize("<div><section><p>x</p></section></div>")
        # html > body > div > section > p
        assert "\n      <section>\n        <p>x</p>\n      </section>" in out

    def test_empty_element_collapses_to_one_line(self):
        assert "<div></div>" in canonicalize("<div>   </div>")


class TestSanitize:
    def test_scripts_removed(self):
        root = parse_document("<div><script>evil()</script><p>ok</p></div>")
        warnings = sanitize(root)
        assert any("script" in w for w in warnings)
        assert "script" not in serialize(root)

    def test_event_handlers_removed(self):
        root = parse_document('<button onclick="fire()">Go</button>')
        warnings = sanitize(root)
        assert any("onclick" in w for w in warnings)
        assert "onclick" not in serialize(root)

    def test_external_urls_removed(self):
        root = parse_document('<img src="https://cdn.example/x.png">')
        sanitize(root)
        assert "cdn.example" not in serialize(root)

    def test_protocol_relative_url_removed(self):
        root = parse_document('<a href="//evil.example/x">x</a>')
        sanitize(root)
        assert "evil.example" not in serialize(root)

    def test_local_references_kept(self):
        root = parse_document('<a href="#main"><img src="local.png"></a>')
        assert sanitize(root) == []
        out = serialize(root)
        assert 'href="#main"' in out and 'src="local.png"' in out

    def test_css_imports_cut(self):
        root = parse_document(
            "<style>@import url(https://cdn.example/f.css); p { color: red; }</style>")
        warnings = sanitize(root)
        assert warnings
        assert "cdn.example" not in serialize(root)

    def test_inline_style_url_cut(self):
        root = parse_document(
            '<div style="background: url(https://cdn.example/bg.png)">x</div>')
        sanitize(root)
        assert "cdn.example" not in serialize(root)


class TestAssignIds:
    def test_preorder_numbering(self):
        root = parse_document("<div><p>a</p><p>b</p></div>")
        assign_ids(root)
        out = serialize(root)
        # html=e0, head=e1, body=e2, div=e3, p=e4, p=e5
        assert '<div id="e3">' in out
        assert '<p id="e4">a</p>' in out
        assert '<p id="e5">b</p>' in out

    def test_authored_ids_kept(self):
        root = parse_document('<div id="menu"><p>a</p></div>')
        warnings = assign_ids(root)
        assert warnings == []
        assert element_by_id(root, "menu") is not None

    def test_duplicate_authored_id_reassigned(self):
        root = parse_document('<div id="x"><p id="x">a</p></div>')
        warnings = assign_ids(root)
        assert any("duplicate" in w for w in warnings)
        ids = [el.attrs["id"] for el in root.iter_elements()]
        assert len(ids) == len(set(ids))

    def test_collision_with_authored_synthetic_name_probes_upward(self):
        # the anonymous second <p> lands at preorder index 4, already taken
        root = parse_document('<div><p id="e4">a</p><p>b</p></div>')
        assign_ids(root)
        second = [el for el in root.iter_elements() if el.tag == "p"][1]
        assert second.attrs["id"] == "e5"
        ids = [el.attrs["id"] for el in root.iter_elements()]
        assert len(ids) == len(set(ids))

    def test_idempotent(self):
        root = parse_document(PAGE)
        assign_ids(root)
        before = serialize(root)
        assert assign_ids(root) == []
        assert serialize(root) == before


class TestDomEditValidation:
    def test_round_trip(self):
        edit = _edit(op="add", reference_element_id="m",
                     edited_element="<aside>x</aside>", position="last_child")
        data = edit.to_dict()
        assert set(data) == {"op", "reference_element_id", "edited_element",
                             "position", "rationale"}
        assert DomEdit.from_dict(data) == edit

    def test_unknown_op(self):
        with pytest.raises(SchemaError, match="op"):
            DomEdit.from_dict({"op": "tweak", "reference_element_id": "m",
                               "rationale": "r"})

    def test_reference_id_required(self):
        with pytest.raises(SchemaError):
            DomEdit.from_dict({"op": "remove", "reference_element_id": "",
                               "rationale": "r"})

    def test_rationale_must_be_string(self):
        with pytest.raises(SchemaError):
            DomEdit.from_dict({"op": "remove", "reference_element_id": "m",
                               "rationale": 5})

    def test_add_requires_position_and_payload(self):
        with pytest.raises(SchemaError):
            DomEdit.from_dict({"op": "add", "reference_element_id": "m",
                               "edited_element": "<p>x</p>", "rationale": "r"})
        with pytest.raises(SchemaError):
            DomEdit.from_dict({"op": "add", "reference_element_id": "m",
                               "position": "after", "rationale": "r"})

    def test_add_rejects_unknown_position(self):
        with pytest.raises(SchemaError):
            DomEdit.from_dict({"op": "add", "reference_element_id": "m",
                               "edited_element": "<p>x</p>",
                               "position": "inside", "rationale": "r"})

    def test_replace_rejects_position(self):
        with pytest.raises(SchemaError):
            DomEdit.from_dict({"op": "replace", "reference_element_id": "m",
                               "edited_element": "<p>x</p>",
                               "position": "after", "rationale": "r"})

    def test_remove_rejects_payload(self):
        with pytest.raises(SchemaError):
            DomEdit.from_dict({"op": "remove", "reference_element_id": "m",
                               "edited_element": "<p>x</p>", "rationale": "r"})


class TestApplyEdits:
    def test_no_edits_is_canonicalization(self):
        assert apply_edits(PAGE, []) == canonicalize(PAGE)

    def test_replace_swaps_only_the_target(self):
        before = canonicalize(PAGE)
        after = apply_edits(PAGE, [_edit(
            op="replace", reference_element_id="p1",
            edited_element='<p id="p1">Rewritten.</p>')])
        assert '<p id="p1">Rewritten.</p>' in after
        assert "First paragraph." not in after
        # every other line survives byte for byte
        removed = [l for l in before.splitlines() if l not in after.splitlines()]
        assert removed == ['      <p id="p1">First paragraph.</p>']

    def test_remove_deletes_subtree(self):
        after = apply_edits(PAGE, [_edit(op="remove", reference_element_id="p2")])
        assert "Second" not in after and "useful" not in after
        assert '<p id="p1">' in after

    def test_add_before_and_after(self):
        after = apply_edits(PAGE, [
            _edit(op="add", reference_element_id="p1", position="before",
                  edited_element='<p id="pre">Lead.</p>'),
            _edit(op="add", reference_element_id="p2", position="after",
                  edited_element='<p id="post">Tail.</p>'),
        ])
        lines = [l.strip() for l in after.splitlines()]
        assert lines.index('<p id="pre">Lead.</p>') < lines.index(
            '<p id="p1">First paragraph.</p>')
        assert lines.index('<p id="post">Tail.</p>') > lines.index(
            '<p id="p2">Second <em id="em">useful</em> paragraph.</p>')

    def test_add_first_and_last_child(self):
        after = apply_edits(PAGE, [
            _edit(op="add", reference_element_id="m", position="first_child",
                  edited_element='<nav id="nav">Menu</nav>'),
            _edit(op="add", reference_element_id="m", position="last_child",
                  edited_element='<footer id="f">End</footer>'),
        ])
        lines = [l.strip() for l in after.splitlines()]
        main_open = lines.index('<main id="m">')
        main_close = lines.index("</main>")
        assert lines[main_open + 1] == '<nav id="nav">Menu</nav>'
        assert lines[main_close - 1] == '<footer id="f">End</footer>'

    def test_edits_apply_sequentially(self):
        after = apply_edits(PAGE, [
            _edit(op="add", reference_element_id="m", position="last_child",
                  edited_element='<p id="new">Fresh.</p>'),
            _edit(op="replace", reference_element_id="new",
                  edited_element='<p id="new">Fresher.</p>'),
        ])
        assert "Fresher." in after and "Fresh.<" not in after

    def test_unknown_reference(self):
        with pytest.raises(InvalidReferenceError) as err:
            apply_edits(PAGE, [_edit(op="remove", reference_element_id="ghost")])
        assert "ghost" in str(err.value)

    def test_cannot_remove_root(self):
        root_id = "e0"
        html = canonicalize("<html><body><p>x</p></body></html>")
        rooted = apply_edits(html, [])
        doc = parse_document(rooted)
        assign_ids(doc)
        with pytest.raises(InvalidReferenceError):
            apply_edits(serialize(doc), [_edit(op="remove",
                                               reference_element_id=root_id)])

    def test_cannot_insert_beside_root(self):
        doc = parse_document(PAGE)
        assign_ids(doc)
        root_id = doc.attrs["id"]
        with pytest.raises(InvalidReferenceError):
            apply_edits(serialize(doc), [_edit(
                op="add", reference_element_id=root_id, position="before",
                edited_element="<div>x</div>")])

    def test_replace_root_is_allowed(self):
        doc = parse_document(PAGE)
        assign_ids(doc)
        root_id = doc.attrs["id"]
        after = apply_edits(serialize(doc), [_edit(
            op="replace", reference_element_id=root_id,
            edited_element=(f'<html id="{root_id}"><body id="nb">'
                            '<p id="only">Fresh body.</p></body></html>'))])
        assert "Fresh body." in after
        assert "First paragraph." not in after

    def test_children_forbidden_under_void_and_raw_tags(self):
        html = '<div id="d"><br id="gap"><script id="s">x()</script></div>'
        for target in ("gap", "s"):
            with pytest.raises(InvalidReferenceError):
                apply_edits(html, [_edit(
                    op="add", reference_element_id=target,
                    position="last_child", edited_element="<p>x</p>")])

    def test_fragment_must_be_single_element(self):
        for payload in ("<p>a</p><p>b</p>", "just text", "  "):
            with pytest.raises(FragmentParseError):
                apply_edits(PAGE, [_edit(op="add", reference_element_id="m",
                                         position="last_child",
                                         edited_element=payload)])

    def test_fragment_cannot_reuse_existing_id(self):
        with pytest.raises(FragmentParseError, match="reuses"):
            apply_edits(PAGE, [_edit(
                op="add", reference_element_id="m", position="last_child",
                edited_element='<p id="p1">clash</p>')])

    def test_replace_may_reuse_the_freed_id(self):
        after = apply_edits(PAGE, [_edit(
            op="replace", reference_element_id="p1",
            edited_element='<p id="p1">Same slot.</p>')])
        assert '<p id="p1">Same slot.</p>' in after

    def test_replace_cannot_duplicate_id_within_fragment(self):
        with pytest.raises(FragmentParseError):
            apply_edits(PAGE, [_edit(
                op="replace", reference_element_id="p1",
                edited_element='<div id="a"><p id="a">x</p></div>')])

    def test_new_fragment_elements_get_fresh_ids(self):
        after = apply_edits(PAGE, [_edit(
            op="add", reference_element_id="m", position="last_child",
            edited_element="<section><p>anonymous</p></section>")])
        doc = parse_document(after)
        added = next(el for el in doc.iter_elements() if el.tag == "section")
        inner = next(el for el in added.iter_elements() if el.tag == "p")
        assert added.attrs.get("id")
        assert inner.attrs.get("id")
        ids = [el.attrs["id"] for el in doc.iter_elements() if "id" in el.attrs]
        assert len(ids) == len(set(ids))

    def test_result_is_canonical(self):
        after = apply_edits(PAGE, [_edit(
            op="add", reference_element_id="m", position="last_child",
            edited_element='<p id="x">added</p>')])
        assert canonicalize(after) == after


class TestParseFragment:
    def test_single_element(self):
        el = parse_fragment('<p id="x">ok</p>')
        assert el.tag == "p" and el.attrs["id"] == "x"

    def test_surrounding_whitespace_tolerated(self):
        assert parse_fragment("  <p>ok</p>\n").tag == "p"

    def test_nested_content_allowed(self):
        el = parse_fragment("<div><p>a</p><p>b</p></div>")
        assert len([c for c in el.children]) == 2

    def test_rejects_non_string(self):
        with pytest.raises(FragmentParseError):
            parse_fragment(None)
