"""HTML document model for mockup screens.

A small element tree over the stdlib HTML parser with one canonical
serialization: lowercase tags, alphabetically sorted double-quoted
attributes, 2-space indentation, whitespace-only text dropped between
block-level children, inline text collapsed. Canonical output is a
fixpoint of parse+serialize, so byte equality is a meaningful oracle
for edit operations.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from html.parser import HTMLParser

from ..errors import FragmentParseError, HtmlParseError, InvalidReferenceError, SchemaError

VOID_TAGS = frozenset((
    "area", "base", "br", "col", "embed", "hr", "img", "input",
    "link", "meta", "param", "source", "track", "wbr",
))

# Content kept verbatim (no entity escaping, no whitespace handling).
RAW_TAGS = frozenset(("script", "style"))

# Content escaped but whitespace preserved exactly.
PRESERVE_TAGS = frozenset(("pre", "textarea"))

EDIT_OPS = ("add", "remove", "replace")
ADD_POSITIONS = ("before", "after", "first_child", "last_child")


@dataclass
class Text:
    data: str
    parent: "Element | None" = None


@dataclass
class Element:
    tag: str
    attrs: dict = field(default_factory=dict)
    children: list = field(default_factory=list)
    parent: "Element | None" = None

    def append(self, node) -> None:
        node.parent = self
        self.children.append(node)

    def iter_elements(self):
        """Preorder walk over this element and its element descendants."""
        yield self
        for child in self.children:
            if isinstance(child, Element):
                yield from child.iter_elements()


@dataclass(frozen=True)
class DomEdit:
    """One edit operation in the wire format used with the model.

    add: edited_element inserted at `position` relative to the reference.
    remove: reference element and subtree deleted.
    replace: reference element swapped for edited_element.
    """

    op: str
    reference_element_id: str
    edited_element: str | None = None
    position: str | None = None
    rationale: str = ""

    def to_dict(self) -> dict:
        return {
            "op": self.op,
            "reference_element_id": self.reference_element_id,
            "edited_element": self.edited_element,
            "position": self.position,
            "rationale": self.rationale,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DomEdit":
        op = data.get("op")
        if op not in EDIT_OPS:
            raise SchemaError(f"unknown edit op {op!r}", span=str(data)[:200])
        rid = data.get("reference_element_id")
        if not isinstance(rid, str) or not rid:
            raise SchemaError("reference_element_id must be a non-empty string",
                              span=str(data)[:200])
        edited = data.get("edited_element")
        position = data.get("position")
        rationale = data.get("rationale") or ""
        if not isinstance(rationale, str):
            raise SchemaError("rationale must be a string", span=str(data)[:200])
        if op == "add":
            if not isinstance(edited, str) or not edited.strip():
                raise SchemaError("add requires edited_element",
                                  span=str(data)[:200])
            if position not in ADD_POSITIONS:
                raise SchemaError(
                    f"add requires position in {ADD_POSITIONS}, got {position!r}",
                    span=str(data)[:200])
        elif op == "replace":
            if not isinstance(edited, str) or not edited.strip():
                raise SchemaError("replace requires edited_element",
                                  span=str(data)[:200])
            if position is not None:
                raise SchemaError("replace takes no position",
                                  span=str(data)[:200])
        else:  # remove
            if edited is not None:
                raise SchemaError("remove takes no edited_element",
                                  span=str(data)[:200])
            if position is not None:
                raise SchemaError("remove takes no position",
                                  span=str(data)[:200])
        return cls(op=op, reference_element_id=rid, edited_element=edited,
                   position=position, rationale=rationale)


class _TreeBuilder(HTMLParser):
    """Lenient tree construction: stray end tags ignored, unclosed tags
    recovered by stack unwinding, comments and doctype dropped."""

    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.roots: list = []
        self.stack: list[Element] = []

    def _attach(self, node) -> None:
        if self.stack:
            self.stack[-1].append(node)
        else:
            self.roots.append(node)

    def _make(self, tag, attrs) -> Element:
        seen = {}
        for name, value in attrs:
            name = name.lower()
            if name not in seen:
                seen[name] = value if value is not None else ""
        return Element(tag=tag.lower(), attrs=seen)

    def handle_starttag(self, tag, attrs):
        el = self._make(tag, attrs)
        self._attach(el)
        if el.tag not in VOID_TAGS:
            self.stack.append(el)

    def handle_startendtag(self, tag, attrs):
        self._attach(self._make(tag, attrs))

    def handle_endtag(self, tag):
        tag = tag.lower()
        for i in range(len(self.stack) - 1, -1, -1):
            if self.stack[i].tag == tag:
                del self.stack[i:]
                return
        # No matching open tag: ignore.

    def handle_data(self, data):
        if data:
            self._attach(Text(data=data))


def _merge_text(el: Element) -> None:
    merged: list = []
    for child in el.children:
        if isinstance(child, Text) and merged and isinstance(merged[-1], Text):
            merged[-1].data += child.data
        else:
            merged.append(child)
    el.children = merged
    for child in el.children:
        child.parent = el
        if isinstance(child, Element):
            _merge_text(child)


def _parse_nodes(text: str) -> list:
    builder = _TreeBuilder()
    builder.feed(text)
    builder.close()
    wrapper = Element(tag="#wrapper")
    for node in builder.roots:
        wrapper.append(node)
    _merge_text(wrapper)
    for node in wrapper.children:
        node.parent = None
    return wrapper.children


def parse_document(text: str) -> Element:
    """Parse text into a document tree rooted at an <html> element.

    Content without an <html> wrapper is wrapped (empty head, content in
    body). Raises HtmlParseError when no elements are present at all.
    """
    nodes = _parse_nodes(text)
    elements = [n for n in nodes if isinstance(n, Element)]
    if not elements:
        raise HtmlParseError("no elements found in document")
    if len(elements) == 1 and elements[0].tag == "html":
        return elements[0]
    html = Element(tag="html")
    html.append(Element(tag="head"))
    body = Element(tag="body")
    for node in nodes:
        if isinstance(node, Text) and not node.data.strip():
            continue
        body.append(node)
    html.append(body)
    return html


def parse_fragment(text: str) -> Element:
    """Parse an edit payload: exactly one element, nothing else."""
    if not isinstance(text, str) or not text.strip():
        raise FragmentParseError("empty edit fragment")
    nodes = _parse_nodes(text)
    elements = [n for n in nodes if isinstance(n, Element)]
    stray = [n for n in nodes if isinstance(n, Text) and n.data.strip()]
    if len(elements) != 1 or stray:
        raise FragmentParseError(
            f"edit fragment must be exactly one element, got "
            f"{len(elements)} element(s)"
            + (" plus top-level text" if stray else ""))
    root = elements[0]
    root.parent = None
    return root


def _escape_text(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def _escape_attr(text: str) -> str:
    return (text.replace("&", "&amp;").replace('"', "&quot;")
            .replace("<", "&lt;").replace(">", "&gt;"))


def _open_tag(el: Element) -> str:
    parts = [el.tag]
    for name in sorted(el.attrs):
        parts.append(f'{name}="{_escape_attr(el.attrs[name])}"')
    return "<" + " ".join(parts) + ">"


def _collapse(text: str) -> str:
    return re.sub(r"\s+", " ", text)


def _raw_text(el: Element) -> str:
    return "".join(c.data for c in el.children if isinstance(c, Text))


def _has_inline_text(el: Element) -> bool:
    return any(isinstance(c, Text) and c.data.strip() for c in el.children)


def _preserve_parts(el: Element) -> str:
    # Whitespace-significant content: text kept verbatim (escaped), child
    # elements serialized inline.
    parts = []
    for child in el.children:
        if isinstance(child, Text):
            parts.append(_escape_text(child.data))
        else:
            parts.append(_serialize_inline(child))
    return "".join(parts)


def _inline_parts(el: Element) -> str:
    parts = []
    for child in el.children:
        if isinstance(child, Text):
            parts.append(_escape_text(_collapse(child.data)))
        else:
            parts.append(_serialize_inline(child))
    return "".join(parts)


def _serialize_inline(el: Element) -> str:
    if el.tag in VOID_TAGS:
        return _open_tag(el)
    if el.tag in RAW_TAGS:
        inner = _raw_text(el)
    elif el.tag in PRESERVE_TAGS:
        inner = _preserve_parts(el)
    else:
        # Inner whitespace collapses but edges survive, so word spacing
        # around nested elements is preserved.
        inner = _inline_parts(el)
    return f"{_open_tag(el)}{inner}</{el.tag}>"


def _serialize_element(el: Element, depth: int) -> list[str]:
    pad = "  " * depth
    if el.tag in VOID_TAGS:
        return [pad + _open_tag(el)]
    if el.tag in RAW_TAGS:
        return [f"{pad}{_open_tag(el)}{_raw_text(el)}</{el.tag}>"]
    if el.tag in PRESERVE_TAGS:
        return [f"{pad}{_open_tag(el)}{_preserve_parts(el)}</{el.tag}>"]
    if _has_inline_text(el):
        return [f"{pad}{_open_tag(el)}{_inline_parts(el).strip()}</{el.tag}>"]

    block_children = [c for c in el.children if isinstance(c, Element)]
    if not block_children:
        return [f"{pad}{_open_tag(el)}</{el.tag}>"]
    lines = [pad + _open_tag(el)]
    for child in block_children:
        lines.extend(_serialize_element(child, depth + 1))
    lines.append(f"{pad}</{el.tag}>")
    return lines


def serialize_element(el: Element) -> str:
    """Canonical form of one element subtree (no doctype)."""
    return "\n".join(_serialize_element(el, 0))


def serialize(root: Element) -> str:
    """Canonical form of a whole document."""
    return "<!doctype html>\n" + serialize_element(root) + "\n"


def canonicalize(html: str) -> str:
    """parse + serialize; the identity on already-canonical documents."""
    return serialize(parse_document(html))


_EXTERNAL_URL = re.compile(r"^\s*(?:(?:https?:)?//|javascript:|vbscript:|file:|ftp:)",
                           re.IGNORECASE)
_URL_ATTRS = frozenset(("href", "src", "srcset", "poster", "action",
                        "formaction", "background", "data"))
_CSS_EXTERNAL = re.compile(
    r"url\(\s*['\"]?\s*(?:(?:https?:)?//|javascript:)[^)]*\)|@import[^;]*;?",
    re.IGNORECASE)


def sanitize(root: Element) -> list[str]:
    """Strip scripts, event handlers, and external resource references.

    Mutates the tree; returns human-readable warnings for what was cut.
    """
    warnings = []
    for el in list(root.iter_elements()):
        for child in list(el.children):
            if isinstance(child, Element) and child.tag == "script":
                el.children.remove(child)
                warnings.append("removed script element")
        for name in list(el.attrs):
            if name.startswith("on"):
                del el.attrs[name]
                warnings.append(f"removed event handler {name} on <{el.tag}>")
            elif name in _URL_ATTRS and _EXTERNAL_URL.match(el.attrs[name]):
                del el.attrs[name]
                warnings.append(f"removed external {name} on <{el.tag}>")
        if "style" in el.attrs:
            cleaned = _CSS_EXTERNAL.sub("none", el.attrs["style"])
            if cleaned != el.attrs["style"]:
                el.attrs["style"] = cleaned
                warnings.append(f"removed external url in style of <{el.tag}>")
        if el.tag == "style":
            for child in el.children:
                if isinstance(child, Text):
                    cleaned = _CSS_EXTERNAL.sub("none", child.data)
                    if cleaned != child.data:
                        child.data = cleaned
                        warnings.append("removed external url in stylesheet")
    if root.tag == "script":
        raise HtmlParseError("document root is a script element")
    return warnings


def assign_ids(root: Element) -> list[str]:
    """Give every element a unique id.

    Elements keep their authored id on first sight; missing or duplicate
    ids get "e" + the element's preorder index (probing upward on the
    rare collision with an authored id). Returns warnings for rewrites.
    """
    warnings = []
    seen: set[str] = set()
    for index, el in enumerate(root.iter_elements()):
        current = el.attrs.get("id")
        if current and current not in seen:
            seen.add(current)
            continue
        candidate = f"e{index}"
        bump = index
        while candidate in seen:
            bump += 1
            candidate = f"e{bump}"
        if current:
            warnings.append(f"duplicate id {current!r} reassigned to {candidate}")
        el.attrs["id"] = candidate
        seen.add(candidate)
    return warnings


def collect_ids(root: Element) -> set[str]:
    return {el.attrs["id"] for el in root.iter_elements() if "id" in el.attrs}


def element_by_id(root: Element, element_id: str) -> Element | None:
    for el in root.iter_elements():
        if el.attrs.get("id") == element_id:
            return el
    return None


def _synthetic_counter(ids) -> int:
    best = 0
    for value in ids:
        match = re.fullmatch(r"e(\d+)", value)
        if match:
            best = max(best, int(match.group(1)) + 1)
    return best


def _fill_fragment_ids(fragment: Element, taken: set[str]) -> None:
    """Mint ids for fragment elements lacking one, continuing the "eN"
    numbering past everything already taken."""
    counter = _synthetic_counter(taken | collect_ids(fragment))
    for el in fragment.iter_elements():
        if "id" not in el.attrs:
            while f"e{counter}" in taken:
                counter += 1
            el.attrs["id"] = f"e{counter}"
            taken.add(f"e{counter}")
            counter += 1


def _check_fragment_ids(fragment: Element, existing: set[str]) -> None:
    fragment_ids = []
    for el in fragment.iter_elements():
        if "id" in el.attrs:
            fragment_ids.append(el.attrs["id"])
    duplicates_within = {i for i in fragment_ids if fragment_ids.count(i) > 1}
    clashes = (set(fragment_ids) & existing) | duplicates_within
    if clashes:
        raise FragmentParseError(
            f"fragment reuses existing element id(s): {', '.join(sorted(clashes))}")


def _assert_unique_ids(root: Element) -> None:
    ids = [el.attrs["id"] for el in root.iter_elements() if "id" in el.attrs]
    if len(ids) != len(set(ids)):
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        raise FragmentParseError(f"edit produced duplicate id(s): {', '.join(dupes)}")


def _apply_one(root: Element, edit: DomEdit, index: int) -> Element:
    ref = element_by_id(root, edit.reference_element_id)
    if ref is None:
        raise InvalidReferenceError([edit.reference_element_id], edit_index=index)

    if edit.op == "remove":
        if ref.parent is None:
            raise InvalidReferenceError(
                [edit.reference_element_id], edit_index=index,
                reason="cannot remove the document root")
        ref.parent.children.remove(ref)
        return root

    fragment = parse_fragment(edit.edited_element)

    if edit.op == "replace":
        removed = collect_ids(ref)
        existing = collect_ids(root) - removed
        _check_fragment_ids(fragment, existing)
        _fill_fragment_ids(fragment, existing | collect_ids(fragment))
        if ref.parent is None:
            fragment.parent = None
            root = fragment
        else:
            parent = ref.parent
            parent.children[parent.children.index(ref)] = fragment
            fragment.parent = parent
        _assert_unique_ids(root)
        return root

    # add
    existing = collect_ids(root)
    _check_fragment_ids(fragment, existing)
    _fill_fragment_ids(fragment, existing | collect_ids(fragment))
    if edit.position in ("before", "after"):
        if ref.parent is None:
            raise InvalidReferenceError(
                [edit.reference_element_id], edit_index=index,
                reason="cannot insert beside the document root")
        parent = ref.parent
        at = parent.children.index(ref) + (1 if edit.position == "after" else 0)
        parent.children.insert(at, fragment)
        fragment.parent = parent
    else:  # first_child / last_child
        if ref.tag in VOID_TAGS or ref.tag in RAW_TAGS or ref.tag in PRESERVE_TAGS:
            raise InvalidReferenceError(
                [edit.reference_element_id], edit_index=index,
                reason=f"<{ref.tag}> cannot take element children")
        if edit.position == "first_child":
            ref.children.insert(0, fragment)
            fragment.parent = ref
        else:
            ref.append(fragment)
    _assert_unique_ids(root)
    return root


def apply_edits(html: str, edits) -> str:
    """Apply edits sequentially, each against the previous result.

    apply_edits(h, []) is canonicalize(h). Edits never touch elements
    outside their reference target (and, for add, its insertion point).
    """
    root = parse_document(html)
    for index, edit in enumerate(edits):
        root = _apply_one(root, edit, index)
    return serialize(root)
