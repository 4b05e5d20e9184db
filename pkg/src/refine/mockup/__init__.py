"""Mockup handling: screen reconstruction and edit-based previews."""

from .dom import (
    DomEdit,
    Element,
    Text,
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
from .engine import (
    MockupBundle,
    MockupScreen,
    PreviewResult,
    build_bundle,
    build_preview,
    extract_mockup_context,
    plan_edits,
    reconstruct_bundle,
    reconstruct_screen,
    validate_png,
)

__all__ = [
    "DomEdit",
    "Element",
    "Text",
    "apply_edits",
    "assign_ids",
    "canonicalize",
    "collect_ids",
    "element_by_id",
    "parse_document",
    "parse_fragment",
    "sanitize",
    "serialize",
    "MockupBundle",
    "MockupScreen",
    "PreviewResult",
    "build_bundle",
    "build_preview",
    "extract_mockup_context",
    "plan_edits",
    "reconstruct_bundle",
    "reconstruct_screen",
    "validate_png",
]
