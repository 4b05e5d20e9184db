"""Mockup screens: context extraction, HTML reconstruction, previews.

Screens come in as PNGs. Reconstruction produces one sanitized HTML
document per screen with a unique id on every element; previews realize
an action item by asking the model for edit operations against that HTML
and applying them mechanically.
"""

from __future__ import annotations

import hashlib
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from ..context import DIMENSIONS, DesignContext
from ..errors import (
    AllAbsentError,
    BadImageError,
    InvalidReferenceError,
    NotRepresentableError,
    PreviewFailedError,
    RefineError,
    SchemaError,
)
from ..prompts import system_instruction
from ..providers import ImagePart, ProviderRequest, SchemaHint, TextPart, call, parse_structured
from .dom import DomEdit, apply_edits, assign_ids, collect_ids, parse_document, sanitize, serialize

logger = logging.getLogger(__name__)

MAX_SCREENS = 10

_PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"


@dataclass
class MockupScreen:
    screen_id: str
    png_bytes: bytes
    width: int
    height: int
    reconstructed_html: str | None = None
    reconstruction_status: str = "pending"  # pending | ready | failed


@dataclass
class MockupBundle:
    mockup_id: str
    screens: list[MockupScreen] = field(default_factory=list)
    context: DesignContext | None = None

    def screen(self, screen_id: str) -> MockupScreen | None:
        for screen in self.screens:
            if screen.screen_id == screen_id:
                return screen
        return None

    def screen_ids(self) -> list[str]:
        return [s.screen_id for s in self.screens]


@dataclass(frozen=True)
class PreviewResult:
    """Before/after HTML for one action item on one screen."""

    item_id: str
    screen_id: str
    before_html: str
    after_html: str
    edits_applied: tuple[DomEdit, ...] = ()
    warnings: tuple[str, ...] = ()


def validate_png(data: bytes) -> tuple[int, int]:
    """Check the PNG signature and read width/height from the IHDR chunk."""
    if len(data) < 33 or data[:8] != _PNG_SIGNATURE:
        raise BadImageError("not a PNG file")
    if data[12:16] != b"IHDR":
        raise BadImageError("PNG is missing its IHDR chunk")
    width = int.from_bytes(data[16:20], "big")
    height = int.from_bytes(data[20:24], "big")
    if width < 1 or height < 1:
        raise BadImageError(f"bad PNG dimensions {width}x{height}")
    return width, height


def build_bundle(png_screens) -> MockupBundle:
    """Assemble a bundle from PNG bytes, one per screen, in display order.

    Screens get ids "s1", "s2", ...; the mockup id is a content hash.
    """
    screens = list(png_screens)
    if not 1 <= len(screens) <= MAX_SCREENS:
        raise BadImageError(
            f"a mockup needs 1 to {MAX_SCREENS} screens, got {len(screens)}")
    built = []
    content = hashlib.sha256()
    for i, png in enumerate(screens):
        width, height = validate_png(png)
        content.update(hashlib.sha256(png).digest())
        built.append(MockupScreen(
            screen_id=f"s{i + 1}", png_bytes=png, width=width, height=height))
    return MockupBundle(mockup_id=content.hexdigest()[:16], screens=built)


_CONTEXT_HINT = SchemaHint(
    description=(
        "JSON object with exactly the keys target_user, domain, modality, "
        "pain_point, client, metric; each value a short string, or null when "
        "the screens do not establish that dimension"
    ),
    kind="object",
    required_keys=DIMENSIONS,
)


def extract_mockup_context(bundle: MockupBundle, provider) -> DesignContext:
    """One vision call over all screens; same six dimensions as papers.

    Raises AllAbsentError when no dimension can be read off the screens
    (the user then has to fill the context in by hand).
    """
    intro = (
        f"A UI mockup with {len(bundle.screens)} screen(s), in order: "
        f"{', '.join(bundle.screen_ids())}. Read the design context off these screens."
    )
    parts = [TextPart(intro)]
    parts.extend(ImagePart(s.png_bytes) for s in bundle.screens)
    request = ProviderRequest(
        kind="vision_chat",
        stage="mockup_context",
        system_instruction=system_instruction("mockup_context"),
        user_parts=tuple(parts),
        response_schema_hint=_CONTEXT_HINT.description,
    )
    response = call(request, provider)
    payload = parse_structured(response.text, _CONTEXT_HINT)
    for name in DIMENSIONS:
        value = payload.get(name)
        if value is not None and not isinstance(value, str):
            raise SchemaError(f"dimension {name} must be a string or null",
                              span=str(payload)[:200])
    context = DesignContext.from_dict(payload, origin="mockup")
    if not context.present_dimensions():
        raise AllAbsentError("no design-context dimension found in the screens")
    return context


def reconstruct_screen(screen: MockupScreen, provider) -> str:
    """One vision call turning a screen PNG into sanitized, id-bearing HTML.

    Post-processing: parse, strip scripts/handlers/external resources,
    assign deterministic synthetic ids, re-serialize canonically.
    """
    request = ProviderRequest(
        kind="vision_chat",
        stage="mockup_reconstruction",
        system_instruction=system_instruction("mockup_reconstruction"),
        user_parts=(
            TextPart(f"Screen {screen.screen_id}: reconstruct this "
                     f"{screen.width}x{screen.height}px screen as HTML."),
            ImagePart(screen.png_bytes),
        ),
    )
    response = call(request, provider)
    root = parse_document(response.text or "")
    for warning in sanitize(root):
        logger.debug("screen %s: %s", screen.screen_id, warning)
    for warning in assign_ids(root):
        logger.warning("screen %s: %s", screen.screen_id, warning)
    return serialize(root)


def reconstruct_bundle(bundle: MockupBundle, provider, max_workers: int = 4) -> list[str]:
    """Reconstruct every pending screen, concurrently. Returns warnings
    for screens that failed (their status becomes "failed")."""
    pending = [s for s in bundle.screens if s.reconstruction_status == "pending"]
    if not pending:
        return []
    warnings = []

    def run(screen: MockupScreen):
        try:
            html = reconstruct_screen(screen, provider)
        except RefineError as exc:
            screen.reconstruction_status = "failed"
            return f"screen {screen.screen_id}: reconstruction failed: {exc}"
        screen.reconstructed_html = html
        screen.reconstruction_status = "ready"
        return None

    with ThreadPoolExecutor(max_workers=min(max_workers, len(pending))) as pool:
        for result in pool.map(run, pending):
            if result:
                warnings.append(result)
                logger.warning("%s", result)
    return warnings


_EDITS_HINT = SchemaHint(
    description=(
        "JSON array of edit operations, each with exactly the fields op "
        "(add|remove|replace), reference_element_id, edited_element "
        "(string or null), position (before|after|first_child|last_child "
        "or null), rationale"
    ),
    kind="array",
    required_keys=("op", "reference_element_id", "rationale"),
)


def plan_edits(screen_html: str, item, provider) -> list[DomEdit]:
    """One chat call mapping an action item onto edit operations.

    Every reference id must exist in the given HTML; unknown ids raise
    InvalidReferenceError listing all of them.
    """
    if not item.visually_representable:
        raise NotRepresentableError(
            f"action item {item.item_id} is not visually representable")
    user_text = f"[Action item]\n{item.text}\n\n[Screen HTML]\n{screen_html}"
    request = ProviderRequest(
        kind="chat",
        stage="plan_edits",
        system_instruction=system_instruction("plan_edits"),
        user_parts=(TextPart(user_text),),
        response_schema_hint=_EDITS_HINT.description,
    )
    response = call(request, provider)
    payload = parse_structured(response.text, _EDITS_HINT)
    if not payload:
        raise SchemaError("model returned no edit operations")
    edits = [DomEdit.from_dict(entry) for entry in payload]

    known = collect_ids(parse_document(screen_html))
    bad: list[str] = []
    first_bad = None
    for i, edit in enumerate(edits):
        if edit.reference_element_id not in known:
            bad.append(edit.reference_element_id)
            if first_bad is None:
                first_bad = i
    if bad:
        raise InvalidReferenceError(bad, edit_index=first_bad)
    return edits


def build_preview(bundle: MockupBundle, item, provider) -> list[PreviewResult]:
    """Plan and apply edits for each of the item's target screens.

    A failing screen yields a warning-bearing result with the unchanged
    HTML; only a failure on every screen raises PreviewFailedError.
    """
    if not item.visually_representable:
        raise NotRepresentableError(
            f"action item {item.item_id} is not visually representable")
    results = []
    succeeded = 0
    for screen_id in item.target_screen_ids:
        screen = bundle.screen(screen_id)
        if screen is None or screen.reconstruction_status != "ready":
            reason = ("unknown screen" if screen is None
                      else f"screen is {screen.reconstruction_status}")
            results.append(PreviewResult(
                item_id=item.item_id, screen_id=screen_id,
                before_html="", after_html="",
                warnings=(f"{screen_id}: {reason}",)))
            continue
        before = screen.reconstructed_html
        try:
            edits = plan_edits(before, item, provider)
            after = apply_edits(before, edits)
        except RefineError as exc:
            results.append(PreviewResult(
                item_id=item.item_id, screen_id=screen_id,
                before_html=before, after_html=before,
                warnings=(f"{screen_id}: {exc}",)))
            continue
        results.append(PreviewResult(
            item_id=item.item_id, screen_id=screen_id,
            before_html=before, after_html=after,
            edits_applied=tuple(edits)))
        succeeded += 1
    if results and succeeded == 0:
        raise PreviewFailedError(
            f"preview failed on every target screen of {item.item_id}: "
            + "; ".join(w for r in results for w in r.warnings))
    return results
