"""Uniform interface to text/vision model and embedding backends.

Requests are canonicalized to a stable digest so that recorded responses
can be replayed deterministically (see fixtures.py). Canonical form:
NFC-normalized text, images reduced to their content hash, fields
serialized in a fixed order.
"""

from __future__ import annotations

import hashlib
import json
import re
import time
import unicodedata
from dataclasses import dataclass, field
from typing import Callable, Protocol, Union

from ..errors import SchemaError, TransportError

REQUEST_KINDS = ("chat", "vision_chat", "embed")
RESPONSE_KINDS = ("text", "vector")

# Retry policy for transient transport failures: three retries after the
# initial attempt, sleeping 1s/2s/4s between attempts.
RETRY_BACKOFF = (1.0, 2.0, 4.0)


@dataclass(frozen=True)
class TextPart:
    text: str


@dataclass(frozen=True)
class ImagePart:
    png_bytes: bytes


Part = Union[TextPart, ImagePart]


@dataclass(frozen=True)
class ProviderRequest:
    """One model call: a chat, vision chat, or embedding request.

    `stage` names the pipeline step issuing the call; prompt templates are
    keyed by it and it is part of the request digest.
    """

    kind: str
    stage: str
    system_instruction: str = ""
    user_parts: tuple[Part, ...] = ()
    response_schema_hint: str | None = None

    def validate(self) -> None:
        if self.kind not in REQUEST_KINDS:
            raise ValueError(f"unknown request kind {self.kind!r}")
        n_images = sum(1 for p in self.user_parts if isinstance(p, ImagePart))
        n_texts = sum(1 for p in self.user_parts if isinstance(p, TextPart))
        if self.kind == "vision_chat" and n_images < 1:
            raise ValueError("vision_chat requests need at least one image part")
        if self.kind in ("chat", "embed") and n_images > 0:
            raise ValueError(f"{self.kind} requests must not carry image parts")
        if self.kind == "embed" and not (n_texts == 1 and len(self.user_parts) == 1):
            raise ValueError("embed requests carry exactly one text part")

    def first_text(self) -> str:
        for part in self.user_parts:
            if isinstance(part, TextPart):
                return part.text
        return ""


@dataclass(frozen=True)
class ProviderResponse:
    """Either model text or an embedding vector, plus observed latency."""

    kind: str
    text: str | None = None
    vector: tuple[float, ...] | None = None
    latency: float = 0.0

    def validate(self) -> None:
        if self.kind not in RESPONSE_KINDS:
            raise ValueError(f"unknown response kind {self.kind!r}")
        if self.kind == "text" and (self.text is None or self.vector is not None):
            raise ValueError("text response must carry text and no vector")
        if self.kind == "vector" and (self.vector is None or self.text is not None):
            raise ValueError("vector response must carry a vector and no text")


@dataclass(frozen=True)
class SchemaHint:
    """Mechanical description of the JSON a stage expects back.

    `description` is the human-readable form sent with the request (and
    hashed into its digest); the remaining fields drive validation in
    parse_structured.
    """

    description: str
    kind: str = "any"  # "object" | "array" | "any"
    required_keys: tuple[str, ...] = ()


class Provider(Protocol):
    """Anything that can answer a ProviderRequest."""

    def send(self, request: ProviderRequest) -> ProviderResponse:
        ...


def _nfc(text: str) -> str:
    return unicodedata.normalize("NFC", text)


def canonical_request(request: ProviderRequest) -> dict:
    """Stable, JSON-ready form of a request. Images appear as content hashes."""
    parts = []
    for part in request.user_parts:
        if isinstance(part, TextPart):
            parts.append({"text": _nfc(part.text)})
        else:
            parts.append({"image_sha256": hashlib.sha256(part.png_bytes).hexdigest()})
    return {
        "kind": request.kind,
        "stage": _nfc(request.stage),
        "system_instruction": _nfc(request.system_instruction),
        "user_parts": parts,
        "response_schema_hint": (
            _nfc(request.response_schema_hint)
            if request.response_schema_hint is not None else None
        ),
    }


def request_digest(request: ProviderRequest) -> str:
    payload = json.dumps(canonical_request(request), sort_keys=True,
                         separators=(",", ":"), ensure_ascii=False)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


_FENCE_RE = re.compile(r"```[a-zA-Z0-9_-]*\s*\n(.*?)```", re.DOTALL)


def strip_fences(text: str) -> str:
    """Return the first fenced block's content, or the text unchanged."""
    match = _FENCE_RE.search(text)
    if match:
        return match.group(1)
    return text


def _first_json_value(text: str):
    """Parse the first top-level JSON object or array embedded in text."""
    decoder = json.JSONDecoder()
    for i, ch in enumerate(text):
        if ch in "{[":
            try:
                value, _ = decoder.raw_decode(text[i:])
                return value
            except json.JSONDecodeError:
                continue
    raise SchemaError("no parseable JSON value in model output",
                      span=text.strip()[:200])


def parse_structured(text: str, hint: SchemaHint | None = None):
    """Extract and validate the structured value from raw model output.

    Strips code fences and any leading/trailing prose, parses the first
    top-level JSON value, then checks it against the hint.
    """
    value = _first_json_value(strip_fences(text))
    if hint is None:
        return value
    if hint.kind == "object" and not isinstance(value, dict):
        raise SchemaError(f"expected a JSON object, got {type(value).__name__}",
                          span=str(value)[:200])
    if hint.kind == "array" and not isinstance(value, list):
        raise SchemaError(f"expected a JSON array, got {type(value).__name__}",
                          span=str(value)[:200])
    if hint.required_keys:
        items = value if isinstance(value, list) else [value]
        for item in items:
            if not isinstance(item, dict):
                raise SchemaError("expected JSON object(s) with named fields",
                                  span=str(item)[:200])
            missing = [k for k in hint.required_keys if k not in item]
            if missing:
                raise SchemaError(f"missing required field(s): {', '.join(missing)}",
                                  span=str(item)[:200])
    return value


def call(
    request: ProviderRequest,
    provider: Provider,
    *,
    backoff: tuple[float, ...] = RETRY_BACKOFF,
    sleep: Callable[[float], None] = time.sleep,
) -> ProviderResponse:
    """Issue a request, retrying transient transport failures.

    The response kind must match the request (embed -> vector, otherwise
    text). When the request declares a response_schema_hint, the text is
    checked to contain a parseable JSON value before it is returned.
    """
    request.validate()

    attempts = 1 + len(backoff)
    last_error: TransportError | None = None
    response: ProviderResponse | None = None
    for attempt in range(attempts):
        try:
            response = provider.send(request)
            break
        except TransportError as exc:
            last_error = exc
            if attempt < len(backoff):
                sleep(backoff[attempt])
    if response is None:
        raise TransportError(f"provider call failed after {attempts} attempts: {last_error}")

    response.validate()
    expected = "vector" if request.kind == "embed" else "text"
    if response.kind != expected:
        raise SchemaError(
            f"{request.kind} request got a {response.kind} response")
    if expected == "text" and request.response_schema_hint is not None:
        # Fail fast on unusable structured output (e.g. a truncated fixture).
        _first_json_value(strip_fences(response.text or ""))
    return response
