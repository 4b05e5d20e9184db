"""HTTP provider speaking a minimal backend-agnostic JSON contract.

Chat and vision-chat requests POST to the provider URL, embeddings to the
embed URL (the wire shapes are documented in docs/fixtures.md). Both URLs
and the bearer key come from configuration / REFINE_* environment
variables; no model vendor is assumed.
"""

from __future__ import annotations

import base64
import time

import httpx

from ..errors import TransportError
from .base import ImagePart, ProviderRequest, ProviderResponse, TextPart


class HttpProvider:
    """Live provider for chat, vision chat, and embedding calls."""

    def __init__(self, provider_url: str, embed_url: str,
                 api_key: str = "", timeout: float = 120.0):
        self.provider_url = provider_url
        self.embed_url = embed_url
        self.api_key = api_key
        self._client = httpx.Client(timeout=timeout)

    def _headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        return headers

    def _post(self, url: str, payload: dict) -> dict:
        try:
            resp = self._client.post(url, json=payload, headers=self._headers())
        except httpx.HTTPError as exc:
            raise TransportError(f"request to {url} failed: {exc}") from exc
        if resp.status_code >= 400:
            raise TransportError(f"{url} returned HTTP {resp.status_code}: {resp.text[:200]}")
        try:
            return resp.json()
        except ValueError as exc:
            raise TransportError(f"{url} returned non-JSON body") from exc

    def send(self, request: ProviderRequest) -> ProviderResponse:
        started = time.monotonic()
        if request.kind == "embed":
            body = self._post(self.embed_url, {"text": request.first_text()})
            if "vector" not in body or not isinstance(body["vector"], list):
                raise TransportError("embed endpoint response lacks a 'vector' list")
            return ProviderResponse(kind="vector",
                                    vector=tuple(float(x) for x in body["vector"]),
                                    latency=time.monotonic() - started)

        parts = []
        for part in request.user_parts:
            if isinstance(part, TextPart):
                parts.append({"text": part.text})
            elif isinstance(part, ImagePart):
                parts.append({"image_png_base64":
                              base64.b64encode(part.png_bytes).decode("ascii")})
        body = self._post(self.provider_url, {
            "stage": request.stage,
            "system": request.system_instruction,
            "parts": parts,
            "schema_hint": request.response_schema_hint,
        })
        if "text" not in body or not isinstance(body["text"], str):
            raise TransportError("chat endpoint response lacks a 'text' string")
        return ProviderResponse(kind="text", text=body["text"],
                                latency=time.monotonic() - started)

    def close(self) -> None:
        self._client.close()
