"""Record/replay fixture store: deterministic stand-in for live providers.

File format (documented in docs/fixtures.md): JSON Lines, one object per
line -- {"digest", "request_summary", "response"}. The digest is the
canonical request hash from base.request_digest, so identical logical
requests replay the same recorded response byte-for-byte.
"""

from __future__ import annotations

import json
import threading
from pathlib import Path

from ..errors import FixtureMiss
from .base import Provider, ProviderRequest, ProviderResponse, request_digest

MODES = ("record", "replay", "replay_strict")


def _response_to_dict(response: ProviderResponse) -> dict:
    out: dict = {"kind": response.kind, "latency": response.latency}
    if response.kind == "text":
        out["text"] = response.text
    else:
        out["vector"] = list(response.vector or ())
    return out


def _response_from_dict(data: dict) -> ProviderResponse:
    if data["kind"] == "text":
        return ProviderResponse(kind="text", text=data["text"],
                                latency=data.get("latency", 0.0))
    return ProviderResponse(kind="vector", vector=tuple(data["vector"]),
                            latency=data.get("latency", 0.0))


def summarize_request(request: ProviderRequest) -> dict:
    """Short human-readable line stored next to each recorded response."""
    return {
        "stage": request.stage,
        "kind": request.kind,
        "preview": request.first_text()[:100],
    }


class FixtureStore:
    """Digest-keyed store of recorded responses backed by a JSONL file."""

    def __init__(self, path: str | Path, mode: str = "replay_strict"):
        if mode not in MODES:
            raise ValueError(f"unknown fixture mode {mode!r}")
        self.path = Path(path)
        self.mode = mode
        self._entries: dict[str, ProviderResponse] = {}
        self._write_lock = threading.Lock()
        if self.path.exists():
            self._load()

    def _load(self) -> None:
        with self.path.open("r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                record = json.loads(line)
                self._entries[record["digest"]] = _response_from_dict(record["response"])

    def __len__(self) -> int:
        return len(self._entries)

    def get(self, digest: str) -> ProviderResponse | None:
        return self._entries.get(digest)

    def put(self, digest: str, request_summary: dict, response: ProviderResponse) -> None:
        """Persist one pair; writes are serialized (single-writer discipline)."""
        line = json.dumps(
            {"digest": digest, "request_summary": request_summary,
             "response": _response_to_dict(response)},
            sort_keys=True, ensure_ascii=False)
        with self._write_lock:
            if digest in self._entries:
                return
            self._entries[digest] = response
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(line + "\n")


class FixtureProvider:
    """Provider that answers from a FixtureStore, falling through per mode.

    record        -- miss: call the inner provider and persist the pair.
    replay        -- miss: call the inner provider if one is configured
                     (persisting the pair), else raise FixtureMiss.
    replay_strict -- miss: always FixtureMiss; the inner provider is never
                     consulted, so no network traffic can occur.
    """

    def __init__(self, store: FixtureStore, inner: Provider | None = None):
        if store.mode == "record" and inner is None:
            raise ValueError("record mode requires an inner provider")
        self.store = store
        self.inner = inner

    def send(self, request: ProviderRequest) -> ProviderResponse:
        digest = request_digest(request)
        hit = self.store.get(digest)
        if hit is not None:
            return hit
        if self.store.mode == "replay_strict" or self.inner is None:
            raise FixtureMiss(digest, stage=request.stage)
        response = self.inner.send(request)
        self.store.put(digest, summarize_request(request), response)
        return response
