"""File-backed retrieval index of per-paper dimension embeddings.

One JSON Lines file: a header line {schema_version, embedding_dim, count}
followed by one entry per paper. Vectors are base64-encoded little-endian
32-bit floats. Writes go to a temp file renamed into place, so readers
never observe a partial index.
"""

from __future__ import annotations

import base64
import hashlib
import json
import logging
import os
import struct
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from .context import DIMENSIONS, DesignContext
from .errors import (
    DimMismatchError,
    IndexFormatError,
    NoEligiblePapersError,
    SchemaVersionError,
)
from .papers import DesignImplication, PaperRecord
from .providers import ProviderRequest, TextPart, call

logger = logging.getLogger(__name__)

INDEX_SCHEMA_VERSION = 1


def vector_to_b64(vector) -> str:
    packed = struct.pack(f"<{len(vector)}f", *vector)
    return base64.b64encode(packed).decode("ascii")


def b64_to_vector(data: str) -> tuple[float, ...]:
    packed = base64.b64decode(data.encode("ascii"), validate=True)
    if len(packed) % 4:
        raise IndexFormatError("vector byte length is not a multiple of 4")
    return struct.unpack(f"<{len(packed) // 4}f", packed)


@dataclass(frozen=True)
class DimensionEmbedding:
    dimension_name: str
    vector: tuple[float, ...]
    is_present: bool


@dataclass(frozen=True)
class IndexEntry:
    """One paper's row: six dimension vectors plus embedded implications."""

    paper_id: str
    title: str
    context: DesignContext
    embeddings: tuple[DimensionEmbedding, ...]
    implications: tuple[DesignImplication, ...] = ()
    implication_embeddings: tuple[tuple[float, ...], ...] = ()

    def __post_init__(self):
        names = tuple(e.dimension_name for e in self.embeddings)
        if names != DIMENSIONS:
            raise ValueError(f"embeddings must cover {DIMENSIONS} in order, got {names}")
        if not any(e.is_present for e in self.embeddings):
            raise ValueError("index entries need at least one present dimension")
        if len(self.implication_embeddings) != len(self.implications):
            raise ValueError("implication_embeddings must align with implications")
        lengths = {len(e.vector) for e in self.embeddings}
        lengths.update(len(v) for v in self.implication_embeddings)
        if len(lengths) > 1:
            raise ValueError(f"mixed vector lengths in entry {self.paper_id}: {sorted(lengths)}")

    def present_embeddings(self) -> dict[str, tuple[float, ...]]:
        return {e.dimension_name: e.vector for e in self.embeddings if e.is_present}


@dataclass(frozen=True)
class PaperIndex:
    entries: tuple[IndexEntry, ...]
    embedding_dim: int
    created_at: str
    schema_version: int = INDEX_SCHEMA_VERSION

    def get(self, paper_id: str) -> IndexEntry | None:
        for entry in self.entries:
            if entry.paper_id == paper_id:
                return entry
        return None


class Embedder:
    """Provider-backed text embedding with a per-session digest cache.

    The cache guarantees that repeated texts (the empty string above all)
    map to one identical vector within a build.
    """

    def __init__(self, provider):
        self._provider = provider
        self._cache: dict[str, tuple[float, ...]] = {}

    def embed(self, text: str) -> tuple[float, ...]:
        key = hashlib.sha256(text.encode("utf-8")).hexdigest()
        cached = self._cache.get(key)
        if cached is not None:
            return cached
        request = ProviderRequest(kind="embed", stage="embed",
                                  user_parts=(TextPart(text),))
        response = call(request, self._provider)
        vector = tuple(float(x) for x in response.vector)
        self._cache[key] = vector
        return vector


def embed_text(text: str, provider) -> tuple[float, ...]:
    """One-off embedding without a shared cache; builds use Embedder."""
    return Embedder(provider).embed(text)


def build_entry(record: PaperRecord, embedder: Embedder) -> IndexEntry | None:
    """Embed a record's dimensions and implications.

    Absent dimensions get the cached empty-string embedding with
    is_present=false. Returns None when the record presents no dimension
    (such papers are excluded from the index).
    """
    if record.excluded_from_index:
        return None
    embeddings = []
    for name in DIMENSIONS:
        value = record.context.value(name)
        embeddings.append(DimensionEmbedding(
            dimension_name=name,
            vector=embedder.embed(value if value is not None else ""),
            is_present=value is not None,
        ))
    return IndexEntry(
        paper_id=record.paper_id,
        title=record.doc.title,
        context=record.context,
        embeddings=tuple(embeddings),
        implications=record.implications,
        implication_embeddings=tuple(
            embedder.embed(imp.text) for imp in record.implications
        ),
    )


def _default_created_at() -> str:
    # SOURCE_DATE_EPOCH pins the timestamp for reproducible builds.
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    ts = int(epoch) if epoch else int(time.time())
    return datetime.fromtimestamp(ts, tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def build_index(records, provider, created_at: str | None = None) -> PaperIndex:
    """Embed eligible records into a PaperIndex.

    Records are deduplicated by paper_id (a re-ingested paper replaces its
    earlier entry). Raises NoEligiblePapersError when nothing survives the
    exclusion rule.
    """
    embedder = Embedder(provider)
    by_id: dict[str, IndexEntry] = {}
    for record in records:
        entry = build_entry(record, embedder)
        if entry is None:
            logger.info("paper %s has no present dimensions; excluded from index",
                        record.paper_id)
            continue
        if entry.paper_id in by_id:
            logger.info("paper %s re-ingested; replacing index entry", entry.paper_id)
        by_id[entry.paper_id] = entry

    entries = tuple(by_id.values())
    if not entries:
        raise NoEligiblePapersError("no papers with a present dimension to index")
    dims = {len(e.vector) for entry in entries for e in entry.embeddings}
    if len(dims) != 1:
        raise DimMismatchError(f"provider returned mixed embedding sizes: {sorted(dims)}")
    return PaperIndex(
        entries=entries,
        embedding_dim=dims.pop(),
        created_at=created_at or _default_created_at(),
    )


def _entry_to_dict(entry: IndexEntry) -> dict:
    return {
        "paper_id": entry.paper_id,
        "title": entry.title,
        "context": entry.context.to_dict(),
        "embeddings": [
            {
                "dimension_name": e.dimension_name,
                "is_present": e.is_present,
                "vector_b64": vector_to_b64(e.vector),
            }
            for e in entry.embeddings
        ],
        "implications": [imp.to_dict() for imp in entry.implications],
        "implication_embeddings_b64": [
            vector_to_b64(v) for v in entry.implication_embeddings
        ],
    }


def _entry_from_dict(data: dict) -> IndexEntry:
    return IndexEntry(
        paper_id=data["paper_id"],
        title=data["title"],
        context=DesignContext.from_dict(data["context"]),
        embeddings=tuple(
            DimensionEmbedding(
                dimension_name=e["dimension_name"],
                vector=b64_to_vector(e["vector_b64"]),
                is_present=bool(e["is_present"]),
            )
            for e in data["embeddings"]
        ),
        implications=tuple(
            DesignImplication.from_dict(d) for d in data["implications"]
        ),
        implication_embeddings=tuple(
            b64_to_vector(v) for v in data["implication_embeddings_b64"]
        ),
    )


def save_index(index: PaperIndex, path) -> None:
    """Write the index atomically (temp file + rename)."""
    path = Path(path)
    header = {
        "schema_version": index.schema_version,
        "embedding_dim": index.embedding_dim,
        "count": len(index.entries),
        "created_at": index.created_at,
    }
    tmp = path.with_name(path.name + ".tmp")
    with tmp.open("w", encoding="utf-8") as fh:
        fh.write(json.dumps(header, sort_keys=True, ensure_ascii=False) + "\n")
        for entry in index.entries:
            fh.write(json.dumps(_entry_to_dict(entry), sort_keys=True,
                                ensure_ascii=False) + "\n")
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


def load_index(path) -> PaperIndex:
    """Read and validate an index file."""
    path = Path(path)
    with path.open("r", encoding="utf-8") as fh:
        lines = [line for line in fh.read().splitlines() if line.strip()]
    if not lines:
        raise IndexFormatError(f"{path}: empty index file")

    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise IndexFormatError(f"{path}: bad header line: {exc}") from None
    if not isinstance(header, dict):
        raise IndexFormatError(f"{path}: header line must be a JSON object")
    version = header.get("schema_version")
    if version != INDEX_SCHEMA_VERSION:
        raise SchemaVersionError(f"{path}: unsupported index schema_version {version!r}")
    declared_dim = header.get("embedding_dim")
    declared_count = header.get("count")

    entries = []
    for i, line in enumerate(lines[1:], start=2):
        try:
            data = json.loads(line)
            entries.append(_entry_from_dict(data))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ValueError) and "mixed vector lengths" in str(exc):
                raise DimMismatchError(f"{path}:{i}: {exc}") from None
            raise IndexFormatError(f"{path}:{i}: bad entry: {exc}") from None

    if declared_count != len(entries):
        raise IndexFormatError(
            f"{path}: header declares {declared_count} entries, found {len(entries)}")
    dims = {len(e.vector) for entry in entries for e in entry.embeddings}
    dims.update(len(v) for entry in entries for v in entry.implication_embeddings)
    if dims and dims != {declared_dim}:
        raise DimMismatchError(
            f"{path}: vector lengths {sorted(dims)} disagree with header "
            f"embedding_dim {declared_dim}")
    ids = [e.paper_id for e in entries]
    if len(set(ids)) != len(ids):
        raise IndexFormatError(f"{path}: duplicate paper_ids")

    return PaperIndex(
        entries=tuple(entries),
        embedding_dim=declared_dim,
        created_at=header.get("created_at", ""),
        schema_version=version,
    )
