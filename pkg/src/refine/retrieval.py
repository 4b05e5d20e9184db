"""Ranking indexed papers against a mockup's design context.

A query and an entry are compared only on their shared present dimensions:
both sides' vectors are summed over that valid set and the two sums are
compared by cosine similarity. Entries sharing no present dimension with
the query are excluded rather than scored against placeholder embeddings.
"""

from __future__ import annotations

import math
import weakref
from dataclasses import dataclass

import numpy as np

from .context import DIMENSIONS, DesignContext
from .errors import (
    AllAbsentError,
    LengthMismatchError,
    NoEligiblePapersError,
    ZeroNormError,
)
from .index import DimensionEmbedding, Embedder, IndexEntry, PaperIndex
from .papers import DesignImplication

DEFAULT_TOP_K = 8


@dataclass(frozen=True)
class MockupQuery:
    """A mockup context embedded into the six-dimension query row."""

    context: DesignContext
    embeddings: tuple[DimensionEmbedding, ...]

    def __post_init__(self):
        names = tuple(e.dimension_name for e in self.embeddings)
        if names != DIMENSIONS:
            raise ValueError(f"embeddings must cover {DIMENSIONS} in order, got {names}")
        if not any(e.is_present for e in self.embeddings):
            raise AllAbsentError("query context has no present dimensions")


@dataclass(frozen=True)
class RankedPaper:
    """One retrieval hit with everything downstream stages need."""

    paper_id: str
    title: str
    similarity: float
    valid_dimensions: tuple[str, ...]
    context: DesignContext
    implications: tuple[DesignImplication, ...]
    implication_embeddings: tuple[tuple[float, ...], ...]


def build_query(context: DesignContext, provider) -> MockupQuery:
    """Embed a mockup context into a MockupQuery.

    Absent dimensions carry the empty-string embedding, flagged
    is_present=false, mirroring index entries.
    """
    if not context.present_dimensions():
        raise AllAbsentError("mockup context has no present dimensions")
    embedder = Embedder(provider)
    embeddings = tuple(
        DimensionEmbedding(
            dimension_name=name,
            vector=embedder.embed(context.value(name) or ""),
            is_present=context.value(name) is not None,
        )
        for name in DIMENSIONS
    )
    return MockupQuery(context=context, embeddings=embeddings)


def cosine_similarity(a, b) -> float:
    """dot(a,b) / (|a|*|b|), clamped to [-1, 1] against rounding overshoot."""
    if len(a) != len(b):
        raise LengthMismatchError(f"vector lengths differ: {len(a)} vs {len(b)}")
    dot = na = nb = 0.0
    for x, y in zip(a, b):
        dot += x * y
        na += x * x
        nb += y * y
    if na == 0.0 or nb == 0.0:
        raise ZeroNormError("cosine similarity of a zero-norm vector")
    return max(-1.0, min(1.0, dot / (math.sqrt(na) * math.sqrt(nb))))


def sum_valid_dimensions(query: MockupQuery, entry: IndexEntry):
    """Sum both sides' vectors over the dimensions present in both.

    Returns (S_m, S_p, valid_names). Empty valid set returns empty sums;
    the caller decides eligibility. Empty-string embeddings never enter
    either sum.
    """
    valid = []
    for q_emb, e_emb in zip(query.embeddings, entry.embeddings):
        if q_emb.is_present and e_emb.is_present:
            valid.append(q_emb.dimension_name)
    if not valid:
        return (), (), []
    dim = len(query.embeddings[0].vector)
    s_m = [0.0] * dim
    s_p = [0.0] * dim
    for q_emb, e_emb in zip(query.embeddings, entry.embeddings):
        if not (q_emb.is_present and e_emb.is_present):
            continue
        for c in range(dim):
            s_m[c] += q_emb.vector[c]
            s_p[c] += e_emb.vector[c]
    return tuple(s_m), tuple(s_p), valid


# Per-index dense matrices, rebuilt only when a new index object appears.
_array_cache: "weakref.WeakKeyDictionary" = weakref.WeakKeyDictionary()


def _index_arrays(index: PaperIndex):
    cached = _array_cache.get(index)
    if cached is None:
        n = len(index.entries)
        vectors = np.empty((n, len(DIMENSIONS), index.embedding_dim), dtype=np.float64)
        present = np.zeros((n, len(DIMENSIONS)), dtype=bool)
        for i, entry in enumerate(index.entries):
            for j, emb in enumerate(entry.embeddings):
                vectors[i, j, :] = emb.vector
                present[i, j] = emb.is_present
        cached = (vectors, present)
        _array_cache[index] = cached
    return cached


def rank_papers(query: MockupQuery, index: PaperIndex,
                k: int = DEFAULT_TOP_K) -> list[RankedPaper]:
    """Exact full scan: similarity for every eligible entry, top-k returned.

    Sorted descending by similarity, ties broken by ascending paper_id.
    Entries whose valid-dimension set is empty are excluded.
    """
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    if not index.entries:
        raise NoEligiblePapersError("index is empty")

    q_vectors = np.array([e.vector for e in query.embeddings], dtype=np.float64)
    q_present = np.array([e.is_present for e in query.embeddings], dtype=bool)
    if q_vectors.shape[1] != index.embedding_dim:
        raise LengthMismatchError(
            f"query dim {q_vectors.shape[1]} vs index dim {index.embedding_dim}")

    vectors, present = _index_arrays(index)
    valid = present & q_present[None, :]
    eligible = valid.any(axis=1)
    if not eligible.any():
        raise NoEligiblePapersError("no entry shares a present dimension with the query")

    mask = valid.astype(np.float64)[:, :, None]
    s_p = (vectors * mask).sum(axis=1)
    s_m = (q_vectors[None, :, :] * mask).sum(axis=1)
    norm_p = np.linalg.norm(s_p, axis=1)
    norm_m = np.linalg.norm(s_m, axis=1)
    if np.any((norm_p[eligible] == 0.0) | (norm_m[eligible] == 0.0)):
        raise ZeroNormError("summed embedding has zero norm")
    with np.errstate(invalid="ignore", divide="ignore"):
        sims = np.einsum("ij,ij->i", s_m, s_p) / (norm_m * norm_p)
    sims = np.clip(sims, -1.0, 1.0)

    order = sorted(
        (i for i in range(len(index.entries)) if eligible[i]),
        key=lambda i: (-sims[i], index.entries[i].paper_id),
    )
    ranked = []
    for i in order[:k]:
        entry = index.entries[i]
        ranked.append(RankedPaper(
            paper_id=entry.paper_id,
            title=entry.title,
            similarity=float(sims[i]),
            valid_dimensions=tuple(
                name for j, name in enumerate(DIMENSIONS) if valid[i, j]
            ),
            context=entry.context,
            implications=entry.implications,
            implication_embeddings=entry.implication_embeddings,
        ))
    return ranked
