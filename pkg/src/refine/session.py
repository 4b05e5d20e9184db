"""Analysis sessions: pipeline state, stage runners, persistence.

A session carries one mockup through the stage machine
created -> context_ready -> retrieved -> clustered -> translated, plus
previews and bookmarks on top. Stage timings are the summed provider
latencies of each stage's calls, which keeps them meaningful under
fixture replay. Sessions persist as single JSON files written
atomically; save -> load -> save is byte-stable.
"""

from __future__ import annotations

import base64
import hashlib
import json
import math
import os
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from .clustering import InsightCluster, build_clusters
from .context import DesignContext
from .errors import (
    AllAbsentError,
    NotRepresentableError,
    ReconstructionPendingError,
    SchemaVersionError,
    StageError,
    UnknownClusterError,
    UnknownItemError,
)
from .index import PaperIndex, _default_created_at
from .mockup import MockupBundle, MockupScreen, PreviewResult, build_preview, reconstruct_bundle
from .mockup.dom import DomEdit
from .mockup.engine import extract_mockup_context
from .papers import DesignImplication
from .retrieval import DEFAULT_TOP_K, RankedPaper, build_query, rank_papers
from .translation import ActionItem, translate_all

SESSION_SCHEMA_VERSION = 1

STAGES = ("created", "context_ready", "retrieved", "clustered", "translated")


def stage_index(stage: str) -> int:
    return STAGES.index(stage)


@dataclass
class Session:
    session_id: str
    mockup: MockupBundle
    created_at: str = field(default_factory=_default_created_at)
    stage: str = "created"
    confirmed_context: DesignContext | None = None
    ranked: list[RankedPaper] = field(default_factory=list)
    clusters: list[InsightCluster] = field(default_factory=list)
    previews: dict[str, list[PreviewResult]] = field(default_factory=dict)
    bookmarks: set[str] = field(default_factory=set)
    timings: dict[str, float] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    def at_least(self, stage: str) -> bool:
        return stage_index(self.stage) >= stage_index(stage)

    def require(self, stage: str) -> None:
        if not self.at_least(stage):
            raise StageError(
                f"session is at stage {self.stage!r}; needs {stage!r}")

    def find_item(self, item_id: str) -> ActionItem | None:
        for cluster in self.clusters:
            for item in cluster.action_items:
                if item.item_id == item_id:
                    return item
        return None

    def find_cluster(self, cluster_id: str) -> InsightCluster | None:
        for cluster in self.clusters:
            if cluster.cluster_id == cluster_id:
                return cluster
        return None


class _LatencyRecorder:
    """Provider wrapper accumulating response latencies for one stage.

    The total sums latencies in sorted order, so it is independent of
    the completion order of concurrent calls.
    """

    def __init__(self, inner):
        self._inner = inner
        self._latencies: list[float] = []
        self._lock = threading.Lock()

    def send(self, request):
        response = self._inner.send(request)
        with self._lock:
            self._latencies.append(response.latency)
        return response

    def total(self) -> float:
        with self._lock:
            return round(math.fsum(sorted(self._latencies)), 3)


def new_session(png_screens, session_id: str | None = None) -> Session:
    """Create a session around a screen bundle. No provider calls yet."""
    from .mockup import build_bundle

    bundle = build_bundle(png_screens)
    return Session(
        session_id=session_id or uuid.uuid4().hex[:16],
        mockup=bundle,
    )


def deterministic_session_id(mockup_id: str, index: PaperIndex) -> str:
    """Content-derived id for headless runs: same inputs, same id."""
    payload = mockup_id + "\x1f" + "\x1f".join(
        sorted(e.paper_id for e in index.entries))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


def run_context(session: Session, provider) -> DesignContext:
    """Extract the mockup context; moves the session to context_ready.

    On full abstention the session stays at created (with a warning) and
    AllAbsentError propagates so callers can ask for manual entry.
    """
    recorder = _LatencyRecorder(provider)
    try:
        context = extract_mockup_context(session.mockup, recorder)
    except AllAbsentError:
        session.timings["context"] = recorder.total()
        session.warnings.append(
            "no design-context dimension found; enter the context manually")
        raise
    session.timings["context"] = recorder.total()
    session.mockup.context = context
    session.confirmed_context = context
    if stage_index(session.stage) < stage_index("context_ready"):
        session.stage = "context_ready"
    return context


def confirm_context(session: Session, edited: DesignContext) -> None:
    """Store the user-edited context and conservatively invalidate
    everything downstream (even when the edit is a no-op)."""
    if not edited.present_dimensions():
        raise AllAbsentError("the confirmed context needs at least one dimension")
    session.confirmed_context = edited
    session.mockup.context = edited
    session.ranked = []
    session.clusters = []
    session.previews = {}
    session.bookmarks = set()
    for key in list(session.timings):
        if key.startswith("preview:"):
            del session.timings[key]
    session.stage = "context_ready"


def run_reconstruction(session: Session, provider, max_workers: int = 4) -> None:
    """Reconstruct all pending screens; failures become warnings."""
    had_pending = any(s.reconstruction_status == "pending"
                      for s in session.mockup.screens)
    recorder = _LatencyRecorder(provider)
    warnings = reconstruct_bundle(session.mockup, recorder, max_workers=max_workers)
    if had_pending:
        session.timings["reconstruction"] = round(
            session.timings.get("reconstruction", 0.0) + recorder.total(), 3)
    session.warnings.extend(warnings)


def run_retrieval_and_clustering(session: Session, index: PaperIndex, provider,
                                 k: int = DEFAULT_TOP_K, n_max: int = 10) -> None:
    """Embed the confirmed context, rank top-k, cluster the implications."""
    session.require("context_ready")
    recorder = _LatencyRecorder(provider)
    query = build_query(session.confirmed_context, recorder)
    session.ranked = rank_papers(query, index, k=k)
    session.stage = "retrieved"
    session.clusters = build_clusters(session.ranked, n_max=n_max)
    session.previews = {}
    session.timings["retrieval_clustering"] = recorder.total()
    session.stage = "clustered"


def run_translation(session: Session, provider, max_workers: int = 4) -> None:
    """Translate every cluster; idempotent once the stage completed."""
    if session.stage == "translated":
        return
    session.require("clustered")
    recorder = _LatencyRecorder(provider)
    clusters, warnings = translate_all(
        session.clusters, session.confirmed_context, session.ranked,
        session.mockup, recorder, max_workers=max_workers)
    session.clusters = clusters
    session.warnings.extend(warnings)
    session.timings["translation"] = recorder.total()
    session.stage = "translated"


def run_preview(session: Session, item_id: str, provider) -> list[PreviewResult]:
    """Compute (or return cached) previews for one action item."""
    session.require("translated")
    item = session.find_item(item_id)
    if item is None:
        raise UnknownItemError(f"no action item {item_id!r}")
    if not item.visually_representable:
        raise NotRepresentableError(
            f"action item {item_id} is not visually representable")
    if item_id in session.previews:
        return session.previews[item_id]
    for screen_id in item.target_screen_ids:
        screen = session.mockup.screen(screen_id)
        if screen is not None and screen.reconstruction_status == "pending":
            raise ReconstructionPendingError(
                f"screen {screen_id} is still being reconstructed; retry shortly")
    recorder = _LatencyRecorder(provider)
    results = build_preview(session.mockup, item, recorder)
    session.previews[item_id] = results
    session.timings[f"preview:{item_id}"] = recorder.total()
    return results


def toggle_bookmark(session: Session, item_id: str) -> bool:
    """Flip an item's bookmark; returns the new state."""
    if session.find_item(item_id) is None:
        raise UnknownItemError(f"no action item {item_id!r}")
    if item_id in session.bookmarks:
        session.bookmarks.discard(item_id)
        return False
    session.bookmarks.add(item_id)
    return True


def get_sources(session: Session, cluster_id: str) -> list[dict]:
    """Provenance for one cluster, grouped by paper in retrieval order."""
    session.require("clustered")
    cluster = session.find_cluster(cluster_id)
    if cluster is None:
        raise UnknownClusterError(f"no cluster {cluster_id!r}")
    titles = {rp.paper_id: rp.title for rp in session.ranked}
    rank_order = {rp.paper_id: i for i, rp in enumerate(session.ranked)}
    grouped: dict[str, list[DesignImplication]] = {}
    for imp in cluster.implications:
        grouped.setdefault(imp.paper_id, []).append(imp)
    groups = []
    for paper_id in sorted(grouped, key=lambda p: (rank_order.get(p, len(rank_order)), p)):
        groups.append({
            "paper_id": paper_id,
            "title": titles.get(paper_id, ""),
            "implications": [
                {
                    "implication_id": imp.implication_id,
                    "text": imp.text,
                    "source_paragraph": imp.source_paragraph,
                }
                for imp in grouped[paper_id]
            ],
        })
    return groups


def run_full(session: Session, index: PaperIndex, provider,
             k: int = DEFAULT_TOP_K, n_max: int = 10, max_workers: int = 4) -> None:
    """Headless end-to-end run, previews included for representable items."""
    run_context(session, provider)
    run_reconstruction(session, provider, max_workers=max_workers)
    run_retrieval_and_clustering(session, index, provider, k=k, n_max=n_max)
    run_translation(session, provider, max_workers=max_workers)
    for cluster in session.clusters:
        for item in cluster.action_items:
            if item.visually_representable:
                try:
                    run_preview(session, item.item_id, provider)
                except ReconstructionPendingError:
                    session.warnings.append(
                        f"{item.item_id}: target screen never reconstructed")


# --- persistence ---------------------------------------------------------

def _screen_to_dict(screen: MockupScreen) -> dict:
    return {
        "screen_id": screen.screen_id,
        "png_b64": base64.b64encode(screen.png_bytes).decode("ascii"),
        "width": screen.width,
        "height": screen.height,
        "reconstructed_html": screen.reconstructed_html,
        "reconstruction_status": screen.reconstruction_status,
    }


def _screen_from_dict(data: dict) -> MockupScreen:
    return MockupScreen(
        screen_id=data["screen_id"],
        png_bytes=base64.b64decode(data["png_b64"]),
        width=data["width"],
        height=data["height"],
        reconstructed_html=data.get("reconstructed_html"),
        reconstruction_status=data.get("reconstruction_status", "pending"),
    )


def _ranked_to_dict(rp: RankedPaper) -> dict:
    # Embeddings stay in the index; the session stores what display and
    # translation need.
    return {
        "paper_id": rp.paper_id,
        "title": rp.title,
        "similarity": rp.similarity,
        "valid_dimensions": list(rp.valid_dimensions),
        "context": rp.context.to_dict(),
    }


def _ranked_from_dict(data: dict) -> RankedPaper:
    return RankedPaper(
        paper_id=data["paper_id"],
        title=data["title"],
        similarity=data["similarity"],
        valid_dimensions=tuple(data["valid_dimensions"]),
        context=DesignContext.from_dict(data["context"]),
        implications=(),
        implication_embeddings=(),
    )


def _cluster_to_dict(cluster: InsightCluster) -> dict:
    return {
        "cluster_id": cluster.cluster_id,
        "title": cluster.title,
        "compare_contrast": cluster.compare_contrast,
        "relations": list(cluster.relations),
        "key_insights": cluster.key_insights,
        "tailored_insight": cluster.tailored_insight,
        "implications": [imp.to_dict() for imp in cluster.implications],
        "action_items": [item.to_dict() for item in cluster.action_items],
    }


def _cluster_from_dict(data: dict) -> InsightCluster:
    return InsightCluster(
        cluster_id=data["cluster_id"],
        implications=tuple(DesignImplication.from_dict(d)
                           for d in data["implications"]),
        title=data.get("title"),
        compare_contrast=data.get("compare_contrast"),
        relations=tuple(data.get("relations") or ()),
        key_insights=data.get("key_insights"),
        tailored_insight=data.get("tailored_insight"),
        action_items=tuple(ActionItem.from_dict(d)
                           for d in data.get("action_items") or ()),
    )


def _preview_to_dict(result: PreviewResult) -> dict:
    return {
        "item_id": result.item_id,
        "screen_id": result.screen_id,
        "before_html": result.before_html,
        "after_html": result.after_html,
        "edits_applied": [e.to_dict() for e in result.edits_applied],
        "warnings": list(result.warnings),
    }


def _preview_from_dict(data: dict) -> PreviewResult:
    return PreviewResult(
        item_id=data["item_id"],
        screen_id=data["screen_id"],
        before_html=data["before_html"],
        after_html=data["after_html"],
        edits_applied=tuple(DomEdit.from_dict(d) for d in data["edits_applied"]),
        warnings=tuple(data.get("warnings") or ()),
    )


def session_to_dict(session: Session) -> dict:
    return {
        "schema_version": SESSION_SCHEMA_VERSION,
        "session_id": session.session_id,
        "created_at": session.created_at,
        "stage": session.stage,
        "confirmed_context": (session.confirmed_context.to_dict()
                              if session.confirmed_context else None),
        "mockup": {
            "mockup_id": session.mockup.mockup_id,
            "screens": [_screen_to_dict(s) for s in session.mockup.screens],
            "context": (session.mockup.context.to_dict()
                        if session.mockup.context else None),
        },
        "ranked": [_ranked_to_dict(rp) for rp in session.ranked],
        "clusters": [_cluster_to_dict(c) for c in session.clusters],
        "previews": {item_id: [_preview_to_dict(r) for r in results]
                     for item_id, results in session.previews.items()},
        "bookmarks": sorted(session.bookmarks),
        "timings": session.timings,
        "warnings": session.warnings,
    }


def session_from_dict(data: dict) -> Session:
    version = data.get("schema_version")
    if version != SESSION_SCHEMA_VERSION:
        raise SchemaVersionError(f"unsupported session schema_version {version!r}")
    mockup_data = data["mockup"]
    mockup = MockupBundle(
        mockup_id=mockup_data["mockup_id"],
        screens=[_screen_from_dict(s) for s in mockup_data["screens"]],
        context=(DesignContext.from_dict(mockup_data["context"])
                 if mockup_data.get("context") else None),
    )
    return Session(
        session_id=data["session_id"],
        mockup=mockup,
        created_at=data["created_at"],
        stage=data["stage"],
        confirmed_context=(DesignContext.from_dict(data["confirmed_context"])
                           if data.get("confirmed_context") else None),
        ranked=[_ranked_from_dict(d) for d in data["ranked"]],
        clusters=[_cluster_from_dict(d) for d in data["clusters"]],
        previews={item_id: [_preview_from_dict(r) for r in results]
                  for item_id, results in data["previews"].items()},
        bookmarks=set(data.get("bookmarks") or ()),
        timings=dict(data.get("timings") or {}),
        warnings=list(data.get("warnings") or ()),
    )


def session_json(session: Session) -> str:
    return json.dumps(session_to_dict(session), sort_keys=True,
                      ensure_ascii=False, indent=2) + "\n"


def save_session(session: Session, path) -> None:
    """Atomic write: temp file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(session_json(session), encoding="utf-8")
    os.replace(tmp, path)


def load_session(path) -> Session:
    return session_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
