"""HTTP service around the analysis pipeline.

One SessionManager owns the provider, the paper index and every live
session. Each session has its own lock, so one pipeline run is in
flight per session at a time: a second request for the same stage
blocks on the lock, then finds the work already done and returns the
cached result. Distinct sessions run fully concurrent. Sessions are
persisted to disk after every mutation (atomic replace), so a restart
picks them up where they were.
"""
from __future__ import annotations

import base64
import binascii
import contextlib
import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from fastapi import FastAPI, Query, Request
from fastapi.responses import JSONResponse

from ..config import Config, build_provider, load_config
from ..context import DesignContext
from ..errors import (
    AllAbsentError,
    BadImageError,
    FixtureMiss,
    NoActionItemsError,
    NoEligiblePapersError,
    NoImplicationsError,
    NotRepresentableError,
    PreviewFailedError,
    ReconstructionPendingError,
    RefineError,
    SchemaError,
    StageError,
    TransportError,
    TranslationFailedError,
    UnknownClusterError,
    UnknownItemError,
    UnknownSessionError,
)
from ..index import PaperIndex, load_index
from ..retrieval import DEFAULT_TOP_K
from ..session import (
    Session,
    get_sources,
    load_session,
    new_session,
    run_context,
    run_preview,
    run_reconstruction,
    run_retrieval_and_clustering,
    run_translation,
    save_session,
    session_to_dict,
    toggle_bookmark,
)
from . import schemas

logger = logging.getLogger(__name__)

# Most specific first; the first match wins.
_STATUS_MAP = (
    (UnknownSessionError, 404),
    (UnknownClusterError, 404),
    (UnknownItemError, 404),
    (ReconstructionPendingError, 503),
    (StageError, 409),
    (NotRepresentableError, 409),
    (BadImageError, 400),
    (AllAbsentError, 422),
    (NoEligiblePapersError, 422),
    (NoImplicationsError, 422),
    (NoActionItemsError, 502),
    (FixtureMiss, 502),
    (TransportError, 502),
    (SchemaError, 502),
    (TranslationFailedError, 502),
    (PreviewFailedError, 502),
)


def _status_for(exc: RefineError) -> int:
    for klass, code in _STATUS_MAP:
        if isinstance(exc, klass):
            return code
    return 400


class SessionManager:
    """Owns sessions, their locks and the shared provider/index."""

    def __init__(self, config: Config, index: PaperIndex | None = None,
                 provider=None):
        self.config = config
        self._index = index
        self._provider = provider if provider is not None else build_provider(config)
        self._sessions: dict[str, Session] = {}
        self._locks: dict[str, threading.RLock] = {}
        self._steps: dict[str, str] = {}
        self._last_k: dict[str, int] = {}
        self._registry = threading.Lock()
        self._pool = ThreadPoolExecutor(
            max_workers=max(1, config.workers), thread_name_prefix="refine-bg")

    # -- plumbing ----------------------------------------------------

    @property
    def index(self) -> PaperIndex:
        with self._registry:
            if self._index is None:
                if not self.config.index_path:
                    raise NoEligiblePapersError(
                        "no paper index configured; set REFINE_INDEX or pass --index")
                self._index = load_index(self.config.index_path)
            return self._index

    def _session_path(self, session_id: str) -> Path:
        return Path(self.config.data_dir) / "sessions" / f"{session_id}.json"

    def _lock_for(self, session_id: str) -> threading.RLock:
        with self._registry:
            return self._locks.setdefault(session_id, threading.RLock())

    def get(self, session_id: str) -> Session:
        with self._registry:
            session = self._sessions.get(session_id)
        if session is not None:
            return session
        path = self._session_path(session_id)
        if path.is_file():
            session = load_session(path)
            with self._registry:
                return self._sessions.setdefault(session_id, session)
        raise UnknownSessionError(f"no session {session_id!r}")

    def _persist(self, session: Session) -> None:
        save_session(session, self._session_path(session.session_id))

    @contextlib.contextmanager
    def _step(self, session_id: str, name: str):
        self._steps[session_id] = name
        try:
            yield
        finally:
            self._steps.pop(session_id, None)

    def current_step(self, session_id: str) -> str | None:
        return self._steps.get(session_id)

    def shutdown(self) -> None:
        self._pool.shutdown(wait=True)

    # -- operations ----------------------------------------------------

    def create(self, png_screens: list[bytes],
               session_id: str | None = None) -> Session:
        """Build the session, extract its context, then start screen
        reconstruction in the background."""
        session = new_session(png_screens, session_id=session_id)
        with self._registry:
            self._sessions[session.session_id] = session
        with self._lock_for(session.session_id):
            with self._step(session.session_id, "extracting context"):
                try:
                    run_context(session, self._provider)
                except AllAbsentError:
                    pass  # session stays at created; warning already recorded
            self._persist(session)
        self._pool.submit(self._reconstruct_in_background, session.session_id)
        return session

    def _reconstruct_in_background(self, session_id: str) -> None:
        try:
            session = self.get(session_id)
            with self._lock_for(session_id):
                with self._step(session_id, "reconstructing screens"):
                    run_reconstruction(session, self._provider,
                                       max_workers=self.config.workers)
                self._persist(session)
        except Exception:
            logger.exception("background reconstruction failed for %s", session_id)

    def confirm_context(self, session_id: str, edited: DesignContext) -> Session:
        from ..session import confirm_context as _confirm

        session = self.get(session_id)
        with self._lock_for(session_id):
            _confirm(session, edited)
            self._last_k.pop(session_id, None)
            self._persist(session)
        return session

    def retrieve(self, session_id: str, top_k: int | None = None) -> Session:
        session = self.get(session_id)
        k = top_k if top_k is not None else self.config.top_k
        with self._lock_for(session_id):
            if session.at_least("clustered") and self._last_k.get(session_id) == k:
                return session  # coalesced with a finished identical run
            with self._step(session_id, "retrieving and clustering"):
                run_retrieval_and_clustering(
                    session, self.index, self._provider,
                    k=k, n_max=self.config.n_max)
            self._last_k[session_id] = k
            self._persist(session)
        return session

    def translate(self, session_id: str) -> Session:
        session = self.get(session_id)
        with self._lock_for(session_id):
            if session.stage != "translated":
                with self._step(session_id, "translating clusters"):
                    run_translation(session, self._provider,
                                    max_workers=self.config.workers)
                self._persist(session)
        return session

    def preview(self, session_id: str, item_id: str):
        session = self.get(session_id)
        with self._lock_for(session_id):
            cached = item_id in session.previews
            with self._step(session_id, f"building preview {item_id}"):
                results = run_preview(session, item_id, self._provider)
            if not cached:
                self._persist(session)
        return session, results

    def bookmark(self, session_id: str, item_id: str) -> bool:
        session = self.get(session_id)
        with self._lock_for(session_id):
            state = toggle_bookmark(session, item_id)
            self._persist(session)
        return state

    def sources(self, session_id: str, cluster_id: str) -> list[dict]:
        session = self.get(session_id)
        with self._lock_for(session_id):
            return get_sources(session, cluster_id)


# -- wire shaping -----------------------------------------------------

def _context_payload(context: DesignContext | None):
    if context is None:
        return None
    return schemas.ContextPayload(**context.to_dict())


def _cluster_model(session: Session, cluster) -> schemas.ClusterModel:
    return schemas.ClusterModel(
        cluster_id=cluster.cluster_id,
        size=len(cluster.implications),
        title=cluster.title,
        compare_contrast=cluster.compare_contrast,
        relations=list(cluster.relations),
        key_insights=cluster.key_insights,
        tailored_insight=cluster.tailored_insight,
        implications=[schemas.ImplicationModel(
            implication_id=imp.implication_id,
            paper_id=imp.paper_id,
            text=imp.text,
            source_paragraph=imp.source_paragraph,
        ) for imp in cluster.implications],
        action_items=[_item_model(session, item)
                      for item in cluster.action_items],
    )


def _item_model(session: Session, item) -> schemas.ActionItemModel:
    return schemas.ActionItemModel(
        item_id=item.item_id,
        cluster_id=item.cluster_id,
        text=item.text,
        target_screen_ids=list(item.target_screen_ids),
        visually_representable=item.visually_representable,
        bookmark=item.item_id in session.bookmarks,
    )


def _ranked_model(rp) -> schemas.RankedPaperModel:
    return schemas.RankedPaperModel(
        paper_id=rp.paper_id,
        title=rp.title,
        similarity=rp.similarity,
        valid_dimensions=list(rp.valid_dimensions),
        context=schemas.ContextPayload(**rp.context.to_dict()),
    )


def _preview_model(result) -> schemas.PreviewResultModel:
    return schemas.PreviewResultModel(
        item_id=result.item_id,
        screen_id=result.screen_id,
        before_html=result.before_html,
        after_html=result.after_html,
        edits_applied=[schemas.DomEditModel(**e.to_dict())
                       for e in result.edits_applied],
        warnings=list(result.warnings),
    )


def _decode_screens(encoded: list[str]) -> list[bytes]:
    screens = []
    for i, blob in enumerate(encoded):
        try:
            screens.append(base64.b64decode(blob, validate=True))
        except (binascii.Error, ValueError) as exc:
            raise BadImageError(f"screen {i}: invalid base64 payload") from exc
    return screens


def create_app(config: Config | None = None,
               manager: SessionManager | None = None) -> FastAPI:
    if manager is None:
        manager = SessionManager(config or load_config())

    app = FastAPI(title="refine", version="0.1.0")
    app.state.manager = manager

    @app.exception_handler(RefineError)
    async def _refine_error(request: Request, exc: RefineError):
        status = _status_for(exc)
        headers = {"Retry-After": "2"} if status == 503 else None
        return JSONResponse(
            status_code=status,
            content={"error": type(exc).__name__, "detail": str(exc)},
            headers=headers,
        )

    @app.post("/v1/sessions", status_code=201,
              response_model=schemas.SessionCreatedResponse)
    def create_session(body: schemas.CreateSessionRequest):
        screens = _decode_screens(body.screens)
        session = manager.create(screens, session_id=body.session_id)
        return schemas.SessionCreatedResponse(
            session_id=session.session_id,
            stage=session.stage,
            context=_context_payload(session.confirmed_context),
            screen_ids=session.mockup.screen_ids(),
            warnings=list(session.warnings),
        )

    @app.get("/v1/sessions/{session_id}", response_model=schemas.SessionResponse)
    def get_session(session_id: str):
        session = manager.get(session_id)
        return schemas.SessionResponse(session=session_to_dict(session))

    @app.put("/v1/sessions/{session_id}/context",
             response_model=schemas.ContextResponse)
    def put_context(session_id: str, body: schemas.ContextPayload):
        edited = DesignContext.from_dict(body.model_dump(), origin="mockup")
        session = manager.confirm_context(session_id, edited)
        return schemas.ContextResponse(
            session_id=session.session_id,
            stage=session.stage,
            context=_context_payload(session.confirmed_context),
        )

    @app.post("/v1/sessions/{session_id}/retrieve",
              response_model=schemas.RetrieveResponse)
    def retrieve(session_id: str, k: int | None = Query(None, ge=1)):
        session = manager.retrieve(session_id, top_k=k)
        return schemas.RetrieveResponse(
            session_id=session.session_id,
            stage=session.stage,
            ranked=[_ranked_model(rp) for rp in session.ranked],
            clusters=[_cluster_model(session, c) for c in session.clusters],
        )

    @app.post("/v1/sessions/{session_id}/translate",
              response_model=schemas.ClustersResponse)
    def translate(session_id: str):
        session = manager.translate(session_id)
        return schemas.ClustersResponse(
            session_id=session.session_id,
            stage=session.stage,
            clusters=[_cluster_model(session, c) for c in session.clusters],
        )

    @app.get("/v1/sessions/{session_id}/clusters",
             response_model=schemas.ClustersResponse)
    def clusters(session_id: str):
        session = manager.get(session_id)
        session.require("clustered")
        return schemas.ClustersResponse(
            session_id=session.session_id,
            stage=session.stage,
            clusters=[_cluster_model(session, c) for c in session.clusters],
        )

    @app.get("/v1/sessions/{session_id}/clusters/{cluster_id}/sources",
             response_model=schemas.SourcesResponse)
    def sources(session_id: str, cluster_id: str):
        groups = manager.sources(session_id, cluster_id)
        return schemas.SourcesResponse(
            cluster_id=cluster_id,
            groups=[schemas.SourceGroupModel(**g) for g in groups],
        )

    @app.get("/v1/sessions/{session_id}/items/{item_id}/preview",
             response_model=schemas.PreviewResponse)
    def preview(session_id: str, item_id: str):
        _, results = manager.preview(session_id, item_id)
        return schemas.PreviewResponse(
            item_id=item_id,
            results=[_preview_model(r) for r in results],
        )

    @app.post("/v1/sessions/{session_id}/items/{item_id}/bookmark",
              response_model=schemas.BookmarkResponse)
    def bookmark(session_id: str, item_id: str):
        state = manager.bookmark(session_id, item_id)
        return schemas.BookmarkResponse(item_id=item_id, bookmark=state)

    @app.get("/v1/sessions/{session_id}/progress",
             response_model=schemas.ProgressResponse)
    def progress(session_id: str):
        session = manager.get(session_id)
        step = manager.current_step(session_id)
        return schemas.ProgressResponse(
            session_id=session.session_id,
            stage=session.stage,
            busy=step is not None,
            step=step,
            screens=[schemas.ScreenStatusModel(
                screen_id=s.screen_id,
                width=s.width,
                height=s.height,
                reconstruction_status=s.reconstruction_status,
            ) for s in session.mockup.screens],
            bookmarks=sorted(session.bookmarks),
            timings=dict(session.timings),
            warnings=list(session.warnings),
        )

    @app.get("/v1/health")
    def health():
        return {"status": "ok"}

    return app
