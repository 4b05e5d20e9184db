"""Wire models for the HTTP API.

Screens travel as base64 PNG inside JSON bodies; nested payloads
(ranked papers, clusters, previews) reuse the session serializers so
the API and the session file always agree on shape.
"""
from __future__ import annotations

from pydantic import BaseModel, Field


class CreateSessionRequest(BaseModel):
    screens: list[str] = Field(..., description="base64-encoded PNG screens, in order")
    session_id: str | None = None


class ContextPayload(BaseModel):
    target_user: str | None = None
    domain: str | None = None
    modality: str | None = None
    pain_point: str | None = None
    client: str | None = None
    metric: str | None = None


class SessionCreatedResponse(BaseModel):
    session_id: str
    stage: str
    context: ContextPayload | None
    screen_ids: list[str]
    warnings: list[str]


class ContextResponse(BaseModel):
    session_id: str
    stage: str
    context: ContextPayload


class RankedPaperModel(BaseModel):
    paper_id: str
    title: str
    similarity: float
    valid_dimensions: list[str]
    context: ContextPayload


class ActionItemModel(BaseModel):
    item_id: str
    cluster_id: str
    text: str
    target_screen_ids: list[str]
    visually_representable: bool
    bookmark: bool


class ImplicationModel(BaseModel):
    implication_id: str
    paper_id: str
    text: str
    source_paragraph: str


class ClusterModel(BaseModel):
    cluster_id: str
    size: int
    title: str | None
    compare_contrast: str | None
    relations: list[str]
    key_insights: str | None
    tailored_insight: str | None
    implications: list[ImplicationModel]
    action_items: list[ActionItemModel]


class RetrieveResponse(BaseModel):
    session_id: str
    stage: str
    ranked: list[RankedPaperModel]
    clusters: list[ClusterModel]


class ClustersResponse(BaseModel):
    session_id: str
    stage: str
    clusters: list[ClusterModel]


class SourceGroupModel(BaseModel):
    paper_id: str
    title: str
    implications: list[dict]


class SourcesResponse(BaseModel):
    cluster_id: str
    groups: list[SourceGroupModel]


class DomEditModel(BaseModel):
    op: str
    reference_element_id: str
    edited_element: str | None
    position: str | None
    rationale: str


class PreviewResultModel(BaseModel):
    item_id: str
    screen_id: str
    before_html: str
    after_html: str
    edits_applied: list[DomEditModel]
    warnings: list[str]


class PreviewResponse(BaseModel):
    item_id: str
    results: list[PreviewResultModel]


class BookmarkResponse(BaseModel):
    item_id: str
    bookmark: bool


class ScreenStatusModel(BaseModel):
    screen_id: str
    width: int
    height: int
    reconstruction_status: str


class ProgressResponse(BaseModel):
    session_id: str
    stage: str
    busy: bool
    step: str | None
    screens: list[ScreenStatusModel]
    bookmarks: list[str]
    timings: dict[str, float]
    warnings: list[str]


class SessionResponse(BaseModel):
    """Full session snapshot, shaped like the session file."""

    session: dict


class ErrorResponse(BaseModel):
    error: str
    detail: str
