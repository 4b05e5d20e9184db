"""Per-cluster translation: four content pieces plus action items.

Each piece comes from its own provider call and template, staged so every
call consumes the previous stage's output: compare/contrast overview,
per-implication relations, key insights, tailored insight, then a title
and up to three action items. Conflicts between implications resolve
toward the source context closest to the designer's, using the retrieval
similarity as the closeness measure.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

from .clustering import InsightCluster
from .context import DesignContext, context_summary
from .errors import (
    NoActionItemsError,
    RefineError,
    SchemaError,
    TranslationFailedError,
)
from .prompts import system_instruction
from .providers import ImagePart, ProviderRequest, SchemaHint, TextPart, call, parse_structured

logger = logging.getLogger(__name__)

TITLE_MAX_CHARS = 80
MAX_ACTION_ITEMS = 3


@dataclass(frozen=True)
class TranslationBundle:
    """The translated content for one cluster."""

    cluster_id: str
    compare_contrast: str
    relations: tuple[str, ...]
    key_insights: str
    tailored_insight: str
    title: str


@dataclass(frozen=True)
class ActionItem:
    item_id: str
    cluster_id: str
    text: str
    target_screen_ids: tuple[str, ...] = ()
    visually_representable: bool = False
    bookmark: bool = False

    def to_dict(self) -> dict:
        return {
            "item_id": self.item_id,
            "cluster_id": self.cluster_id,
            "text": self.text,
            "target_screen_ids": list(self.target_screen_ids),
            "visually_representable": self.visually_representable,
            "bookmark": self.bookmark,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ActionItem":
        return cls(
            item_id=data["item_id"],
            cluster_id=data["cluster_id"],
            text=data["text"],
            target_screen_ids=tuple(data.get("target_screen_ids") or ()),
            visually_representable=bool(data.get("visually_representable")),
            bookmark=bool(data.get("bookmark")),
        )


def _cluster_papers(cluster: InsightCluster) -> list[str]:
    ordered = []
    for imp in cluster.implications:
        if imp.paper_id not in ordered:
            ordered.append(imp.paper_id)
    return ordered


def _implications_block(cluster: InsightCluster, numbered: bool = False) -> str:
    lines = []
    for i, imp in enumerate(cluster.implications):
        prefix = f"{i}." if numbered else "-"
        lines.append(f"{prefix} (paper {imp.paper_id}) {imp.text}")
        lines.append(f"   Source paragraph: {imp.source_paragraph}")
    return "\n".join(lines)


def _paper_contexts_block(cluster: InsightCluster, paper_ctxs: dict) -> str:
    lines = []
    for paper_id in _cluster_papers(cluster):
        lines.append(f"Paper {paper_id}:")
        lines.append(context_summary(paper_ctxs[paper_id]))
    return "\n".join(lines)


def build_compare_payload(cluster: InsightCluster, designer_ctx: DesignContext,
                          paper_ctxs: dict) -> str:
    return (
        f"[Designer context]\n{context_summary(designer_ctx)}\n\n"
        f"[Implication group]\n{_implications_block(cluster)}\n\n"
        f"[Paper contexts]\n{_paper_contexts_block(cluster, paper_ctxs)}"
    )


def build_relations_payload(cluster: InsightCluster, designer_ctx: DesignContext,
                            paper_ctxs: dict, compare_text: str) -> str:
    return (
        f"[Designer context]\n{context_summary(designer_ctx)}\n\n"
        f"[Similarities and differences overview]\n{compare_text}\n\n"
        f"[Implications]\n{_implications_block(cluster, numbered=True)}\n\n"
        f"[Paper contexts]\n{_paper_contexts_block(cluster, paper_ctxs)}"
    )


def build_key_insights_payload(cluster: InsightCluster, designer_ctx: DesignContext,
                               compare_text: str, relations) -> str:
    relation_lines = "\n".join(f"{i}. {text}" for i, text in enumerate(relations))
    return (
        f"[Designer context]\n{context_summary(designer_ctx)}\n\n"
        f"[Implication group]\n{_implications_block(cluster)}\n\n"
        f"[Similarities and differences overview]\n{compare_text}\n\n"
        f"[Per-implication applicability]\n{relation_lines}"
    )


def build_tailored_payload(cluster: InsightCluster, designer_ctx: DesignContext,
                           key_insights: str, relations, similarities: dict) -> str:
    relation_lines = "\n".join(f"{i}. {text}" for i, text in enumerate(relations))
    closeness = "\n".join(
        f"Paper {paper_id}: retrieval similarity {similarities[paper_id]:.6f}"
        for paper_id in _cluster_papers(cluster)
    )
    return (
        f"[Designer context]\n{context_summary(designer_ctx)}\n\n"
        f"[Key insights]\n{key_insights}\n\n"
        f"[Per-implication applicability]\n{relation_lines}\n\n"
        f"[Source paper closeness to the designer's context]\n{closeness}"
    )


def build_title_payload(key_insights: str, tailored_insight: str) -> str:
    return (
        f"[Key insights]\n{key_insights}\n\n"
        f"[Tailored insight]\n{tailored_insight}"
    )


_TEXT_HINT = SchemaHint(
    description='JSON object {"text": String}',
    kind="object",
    required_keys=("text",),
)

_RELATIONS_HINT = SchemaHint(
    description=('JSON array with one object per implication, in input '
                 'order: {"implication_index": Int, "text": String}'),
    kind="array",
    required_keys=("implication_index", "text"),
)

_TITLE_HINT = SchemaHint(
    description='JSON object {"title": String}',
    kind="object",
    required_keys=("title",),
)


def _chat(stage: str, user_text: str, hint: SchemaHint, provider):
    request = ProviderRequest(
        kind="chat",
        stage=stage,
        system_instruction=system_instruction(stage),
        user_parts=(TextPart(user_text),),
        response_schema_hint=hint.description,
    )
    response = call(request, provider)
    return parse_structured(response.text, hint)


def _required_text(payload: dict, key: str, stage: str) -> str:
    value = payload.get(key)
    if not isinstance(value, str) or not value.strip():
        raise SchemaError(f"{stage} returned an empty {key}",
                          span=str(payload)[:200])
    return value.strip()


def compare_and_contrast(cluster: InsightCluster, designer_ctx: DesignContext,
                         paper_ctxs: dict, provider) -> str:
    """Overview of how the cluster's source contexts relate to the designer's."""
    payload = _chat("compare_contrast",
                    build_compare_payload(cluster, designer_ctx, paper_ctxs),
                    _TEXT_HINT, provider)
    return _required_text(payload, "text", "compare_contrast")


def derive_relations_and_insights(cluster: InsightCluster, designer_ctx: DesignContext,
                                  paper_ctxs: dict, similarities: dict,
                                  compare_text: str, provider):
    """Staged reasoning: per-implication relations, then the key-insights
    summary, then the insight tailored to the designer's context.

    Returns (relations, key_insights, tailored_insight). The tailored
    stage is told each source paper's retrieval similarity so conflicts
    resolve toward the closest context.
    """
    n = len(cluster.implications)
    payload = _chat("relations",
                    build_relations_payload(cluster, designer_ctx, paper_ctxs,
                                            compare_text),
                    _RELATIONS_HINT, provider)
    if len(payload) != n:
        raise SchemaError(
            f"relations returned {len(payload)} entries for {n} implications")
    by_index: dict[int, str] = {}
    for entry in payload:
        idx = entry.get("implication_index")
        text = entry.get("text")
        if (not isinstance(idx, int) or isinstance(idx, bool)
                or idx in by_index or not 0 <= idx < n):
            raise SchemaError(f"bad implication_index {idx!r} in relations",
                              span=str(entry)[:200])
        if not isinstance(text, str) or not text.strip():
            raise SchemaError("relations entry has empty text",
                              span=str(entry)[:200])
        by_index[idx] = text.strip()
    relations = tuple(by_index[i] for i in range(n))

    payload = _chat("key_insights",
                    build_key_insights_payload(cluster, designer_ctx,
                                               compare_text, relations),
                    _TEXT_HINT, provider)
    key_insights = _required_text(payload, "text", "key_insights")

    payload = _chat("tailored_insight",
                    build_tailored_payload(cluster, designer_ctx, key_insights,
                                           relations, similarities),
                    _TEXT_HINT, provider)
    tailored = _required_text(payload, "text", "tailored_insight")
    return relations, key_insights, tailored


def truncate_title(title: str, limit: int = TITLE_MAX_CHARS) -> str:
    """Cut at a word boundary and add an ellipsis, total length <= limit."""
    title = " ".join(title.split())
    if len(title) <= limit:
        return title
    cut = title[:limit - 1]
    boundary = cut.rfind(" ")
    if boundary > 0:
        cut = cut[:boundary]
    return cut.rstrip(" ,;:-") + "…"


def generate_title(key_insights: str, tailored_insight: str, provider) -> str:
    """One short call-to-action line for the cluster, <= 80 chars."""
    if not key_insights.strip() or not tailored_insight.strip():
        raise ValueError("generate_title needs non-empty inputs")
    payload = _chat("cluster_title",
                    build_title_payload(key_insights, tailored_insight),
                    _TITLE_HINT, provider)
    title = payload.get("title")
    if not isinstance(title, str) or not title.strip():
        raise SchemaError("cluster_title returned an empty title",
                          span=str(payload)[:200])
    return truncate_title(title.strip())


_ACTION_ITEMS_HINT = SchemaHint(
    description=('JSON array of 1 to 3 objects: {"text": String, '
                 '"target_screen_ids": [String], "visually_representable": Bool}'),
    kind="array",
    required_keys=("text", "target_screen_ids", "visually_representable"),
)


def build_action_items_payload(mockup, cluster: InsightCluster,
                               bundle: TranslationBundle) -> str:
    return (
        f"[Designer context]\n{context_summary(mockup.context)}\n\n"
        f"[Tailored insight]\n{bundle.tailored_insight}\n\n"
        f"[Implication group]\n{_implications_block(cluster)}\n\n"
        f"[Screens]\nScreens in order: {', '.join(mockup.screen_ids())}. "
        f"Images follow in the same order."
    )


def generate_action_items(mockup, cluster: InsightCluster,
                          bundle: TranslationBundle, provider) -> list[ActionItem]:
    """One vision call proposing up to three concrete mockup changes.

    Unknown screen ids are dropped with a warning; an item flagged
    visually representable that loses all its screens is dropped whole.
    At most three items survive, in provider order.
    """
    parts = [TextPart(build_action_items_payload(mockup, cluster, bundle))]
    parts.extend(ImagePart(s.png_bytes) for s in mockup.screens)
    request = ProviderRequest(
        kind="vision_chat",
        stage="action_items",
        system_instruction=system_instruction("action_items"),
        user_parts=tuple(parts),
        response_schema_hint=_ACTION_ITEMS_HINT.description,
    )
    response = call(request, provider)
    payload = parse_structured(response.text, _ACTION_ITEMS_HINT)

    known = set(mockup.screen_ids())
    items: list[ActionItem] = []
    for entry in payload:
        text = entry.get("text")
        targets = entry.get("target_screen_ids")
        flag = entry.get("visually_representable")
        if not isinstance(text, str) or not text.strip():
            raise SchemaError("action item text must be a non-empty string",
                              span=str(entry)[:200])
        if not isinstance(targets, list) or any(not isinstance(t, str) for t in targets):
            raise SchemaError("target_screen_ids must be an array of strings",
                              span=str(entry)[:200])
        if not isinstance(flag, bool):
            raise SchemaError("visually_representable must be a boolean",
                              span=str(entry)[:200])
        resolved = tuple(t for t in targets if t in known)
        dropped = [t for t in targets if t not in known]
        if dropped:
            logger.warning("cluster %s: action item targets unknown screen(s) %s",
                           cluster.cluster_id, ", ".join(dropped))
        if flag and not resolved:
            logger.warning("cluster %s: dropping representable action item with "
                           "no valid screens", cluster.cluster_id)
            continue
        items.append(ActionItem(
            item_id="",  # assigned after trimming
            cluster_id=cluster.cluster_id,
            text=text.strip(),
            target_screen_ids=resolved,
            visually_representable=flag,
        ))
        if len(items) == MAX_ACTION_ITEMS:
            break
    if not items:
        raise NoActionItemsError(
            f"no usable action items for cluster {cluster.cluster_id}")
    return [replace(item, item_id=f"{cluster.cluster_id}:a{i + 1}")
            for i, item in enumerate(items)]


def translate_cluster(cluster: InsightCluster, designer_ctx: DesignContext,
                      paper_ctxs: dict, similarities: dict, provider) -> TranslationBundle:
    """Run the full per-cluster chain; stages are strictly sequential."""
    compare_text = compare_and_contrast(cluster, designer_ctx, paper_ctxs, provider)
    relations, key_insights, tailored = derive_relations_and_insights(
        cluster, designer_ctx, paper_ctxs, similarities, compare_text, provider)
    title = generate_title(key_insights, tailored, provider)
    return TranslationBundle(
        cluster_id=cluster.cluster_id,
        compare_contrast=compare_text,
        relations=relations,
        key_insights=key_insights,
        tailored_insight=tailored,
        title=title,
    )


def apply_translation(cluster: InsightCluster, bundle: TranslationBundle,
                      items) -> InsightCluster:
    return replace(
        cluster,
        title=bundle.title,
        compare_contrast=bundle.compare_contrast,
        relations=bundle.relations,
        key_insights=bundle.key_insights,
        tailored_insight=bundle.tailored_insight,
        action_items=tuple(items),
    )


def translate_all(clusters, designer_ctx: DesignContext, ranked, mockup,
                  provider, max_workers: int = 4):
    """Translate every cluster, concurrently, isolating failures.

    Returns (clusters, warnings); a cluster whose chain fails is returned
    untranslated with a warning. Raises TranslationFailedError only when
    every cluster fails.
    """
    if not clusters:
        return [], []
    paper_ctxs = {rp.paper_id: rp.context for rp in ranked}
    similarities = {rp.paper_id: rp.similarity for rp in ranked}

    def run(cluster: InsightCluster):
        try:
            bundle = translate_cluster(cluster, designer_ctx, paper_ctxs,
                                       similarities, provider)
        except RefineError as exc:
            return cluster, f"cluster {cluster.cluster_id}: translation failed: {exc}"
        items: list[ActionItem] = []
        if mockup is not None and mockup.screens:
            try:
                items = generate_action_items(mockup, cluster, bundle, provider)
            except RefineError as exc:
                logger.warning("cluster %s: action items failed: %s",
                               cluster.cluster_id, exc)
        return apply_translation(cluster, bundle, items), None

    results = []
    warnings = []
    with ThreadPoolExecutor(max_workers=min(max_workers, len(clusters))) as pool:
        for cluster, warning in pool.map(run, clusters):
            results.append(cluster)
            if warning:
                warnings.append(warning)
                logger.warning("%s", warning)
    if clusters and len(warnings) == len(clusters):
        raise TranslationFailedError("every cluster failed to translate")
    return results, warnings
