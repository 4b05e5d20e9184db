"""Versioned prompt templates, one file per pipeline stage.

Each stage's system instruction lives in <stage>.txt next to this module.
Keeping them as plain files makes every stage auditable and keeps request
digests stable across code changes that don't touch the wording.
"""

from __future__ import annotations

from functools import lru_cache
from importlib import resources

STAGES = (
    "paper_context",
    "paper_implications",
    "mockup_context",
    "mockup_reconstruction",
    "compare_contrast",
    "relations",
    "key_insights",
    "tailored_insight",
    "cluster_title",
    "action_items",
    "plan_edits",
)


@lru_cache(maxsize=None)
def system_instruction(stage: str) -> str:
    """Load the system instruction for a stage."""
    if stage not in STAGES:
        raise KeyError(f"unknown prompt stage {stage!r}")
    return resources.files(__package__).joinpath(f"{stage}.txt").read_text("utf-8")
