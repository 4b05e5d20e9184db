"""The six-dimension design context shared by papers and mockups."""

from __future__ import annotations

from dataclasses import dataclass, fields

# Canonical dimension order. Every consumer (embedding, retrieval, prompts,
# wire formats) iterates dimensions in exactly this order.
DIMENSIONS = ("target_user", "domain", "modality", "pain_point", "client", "metric")

DIMENSION_LABELS = {
    "target_user": "target user (who the design is for)",
    "domain": "domain (the industry or field the design targets)",
    "modality": "modality (the primary interaction mode or medium)",
    "pain_point": "pain point (the main user problem to address)",
    "client": "client (the entity or stakeholder commissioning or benefiting from the design)",
    "metric": "metric (the key performance indicator used to measure success)",
}


@dataclass(frozen=True)
class DesignContext:
    """Values for the six design-context dimensions; None marks an absent one."""

    target_user: str | None = None
    domain: str | None = None
    modality: str | None = None
    pain_point: str | None = None
    client: str | None = None
    metric: str | None = None
    origin: str = "paper"  # "paper" | "mockup"

    def __post_init__(self):
        if self.origin not in ("paper", "mockup"):
            raise ValueError(f"origin must be 'paper' or 'mockup', got {self.origin!r}")
        for name in DIMENSIONS:
            value = getattr(self, name)
            if value is not None and not value.strip():
                raise ValueError(f"dimension {name} is present but blank")

    def value(self, name: str) -> str | None:
        if name not in DIMENSIONS:
            raise KeyError(name)
        return getattr(self, name)

    def present_dimensions(self) -> list[str]:
        """Dimension names with values, in canonical order."""
        return [name for name in DIMENSIONS if getattr(self, name) is not None]

    def to_dict(self) -> dict:
        out = {name: getattr(self, name) for name in DIMENSIONS}
        out["origin"] = self.origin
        return out

    @classmethod
    def from_dict(cls, data: dict, origin: str | None = None) -> "DesignContext":
        """Build a context from a plain dict, treating blank strings as absent.

        Unknown keys are ignored; only the six canonical dimensions are read.
        """
        kwargs = {}
        for name in DIMENSIONS:
            value = data.get(name)
            if isinstance(value, str) and value.strip():
                kwargs[name] = value.strip()
            else:
                kwargs[name] = None
        kwargs["origin"] = origin or data.get("origin", "paper")
        return cls(**kwargs)


def context_summary(ctx: DesignContext) -> str:
    """Human-readable one-dimension-per-line rendering used in prompts."""
    lines = []
    for name in DIMENSIONS:
        value = ctx.value(name)
        lines.append(f"- {name}: {value if value is not None else '(absent)'}")
    return "\n".join(lines)


# Keep dataclass field order aligned with DIMENSIONS; prompt builders and
# serializers rely on it.
assert tuple(f.name for f in fields(DesignContext))[:6] == DIMENSIONS
