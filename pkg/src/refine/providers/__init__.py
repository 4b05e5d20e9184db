from .base import (
    ImagePart,
    Part,
    Provider,
    ProviderRequest,
    ProviderResponse,
    SchemaHint,
    TextPart,
    call,
    canonical_request,
    parse_structured,
    request_digest,
    strip_fences,
)
from .fixtures import FixtureProvider, FixtureStore
from .http import HttpProvider

__all__ = [
    "ImagePart",
    "Part",
    "Provider",
    "ProviderRequest",
    "ProviderResponse",
    "SchemaHint",
    "TextPart",
    "call",
    "canonical_request",
    "parse_structured",
    "request_digest",
    "strip_fences",
    "FixtureProvider",
    "FixtureStore",
    "HttpProvider",
]
