"""Exception taxonomy shared across the pipeline.

Every error raised by refine derives from RefineError so callers (CLI,
HTTP layer) can map them to exit codes / status codes in one place.
"""

from __future__ import annotations


class RefineError(Exception):
    """Base class for all refine errors."""


# --- provider gateway ---------------------------------------------------

class TransportError(RefineError):
    """Network or HTTP failure talking to a provider, after retries."""


class SchemaError(RefineError):
    """Model output did not match the expected structure.

    Carries the offending span when one can be identified.
    """

    def __init__(self, message: str, span: str | None = None):
        super().__init__(message)
        self.span = span


class FixtureMiss(RefineError):
    """Replay-mode cache miss where a network call is not allowed."""

    def __init__(self, digest: str, stage: str = ""):
        super().__init__(f"no recorded response for digest {digest}"
                         + (f" (stage {stage})" if stage else ""))
        self.digest = digest
        self.stage = stage


# --- paper pipeline -----------------------------------------------------

class XmlParseError(RefineError):
    """Input is not well-formed XML."""


class EmptyBodyError(RefineError):
    """Parsed document has no body paragraphs."""


# --- vector index -------------------------------------------------------

class SchemaVersionError(RefineError):
    """Index file carries an unsupported schema version."""


class DimMismatchError(RefineError):
    """Vectors of differing length where one dimensionality is required."""


class IndexFormatError(RefineError):
    """Index file is structurally malformed."""


# --- retrieval ----------------------------------------------------------

class ZeroNormError(RefineError):
    """Cosine similarity is undefined for a zero-norm vector."""


class LengthMismatchError(RefineError):
    """Vectors of unequal length passed to a pairwise operation."""


class NoEligiblePapersError(RefineError):
    """No index entry shares a present dimension with the query."""


# --- clustering ---------------------------------------------------------

class SingleClusterError(RefineError):
    """Silhouette requires at least two clusters."""


class NoImplicationsError(RefineError):
    """Retrieved papers carry no implications to cluster."""


# --- translation --------------------------------------------------------

class NoActionItemsError(RefineError):
    """Provider returned no usable action items for a cluster."""


class TranslationFailedError(RefineError):
    """Every cluster failed to translate."""


# --- mockup engine ------------------------------------------------------

class HtmlParseError(RefineError):
    """Provider output could not be parsed as an HTML document."""


class FragmentParseError(RefineError):
    """An edit payload is not a usable HTML fragment."""


class InvalidReferenceError(RefineError):
    """An edit references element ids absent from the target document,
    or anchors to an element that cannot take the operation."""

    def __init__(self, bad_ids: list[str], edit_index: int | None = None,
                 reason: str | None = None):
        at = f" (edit {edit_index})" if edit_index is not None else ""
        message = reason or f"unknown element id(s) {', '.join(bad_ids)}"
        super().__init__(message + at)
        self.bad_ids = bad_ids
        self.edit_index = edit_index


class AllAbsentError(RefineError):
    """Extraction found none of the six design-context dimensions."""


class BadImageError(RefineError):
    """Uploaded screen is not a usable PNG, or the screen count is out of range."""


class PreviewFailedError(RefineError):
    """Every target screen of a preview failed."""


class NotRepresentableError(RefineError):
    """Preview requested for an action item flagged as not visually representable."""


class ReconstructionPendingError(RefineError):
    """Target screen HTML is still being reconstructed; retry later."""


# --- service ------------------------------------------------------------

class UnknownSessionError(RefineError):
    """No session with the given id."""


class UnknownClusterError(RefineError):
    """No cluster with the given id in this session."""


class UnknownItemError(RefineError):
    """No action item with the given id in this session."""


class StageError(RefineError):
    """Operation requires a pipeline stage the session has not reached."""
