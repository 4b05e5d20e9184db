"""Research-informed mockup iteration.

Pipeline: TEI papers -> design contexts + implications -> embedding
index -> contextual retrieval -> implication clusters -> translated
insights and action items -> before/after HTML previews.
"""

__version__ = "0.1.0"

from .context import DIMENSIONS, DesignContext
from .errors import RefineError

__all__ = ["DIMENSIONS", "DesignContext", "RefineError", "__version__"]
