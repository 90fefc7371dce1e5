"""Embedding store with exact cosine retrieval.

The scan kernel lives in a compiled extension when available; see
`sowgen.vecstore.kernel.KERNEL_BACKEND` for which path is active.
"""

from sowgen.vecstore.kernel import KERNEL_BACKEND
from sowgen.vecstore.store import (
    DEFAULT_DIM,
    FORMAT_VERSION,
    ClauseRecord,
    RetrievalHit,
    VectorStore,
    cosine,
)

__all__ = [
    "DEFAULT_DIM",
    "FORMAT_VERSION",
    "KERNEL_BACKEND",
    "ClauseRecord",
    "RetrievalHit",
    "VectorStore",
    "cosine",
]
