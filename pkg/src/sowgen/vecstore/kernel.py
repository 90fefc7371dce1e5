"""Scoring kernel selection.

The compiled extension is preferred when the build produced it; otherwise the
numpy expression below does the same work. `SOWGEN_KERNEL=numpy` forces the
fallback (useful when a tuned BLAS outruns the extension — see
benchmarks/bench_search.py, which compares both). Both paths are exposed for
that benchmark.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from sowgen.vecstore._native import cosine_scores as cosine_scores_native
except ImportError:  # extension not built; pure-Python install
    cosine_scores_native = None


def cosine_scores_numpy(
    matrix: np.ndarray, row_norms: np.ndarray, query: np.ndarray, query_norm: float
) -> np.ndarray:
    return (matrix @ query) / (row_norms * query_norm)


_forced = os.environ.get("SOWGEN_KERNEL", "").strip().lower()
if _forced == "numpy" or cosine_scores_native is None:
    KERNEL_BACKEND = "numpy"
    cosine_scores = cosine_scores_numpy
else:
    KERNEL_BACKEND = "native"
    cosine_scores = cosine_scores_native
