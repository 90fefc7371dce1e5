# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled scoring loop: cosine of one query against every stored row.

The dot product uses four fixed accumulator chains so the compiler can
pipeline independent multiply-adds; the summation order is static, keeping
results bit-stable across runs of the same build.
"""

import numpy as np


def cosine_scores(const double[:, ::1] matrix, const double[::1] row_norms,
                  const double[::1] query, double query_norm):
    """Return dot(matrix[i], query) / (row_norms[i] * query_norm) per row."""
    cdef Py_ssize_t n = matrix.shape[0]
    cdef Py_ssize_t d = matrix.shape[1]
    cdef Py_ssize_t d4 = d - (d % 4)
    cdef Py_ssize_t i, j
    cdef double a0, a1, a2, a3
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] out_view = out
    with nogil:
        for i in range(n):
            a0 = a1 = a2 = a3 = 0.0
            j = 0
            while j < d4:
                a0 += matrix[i, j] * query[j]
                a1 += matrix[i, j + 1] * query[j + 1]
                a2 += matrix[i, j + 2] * query[j + 2]
                a3 += matrix[i, j + 3] * query[j + 3]
                j += 4
            while j < d:
                a0 += matrix[i, j] * query[j]
                j += 1
            out_view[i] = ((a0 + a1) + (a2 + a3)) / (row_norms[i] * query_norm)
    return out
