#!/usr/bin/env python3
"""Benchmark the similarity-scan kernels: compiled extension vs numpy fallback.

Times raw score computation and full store searches across store sizes.

    python3 benchmarks/bench_search.py [--dim 384] [--queries 50] [--k 10]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from sowgen.vecstore import ClauseRecord, VectorStore
from sowgen.vecstore import kernel


def time_kernel(fn, matrix, norms, queries, repeats: int = 3) -> float:
    best = float("inf")
    for _ in range(repeats):
        started = time.perf_counter()
        for query in queries:
            qn = float(np.linalg.norm(query))
            fn(matrix, norms, query, qn)
        best = min(best, time.perf_counter() - started)
    return best


def time_store_search(store, queries, k: int) -> float:
    started = time.perf_counter()
    for query in queries:
        store.search(query, k, 0.0)
    return time.perf_counter() - started


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--dim", type=int, default=384)
    parser.add_argument("--queries", type=int, default=50)
    parser.add_argument("--k", type=int, default=10)
    parser.add_argument("--sizes", type=int, nargs="+", default=[1_000, 5_000, 20_000])
    args = parser.parse_args()

    rng = np.random.default_rng(7)
    queries = [rng.normal(size=args.dim) for _ in range(args.queries)]

    print(f"active kernel backend: {kernel.KERNEL_BACKEND}")
    print(f"dim={args.dim} queries={args.queries} k={args.k}")
    header = f"{'records':>8}  {'numpy (ms)':>12}  {'native (ms)':>12}  {'speedup':>8}  {'search (ms)':>12}"
    print(header)
    print("-" * len(header))

    for n in args.sizes:
        matrix = np.ascontiguousarray(rng.normal(size=(n, args.dim)))
        norms = np.sqrt(np.einsum("ij,ij->i", matrix, matrix))
        numpy_t = time_kernel(kernel.cosine_scores_numpy, matrix, norms, queries)
        if kernel.cosine_scores_native is not None:
            native_t = time_kernel(kernel.cosine_scores_native, matrix, norms, queries)
            native_ms = f"{native_t * 1e3:12.2f}"
            speedup = f"{numpy_t / native_t:8.2f}"
        else:
            native_ms = f"{'absent':>12}"
            speedup = f"{'-':>8}"

        store = VectorStore(dim=args.dim)
        for i in range(n):
            store.upsert(
                ClauseRecord(
                    clause_id=f"c{i:06d}",
                    text="",
                    canonical_key=None,
                    source_doc_id="bench",
                    embedding=matrix[i],
                )
            )
        search_t = time_store_search(store, queries, args.k)
        print(
            f"{n:>8}  {numpy_t * 1e3:12.2f}  {native_ms}  {speedup}  {search_t * 1e3:12.2f}"
        )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
