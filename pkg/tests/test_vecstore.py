from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import oracle_search
from sowgen.errors import DimensionMismatch, LoadError, ZeroNorm
from sowgen.vecstore import ClauseRecord, VectorStore, cosine


def record(clause_id: str, vector, avg: float = 0.0, dim: int | None = None) -> ClauseRecord:
    return ClauseRecord(
        clause_id=clause_id,
        text=f"text of {clause_id}",
        canonical_key=None,
        source_doc_id="doc",
        embedding=np.asarray(vector, dtype=np.float64),
        feedback_avg=avg,
        created_at="2024-01-01T00:00:00+00:00",
    )


def random_store(n: int, dim: int, seed: int, alpha: float = 0.1) -> VectorStore:
    rng = np.random.default_rng(seed)
    store = VectorStore(dim=dim, feedback_alpha=alpha)
    for i in range(n):
        vec = rng.normal(size=dim)
        store.upsert(record(f"c{i:05d}", vec / np.linalg.norm(vec)))
    return store


class TestCosine:
    def test_identity(self):
        v = np.array([0.3, -1.2, 2.0, 0.0])
        assert cosine(v, v) == pytest.approx(1.0, abs=1e-9)

    def test_orthogonal(self):
        a = np.zeros(8)
        b = np.zeros(8)
        a[0] = 1.0
        b[1] = 1.0
        assert cosine(a, b) == 0.0

    def test_hand_computed_half_sqrt2(self):
        a = np.zeros(8)
        b = np.zeros(8)
        a[0] = 1.0
        b[0] = 1.0
        b[1] = 1.0
        assert cosine(a, b) == pytest.approx(0.7071068, abs=1e-6)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            cosine([1.0, 0.0], [1.0, 0.0, 0.0])

    def test_zero_norm(self):
        with pytest.raises(ZeroNorm):
            cosine([0.0, 0.0], [1.0, 0.0])

    @given(st.integers(0, 2**32 - 1))
    def test_symmetry(self, seed):
        rng = np.random.default_rng(seed)
        a, b = rng.normal(size=16), rng.normal(size=16)
        assert abs(cosine(a, b) - cosine(b, a)) <= 1e-12

    @given(st.integers(0, 2**32 - 1), st.floats(min_value=1e-3, max_value=1e3))
    def test_positive_scale_invariance(self, seed, scale):
        rng = np.random.default_rng(seed)
        a, b = rng.normal(size=16), rng.normal(size=16)
        assert cosine(a * scale, b) == pytest.approx(cosine(a, b), abs=1e-9)
        assert cosine(a, b * scale) == pytest.approx(cosine(a, b), abs=1e-9)


class TestUpsert:
    def test_round_trip(self):
        store = VectorStore(dim=4)
        r = record("c1", [1.0, 0.0, 0.0, 0.0])
        store.upsert(r)
        got = store.get("c1")
        assert got.clause_id == "c1"
        assert got.text == "text of c1"
        assert np.array_equal(got.embedding, r.embedding)

    def test_dim_mismatch(self):
        store = VectorStore(dim=384)
        with pytest.raises(DimensionMismatch):
            store.upsert(record("c1", [1.0, 2.0, 3.0]))

    def test_upsert_same_id_replaces(self):
        store = VectorStore(dim=4)
        store.upsert(record("c1", [1.0, 0.0, 0.0, 0.0]))
        store.upsert(record("c1", [0.0, 1.0, 0.0, 0.0]))
        assert len(store) == 1
        assert store.get("c1").embedding[1] == 1.0

    def test_zero_vector_rejected(self):
        store = VectorStore(dim=4)
        with pytest.raises(ZeroNorm):
            store.upsert(record("c1", [0.0, 0.0, 0.0, 0.0]))

    def test_non_finite_rejected(self):
        store = VectorStore(dim=4)
        with pytest.raises(ValueError):
            store.upsert(record("c1", [1.0, float("nan"), 0.0, 0.0]))


class TestSearch:
    def test_k_zero(self):
        store = random_store(5, 8, seed=1)
        assert store.search(np.ones(8), 0, 0.0) == []

    def test_identity_query_ranks_first(self):
        store = random_store(20, 16, seed=2)
        target = store.get("c00007").embedding
        hits = store.search(target, 3, 0.0)
        assert hits[0].clause_id == "c00007"
        assert hits[0].raw_score == pytest.approx(1.0, abs=1e-9)

    def test_min_score_filters_raw(self):
        store = VectorStore(dim=2)
        store.upsert(record("close", [1.0, 0.05]))
        store.upsert(record("far", [0.05, 1.0]))
        hits = store.search(np.array([1.0, 0.0]), 10, 0.9)
        assert [h.clause_id for h in hits] == ["close"]

    def test_tie_broken_by_clause_id(self):
        store = VectorStore(dim=2)
        store.upsert(record("b", [2.0, 0.0]))
        store.upsert(record("a", [3.0, 0.0]))
        hits = store.search(np.array([1.0, 0.0]), 2, 0.0)
        assert [h.clause_id for h in hits] == ["a", "b"]

    def test_adjusted_score_uses_feedback(self):
        store = VectorStore(dim=2, feedback_alpha=0.1)
        store.upsert(record("liked", [1.0, 0.3], avg=1.0))
        store.upsert(record("plain", [1.0, 0.3]))
        hits = store.search(np.array([1.0, 0.3]), 2, 0.0)
        assert hits[0].clause_id == "liked"
        assert hits[0].adjusted_score == pytest.approx(hits[0].raw_score * 1.1, abs=1e-12)
        assert hits[1].adjusted_score == pytest.approx(hits[1].raw_score, abs=1e-12)

    def test_dimension_mismatch(self):
        store = random_store(3, 8, seed=3)
        with pytest.raises(DimensionMismatch):
            store.search(np.ones(4), 1, 0.0)

    def test_zero_norm_query(self):
        store = random_store(3, 8, seed=4)
        with pytest.raises(ZeroNorm):
            store.search(np.zeros(8), 1, 0.0)

    def test_thousand_records_match_oracle(self):
        store = random_store(1000, 32, seed=5)
        records = [(r.clause_id, r.embedding, r.feedback_avg) for r in store.records()]
        rng = np.random.default_rng(99)
        for _ in range(5):
            query = rng.normal(size=32)
            expected = oracle_search(records, query, 10, 0.0)
            got = store.search(query, 10, 0.0)
            assert [h.clause_id for h in got] == [cid for cid, _, _ in expected]

    def test_results_are_prefix_of_full_ordering_10k(self):
        store = random_store(10_000, 16, seed=6)
        rng = np.random.default_rng(7)
        # Mixed feedback so adjusted and raw orderings genuinely differ.
        for i in range(0, 10_000, 7):
            store.apply_rating(f"c{i:05d}", 1 if i % 2 else -1)
        query = rng.normal(size=16)
        records = [(r.clause_id, r.embedding, r.feedback_avg) for r in store.records()]
        full = oracle_search(records, query, 10_000, 0.0)
        got = store.search(query, 25, 0.0)
        assert [h.clause_id for h in got] == [cid for cid, _, _ in full[:25]]

    @given(st.integers(0, 10_000))
    def test_search_matches_oracle_property(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(1, 40))
        dim = int(rng.integers(2, 12))
        store = VectorStore(dim=dim, feedback_alpha=0.1)
        records = []
        for i in range(n):
            vec = rng.normal(size=dim)
            if np.linalg.norm(vec) == 0:
                continue
            avg = float(rng.choice([-1.0, -0.5, 0.0, 0.5, 1.0]))
            store.upsert(record(f"c{i:05d}", vec, avg=avg))
            records.append((f"c{i:05d}", np.asarray(vec, dtype=np.float64), avg))
        query = rng.normal(size=dim)
        if np.linalg.norm(query) == 0:
            return
        k = int(rng.integers(0, n + 2))
        min_score = float(rng.uniform(-1, 1))
        expected = oracle_search(records, query, k, min_score)
        got = store.search(query, k, min_score)
        assert [h.clause_id for h in got] == [cid for cid, _, _ in expected]
        for hit, (_, raw, adjusted) in zip(got, expected):
            assert hit.raw_score == pytest.approx(raw, abs=1e-9)
            assert hit.adjusted_score == pytest.approx(adjusted, abs=1e-9)


class TestFeedbackMean:
    def test_running_mean(self):
        store = VectorStore(dim=2)
        store.upsert(record("c1", [1.0, 0.0]))
        assert store.apply_rating("c1", 1) == 1.0
        assert store.apply_rating("c1", 0) == 0.5
        assert store.apply_rating("c1", -1) == pytest.approx(0.0)
        assert store.get("c1").feedback_count == 3


class TestPersistence:
    def test_round_trip(self, tmp_path):
        store = random_store(3, 8, seed=10)
        store.apply_rating("c00001", 1)
        path = tmp_path / "index.jsonl"
        store.save(path)
        loaded = VectorStore.load(path, expected_dim=8)
        assert len(loaded) == 3
        for r in store.records():
            got = loaded.get(r.clause_id)
            assert got.text == r.text
            assert got.canonical_key == r.canonical_key
            assert got.source_doc_id == r.source_doc_id
            assert got.feedback_avg == r.feedback_avg
            assert got.feedback_count == r.feedback_count
            assert got.created_at == r.created_at
            assert np.array_equal(got.embedding, r.embedding)

    def test_dim_mismatch_on_load(self, tmp_path):
        store = random_store(2, 384, seed=11)
        path = tmp_path / "index.jsonl"
        store.save(path)
        with pytest.raises(DimensionMismatch):
            VectorStore.load(path, expected_dim=512)

    def test_truncated_record_names_line(self, tmp_path):
        store = random_store(2, 4, seed=12)
        path = tmp_path / "index.jsonl"
        store.save(path)
        lines = path.read_text().splitlines()
        lines[2] = lines[2][:25]
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(LoadError) as err:
            VectorStore.load(path)
        assert err.value.line == 3
        assert "line 3" in str(err.value)

    def test_count_mismatch(self, tmp_path):
        store = random_store(2, 4, seed=13)
        path = tmp_path / "index.jsonl"
        store.save(path)
        lines = path.read_text().splitlines()
        path.write_text("\n".join(lines[:-1]) + "\n")
        with pytest.raises(LoadError):
            VectorStore.load(path)

    def test_bad_header(self, tmp_path):
        path = tmp_path / "index.jsonl"
        path.write_text("not json\n")
        with pytest.raises(LoadError):
            VectorStore.load(path)

    def test_search_identical_after_reload(self, tmp_path):
        store = random_store(50, 16, seed=14)
        store.apply_rating("c00003", 1)
        path = tmp_path / "index.jsonl"
        store.save(path)
        loaded = VectorStore.load(path, expected_dim=16)
        rng = np.random.default_rng(15)
        query = rng.normal(size=16)
        assert store.search(query, 10, 0.0) == loaded.search(query, 10, 0.0)


class TestKernelSelection:
    def test_fallback_and_native_agree(self):
        from sowgen.vecstore import kernel

        rng = np.random.default_rng(21)
        matrix = np.ascontiguousarray(rng.normal(size=(64, 384)))
        norms = np.sqrt(np.einsum("ij,ij->i", matrix, matrix))
        query = rng.normal(size=384)
        qn = float(np.linalg.norm(query))
        numpy_scores = kernel.cosine_scores_numpy(matrix, norms, query, qn)
        if kernel.cosine_scores_native is None:
            pytest.skip("compiled kernel not built in this install")
        native_scores = np.asarray(kernel.cosine_scores_native(matrix, norms, query, qn))
        assert np.allclose(native_scores, numpy_scores, atol=1e-12)

    def test_store_search_identical_under_fallback(self, monkeypatch):
        from sowgen.vecstore import kernel

        store = random_store(200, 32, seed=31)
        rng = np.random.default_rng(32)
        query = rng.normal(size=32)
        with_default = store.search(query, 10, 0.0)
        monkeypatch.setattr(kernel, "cosine_scores", kernel.cosine_scores_numpy)
        with_fallback = store.search(query, 10, 0.0)
        assert [h.clause_id for h in with_default] == [h.clause_id for h in with_fallback]
