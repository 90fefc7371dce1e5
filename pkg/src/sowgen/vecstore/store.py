"""Clause store: fixed-dimension embeddings with exact thresholded top-k
cosine search and a line-oriented JSON persistence format.

Search is an exact linear scan on purpose — corpus sizes here never justify
an approximate index, and exactness is what lets the oracle tests hold.
Concurrency follows a readers-or-one-writer contract; a single lock keeps a
search from ever observing a partially applied upsert.
"""

from __future__ import annotations

import datetime as _dt
import hashlib
import json
import math
import threading
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from sowgen.errors import DimensionMismatch, LoadError, ZeroNorm
from sowgen.vecstore import kernel

FORMAT_VERSION = 1
DEFAULT_DIM = 384


@dataclass
class ClauseRecord:
    clause_id: str
    text: str
    canonical_key: str | None
    source_doc_id: str
    embedding: np.ndarray
    feedback_avg: float = 0.0
    feedback_count: int = 0
    created_at: str = ""

    def __post_init__(self):
        self.embedding = np.asarray(self.embedding, dtype=np.float64)


@dataclass(frozen=True)
class RetrievalHit:
    clause_id: str
    raw_score: float
    adjusted_score: float


def _validated(vector, dim: int) -> np.ndarray:
    arr = np.asarray(vector, dtype=np.float64)
    if arr.ndim != 1 or arr.shape[0] != dim:
        raise DimensionMismatch(f"expected dimension {dim}, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("embedding contains non-finite components")
    return arr


def cosine(a, b) -> float:
    """Cosine similarity of two equal-dimension vectors."""
    va = np.asarray(a, dtype=np.float64)
    vb = np.asarray(b, dtype=np.float64)
    if va.shape != vb.shape or va.ndim != 1:
        raise DimensionMismatch(f"shapes {va.shape} and {vb.shape} differ")
    na = math.sqrt(float(va @ va))
    nb = math.sqrt(float(vb @ vb))
    if na == 0.0 or nb == 0.0:
        raise ZeroNorm("cosine is undefined for a zero vector")
    return float(va @ vb) / (na * nb)


class VectorStore:
    """In-memory clause index with disk persistence.

    adjusted_score = raw_score * (1 + feedback_alpha * feedback_avg); results
    are ordered by adjusted score descending with clause_id as the tie-break.
    """

    def __init__(self, dim: int = DEFAULT_DIM, feedback_alpha: float = 0.1):
        if dim <= 0:
            raise ValueError("dim must be positive")
        self.dim = dim
        self.feedback_alpha = feedback_alpha
        self._records: dict[str, ClauseRecord] = {}
        self._lock = threading.RLock()
        self._matrix: np.ndarray | None = None
        self._norms: np.ndarray | None = None
        self._avgs: np.ndarray | None = None
        self._ids: list[str] = []

    def __len__(self) -> int:
        with self._lock:
            return len(self._records)

    def __contains__(self, clause_id: str) -> bool:
        with self._lock:
            return clause_id in self._records

    def ids(self) -> list[str]:
        with self._lock:
            return list(self._records)

    def get(self, clause_id: str) -> ClauseRecord:
        with self._lock:
            return self._records[clause_id]

    def records(self) -> list[ClauseRecord]:
        with self._lock:
            return list(self._records.values())

    def upsert(self, record: ClauseRecord) -> None:
        """Insert or replace a record; replacing never grows the count."""
        vector = _validated(record.embedding, self.dim)
        if float(vector @ vector) == 0.0:
            raise ZeroNorm(f"clause {record.clause_id!r} has a zero-norm embedding")
        record.embedding = vector
        with self._lock:
            self._records[record.clause_id] = record
            self._invalidate()

    def apply_rating(self, clause_id: str, rating: int) -> float:
        """Fold one rating into the clause's running feedback mean."""
        with self._lock:
            record = self._records[clause_id]
            total = record.feedback_avg * record.feedback_count + rating
            record.feedback_count += 1
            record.feedback_avg = max(-1.0, min(1.0, total / record.feedback_count))
            self._invalidate()
            return record.feedback_avg

    def _invalidate(self) -> None:
        self._matrix = None

    def _ensure_cache(self) -> None:
        if self._matrix is not None:
            return
        records = list(self._records.values())
        self._ids = [r.clause_id for r in records]
        if records:
            self._matrix = np.stack([r.embedding for r in records])
            self._norms = np.sqrt(np.einsum("ij,ij->i", self._matrix, self._matrix))
            self._avgs = np.array([r.feedback_avg for r in records])
        else:
            self._matrix = np.empty((0, self.dim))
            self._norms = np.empty(0)
            self._avgs = np.empty(0)

    def search(self, query, k: int, min_score: float) -> list[RetrievalHit]:
        """Exact top-k: filter raw cosine >= min_score, then rank by adjusted
        score descending (ties by clause_id ascending) and truncate to k."""
        vector = _validated(query, self.dim)
        if k < 0:
            raise ValueError("k must be >= 0")
        query_norm = math.sqrt(float(vector @ vector))
        if query_norm == 0.0:
            raise ZeroNorm("query has zero norm")
        with self._lock:
            self._ensure_cache()
            if k == 0 or not self._ids:
                return []
            raw = kernel.cosine_scores(self._matrix, self._norms, vector, query_norm)
            adjusted = raw * (1.0 + self.feedback_alpha * self._avgs)
            hits = [
                RetrievalHit(self._ids[i], float(raw[i]), float(adjusted[i]))
                for i in np.flatnonzero(raw >= min_score)
            ]
        hits.sort(key=lambda h: (-h.adjusted_score, h.clause_id))
        return hits[:k]

    # -- persistence ------------------------------------------------------

    def save(self, path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with self._lock:
            lines = [
                json.dumps(
                    {
                        "format_version": FORMAT_VERSION,
                        "dim": self.dim,
                        "count": len(self._records),
                    }
                )
            ]
            for record in self._records.values():
                lines.append(
                    json.dumps(
                        {
                            "clause_id": record.clause_id,
                            "text": record.text,
                            "canonical_key": record.canonical_key,
                            "source_doc_id": record.source_doc_id,
                            "embedding": [float(x) for x in record.embedding],
                            "feedback_avg": record.feedback_avg,
                            "feedback_count": record.feedback_count,
                            "created_at": record.created_at,
                        },
                        ensure_ascii=False,
                    )
                )
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")

    @classmethod
    def load(
        cls, path, expected_dim: int | None = None, feedback_alpha: float = 0.1
    ) -> "VectorStore":
        path = Path(path)
        lines = path.read_text(encoding="utf-8").splitlines()
        if not lines:
            raise LoadError("empty index file")
        try:
            header = json.loads(lines[0])
            version, dim, count = header["format_version"], header["dim"], header["count"]
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise LoadError(f"bad header: {exc}", line=1) from exc
        if version != FORMAT_VERSION:
            raise LoadError(f"unsupported format_version {version}", line=1)
        if expected_dim is not None and dim != expected_dim:
            raise DimensionMismatch(
                f"index dimension {dim} does not match configured {expected_dim}"
            )
        records = [line for line in lines[1:] if line.strip()]
        if len(records) != count:
            raise LoadError(f"header count {count} but {len(records)} record lines")
        store = cls(dim=dim, feedback_alpha=feedback_alpha)
        for n, line in enumerate(records, start=2):
            try:
                data = json.loads(line)
                record = ClauseRecord(
                    clause_id=data["clause_id"],
                    text=data["text"],
                    canonical_key=data["canonical_key"],
                    source_doc_id=data["source_doc_id"],
                    embedding=np.asarray(data["embedding"], dtype=np.float64),
                    feedback_avg=data["feedback_avg"],
                    feedback_count=data.get("feedback_count", 0),
                    created_at=data.get("created_at", ""),
                )
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise LoadError(str(exc), line=n) from exc
            if record.embedding.shape[0] != dim:
                raise LoadError(
                    f"record embedding has {record.embedding.shape[0]} components, "
                    f"index dimension is {dim}",
                    line=n,
                )
            store._records[record.clause_id] = record
        return store

    def state_digest(self) -> str:
        """Digest of the full store state; used to prove reads are read-only."""
        h = hashlib.sha256()
        with self._lock:
            for record in self._records.values():
                h.update(record.clause_id.encode())
                h.update(record.text.encode())
                h.update(str(record.feedback_avg).encode())
                h.update(str(record.feedback_count).encode())
                h.update(record.embedding.tobytes())
        return h.hexdigest()


def utc_now_iso() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat()
