"""Shared test utilities: independent search oracles and fixed draft fixtures.

The oracles intentionally re-derive everything from scratch (own cosine, own
ordering rule) so they stay independent of the store's kernel/sort path.
"""

from __future__ import annotations

import json
import math

import numpy as np

from sowgen.drafting import DraftMetadata, SectionDraft, SowDraft
from sowgen.textutil import stable_bucket


def oracle_cosine(a, b) -> float:
    dot = math.fsum(float(x) * float(y) for x, y in zip(a, b))
    na = math.sqrt(math.fsum(float(x) * float(x) for x in a))
    nb = math.sqrt(math.fsum(float(y) * float(y) for y in b))
    return dot / (na * nb)


def oracle_search(records, query, k, min_score, alpha=0.1):
    """Brute force in pure Python: records are (clause_id, vector, feedback_avg)."""
    hits = []
    for clause_id, vector, avg in records:
        raw = oracle_cosine(vector, query)
        if raw >= min_score:
            hits.append((clause_id, raw, raw * (1.0 + alpha * avg)))
    hits.sort(key=lambda t: (-t[2], t[0]))
    return hits[:k]


def oracle_search_np(records, query, k, min_score, alpha=0.1):
    """Brute force with per-row np.dot; fast enough for thousand-vector runs
    while staying structurally independent of the store's matrix scan."""
    query = np.asarray(query, dtype=np.float64)
    qn = math.sqrt(float(np.dot(query, query)))
    hits = []
    for clause_id, vector, avg in records:
        vector = np.asarray(vector, dtype=np.float64)
        raw = float(np.dot(vector, query)) / (math.sqrt(float(np.dot(vector, vector))) * qn)
        if raw >= min_score:
            hits.append((clause_id, raw, raw * (1.0 + alpha * avg)))
    hits.sort(key=lambda t: (-t[2], t[0]))
    return hits[:k]


def three_section_draft() -> SowDraft:
    """Fixed fixture behind the golden markdown file."""
    return SowDraft(
        sow_id="sow-fixture0001",
        version=1,
        metadata=DraftMetadata(
            project_title="Inventory Audit",
            client="Keystone Manufacturing Company",
            vendor="Bluewater Systems Corp",
            effective_date="2025-02-01",
            generated_at="2024-01-01T00:00:00+00:00",
        ),
        sections=[
            SectionDraft(
                id="scope_of_work",
                key="scope_of_work",
                title="Scope of Work",
                body="Bluewater Systems Corp will audit warehouse inventory records.",
                order=0,
            ),
            SectionDraft(
                id="timeline",
                key="timeline",
                title="Timeline",
                body="Work runs from 2025-02-01 to 2025-03-15.",
                order=1,
            ),
            SectionDraft(
                id="payment_terms",
                key="payment_terms",
                title="Payment Terms",
                body="Fixed fee of $30,000, net 30 days.",
                order=2,
            ),
        ],
    )


def gut_section(key: str, body: str = "Pending."):
    """Mutator for ScriptedGeneration: hollow out one section's body."""

    def mutate(text: str) -> str:
        payload = json.loads(text)
        for section in payload["sections"]:
            if section["key"] == key:
                section["body"] = body
        return json.dumps(payload, ensure_ascii=False, indent=2)

    return mutate


def distinct_bucket_tokens(n: int, dim: int = 384) -> list[str]:
    """Deterministic tokens whose hash buckets never collide, so bag-of-words
    cosines come out as exact overlap ratios."""
    tokens: list[str] = []
    used: set[int] = set()
    i = 0
    while len(tokens) < n:
        candidate = f"tok{i:03d}"
        bucket = stable_bucket(candidate, dim)
        if bucket not in used:
            used.add(bucket)
            tokens.append(candidate)
        i += 1
    return tokens
