"""Canonical document sections: the fixed key set every generated document is
built around, display titles, and heading aliases used during ingestion."""

from __future__ import annotations

import re

from sowgen.textutil import title_case

CANONICAL_SECTION_KEYS: tuple[str, ...] = (
    "scope_of_work",
    "deliverables",
    "timeline",
    "responsibilities",
    "payment_terms",
    "confidentiality",
    "liability",
    "termination",
    "acceptance_criteria",
    "signatures",
)

SECTION_TITLES: dict[str, str] = {
    key: title_case(key.replace("_", " ")) for key in CANONICAL_SECTION_KEYS
}

# Heading text (lowercased, numbering stripped) -> canonical key.
HEADING_ALIASES: dict[str, str] = {
    "scope of work": "scope_of_work",
    "scope": "scope_of_work",
    "scope of services": "scope_of_work",
    "deliverables": "deliverables",
    "project deliverables": "deliverables",
    "timeline": "timeline",
    "timelines": "timeline",
    "schedule": "timeline",
    "project timeline": "timeline",
    "period of performance": "timeline",
    "responsibilities": "responsibilities",
    "roles and responsibilities": "responsibilities",
    "payment terms": "payment_terms",
    "payment": "payment_terms",
    "fees": "payment_terms",
    "fees and payment": "payment_terms",
    "compensation": "payment_terms",
    "confidentiality": "confidentiality",
    "non-disclosure": "confidentiality",
    "nondisclosure": "confidentiality",
    "liability": "liability",
    "limitation of liability": "liability",
    "indemnification": "liability",
    "termination": "termination",
    "term and termination": "termination",
    "acceptance criteria": "acceptance_criteria",
    "acceptance": "acceptance_criteria",
    "signatures": "signatures",
    "signature": "signatures",
}


def canonical_key_for_heading(heading: str | None) -> str | None:
    """Map a raw heading line to a canonical section key, if it has one."""
    if not heading:
        return None
    text = heading.lstrip("#").strip()
    # Drop a leading outline number such as "3." or "2.1)".
    text = re.sub(r"^\d+(\.\d+)*[.)]?\s+", "", text)
    text = text.strip().rstrip(":.").casefold()
    return HEADING_ALIASES.get(text)


def match_clauses_to_keys(
    refs: list[tuple[str, str | None]], keys: list[str]
) -> dict[str, list[str]]:
    """Assign retrieved clauses to sections.

    A clause lands in the section sharing its canonical key; clauses with no
    key, or a key not present in the document, fall back to scope_of_work
    (or the first section when scope_of_work is absent).
    """
    assignment: dict[str, list[str]] = {key: [] for key in keys}
    if not keys:
        return assignment
    fallback = "scope_of_work" if "scope_of_work" in assignment else keys[0]
    for clause_id, key in refs:
        target = key if key in assignment else fallback
        assignment[target].append(clause_id)
    return assignment
