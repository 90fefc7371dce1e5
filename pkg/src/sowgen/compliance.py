"""Compliance review: clause strength via zero-shot classification, language
linting for passive voice and vague wording, and required-field checks.

The lint rules are token-window heuristics, not a parser. They are
deterministic and position-stable; the known false negatives (participles
more than two tokens past the auxiliary, vague phrasing outside the lexicon)
are the accepted cost of that determinism.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from sowgen.backends import ClassificationRequest
from sowgen.drafting import SowDraft
from sowgen.textutil import contains_date, word_tokens

CLAUSE_KEYS = ("confidentiality", "liability", "termination")

HYPOTHESES = {
    "confidentiality": "This text establishes a confidentiality or non-disclosure obligation.",
    "liability": "This text limits or allocates liability between the parties.",
    "termination": "This text defines conditions for terminating the agreement.",
}

STRONG_THRESHOLD = 0.75
WEAK_THRESHOLD = 0.40

BE_FORMS = {"is", "are", "was", "were", "be", "been", "being"}
_PASSIVE_WINDOW = 2  # participle at most this many tokens after the auxiliary


@dataclass(frozen=True)
class ClauseFinding:
    clause_key: str
    status: str  # strong | weak | missing
    score: float
    section_id: str | None

    def to_dict(self) -> dict:
        return {
            "clause_key": self.clause_key,
            "status": self.status,
            "score": self.score,
            "section_id": self.section_id,
        }


@dataclass(frozen=True)
class LanguageIssue:
    kind: str  # passive_voice | vague_term
    section_id: str
    span: tuple[int, int]
    excerpt: str

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "section_id": self.section_id,
            "span": list(self.span),
            "excerpt": self.excerpt,
        }


@dataclass(frozen=True)
class FieldCheck:
    field: str  # project_title | dates | payment_terms
    present: bool
    detail: str

    def to_dict(self) -> dict:
        return {"field": self.field, "present": self.present, "detail": self.detail}


@dataclass
class ComplianceReport:
    findings: list[ClauseFinding]
    issues: list[LanguageIssue]
    field_checks: list[FieldCheck]
    overall: str  # pass | warn | fail

    def to_dict(self) -> dict:
        return {
            "findings": [f.to_dict() for f in self.findings],
            "issues": [i.to_dict() for i in self.issues],
            "field_checks": [c.to_dict() for c in self.field_checks],
            "overall": self.overall,
        }


@lru_cache(maxsize=1)
def vague_lexicon() -> tuple[str, ...]:
    raw = resources.files("sowgen.data").joinpath("vague_terms.txt").read_text("utf-8")
    return tuple(line.strip() for line in raw.splitlines() if line.strip())


@lru_cache(maxsize=1)
def irregular_participles() -> frozenset[str]:
    raw = resources.files("sowgen.data").joinpath("irregular_participles.txt").read_text("utf-8")
    return frozenset(line.strip() for line in raw.splitlines() if line.strip())


def status_for_score(score: float, strong: float, weak: float) -> str:
    if score >= strong:
        return "strong"
    if score >= weak:
        return "weak"
    return "missing"


def check_clauses(
    draft: SowDraft,
    classifier,
    *,
    strong: float = STRONG_THRESHOLD,
    weak: float = WEAK_THRESHOLD,
) -> list[ClauseFinding]:
    """Score every section against each clause hypothesis; the best section
    decides the clause's status (one sound clause is enough)."""
    hypotheses = [HYPOTHESES[key] for key in CLAUSE_KEYS]
    best: dict[str, tuple[float, str | None]] = {key: (0.0, None) for key in CLAUSE_KEYS}
    for section in sorted(draft.sections, key=lambda s: s.order):
        scores = classifier.classify(
            ClassificationRequest(premise=section.body, hypotheses=hypotheses)
        )
        for key, score in zip(CLAUSE_KEYS, scores):
            if score > best[key][0]:
                best[key] = (score, section.id)
    findings = []
    for key in CLAUSE_KEYS:
        score, section_id = best[key]
        status = status_for_score(score, strong, weak)
        findings.append(
            ClauseFinding(
                clause_key=key,
                status=status,
                score=score,
                section_id=None if status == "missing" else section_id,
            )
        )
    return findings


def _is_participle(token: str) -> bool:
    lowered = token.lower().strip("'\".,;:!?")
    if lowered in irregular_participles():
        return True
    return len(lowered) >= 4 and lowered.endswith("ed")


def _passive_issues(section_id: str, body: str) -> list[LanguageIssue]:
    issues = []
    tokens = word_tokens(body)
    for i, (token, start, _end) in enumerate(tokens):
        if token.lower() not in BE_FORMS:
            continue
        for j in range(i + 1, min(i + 1 + _PASSIVE_WINDOW, len(tokens))):
            cand, _cstart, cend = tokens[j]
            if _is_participle(cand):
                issues.append(
                    LanguageIssue("passive_voice", section_id, (start, cend), body[start:cend])
                )
                break
    return issues


@lru_cache(maxsize=1)
def _vague_patterns() -> tuple[tuple[str, re.Pattern], ...]:
    return tuple(
        (term, re.compile(r"(?<!\w)" + re.escape(term) + r"(?!\w)", re.IGNORECASE))
        for term in vague_lexicon()
    )


def _vague_issues(section_id: str, body: str) -> list[LanguageIssue]:
    issues = []
    for _term, pattern in _vague_patterns():
        for m in pattern.finditer(body):
            issues.append(
                LanguageIssue("vague_term", section_id, (m.start(), m.end()), m.group())
            )
    return issues


def lint_language(draft: SowDraft) -> list[LanguageIssue]:
    """Passive-voice and vague-term findings, ordered by (section, offset)."""
    issues: list[LanguageIssue] = []
    for section in sorted(draft.sections, key=lambda s: s.order):
        found = _passive_issues(section.id, section.body) + _vague_issues(
            section.id, section.body
        )
        issues.extend(sorted(found, key=lambda i: (i.span[0], i.span[1], i.kind)))
    return issues


def check_fields(draft: SowDraft) -> list[FieldCheck]:
    md = draft.metadata
    title_present = bool(md.project_title.strip())

    date_sources = [md.effective_date, md.generated_at]
    timeline = draft.section_by_key("timeline")
    if timeline is not None:
        date_sources.append(timeline.body)
    dates_present = any(contains_date(text) for text in date_sources if text)

    payment = draft.section_by_key("payment_terms")
    payment_present = payment is not None and bool(payment.body.strip())

    return [
        FieldCheck(
            "project_title",
            title_present,
            "metadata carries a project title" if title_present else "metadata.project_title is empty",
        ),
        FieldCheck(
            "dates",
            dates_present,
            "a parseable date appears in metadata or the timeline"
            if dates_present
            else "no parseable date in metadata or the timeline section",
        ),
        FieldCheck(
            "payment_terms",
            payment_present,
            "payment terms section has content"
            if payment_present
            else "payment_terms section missing or empty",
        ),
    ]


def compile_report(
    findings: list[ClauseFinding],
    issues: list[LanguageIssue],
    field_checks: list[FieldCheck],
) -> ComplianceReport:
    """fail on any missing clause or absent field; warn on weak clauses or
    language issues; pass otherwise. Order of the inputs never matters."""
    if any(f.status == "missing" for f in findings) or any(
        not c.present for c in field_checks
    ):
        overall = "fail"
    elif any(f.status == "weak" for f in findings) or issues:
        overall = "warn"
    else:
        overall = "pass"
    return ComplianceReport(
        findings=list(findings),
        issues=list(issues),
        field_checks=list(field_checks),
        overall=overall,
    )
