"""Structural, cross-reference, completeness, and style validation, plus the
deterministic formatter, the routing decision, and final rendering.

Auto-fixes stay confined to formatting and style: anything substantive is
routed back through revision, so an automatic change can never alter what a
document commits the parties to.
"""

from __future__ import annotations

import copy
import hashlib
import re
from dataclasses import dataclass, field

from sowgen.compliance import ComplianceReport
from sowgen.drafting import RequirementSpec, SowDraft, draft_to_json
from sowgen.errors import UnsupportedFormat, ZeroNorm
from sowgen.textutil import split_tokens, title_case
from sowgen.vecstore import cosine

SEVERITY_BY_KIND = {
    "missing_section": "error",
    "duplicate_section": "error",
    "dangling_reference": "error",
    "unaddressed_requirement": "warning",
    "style": "warning",
}

DOCUMENT_LOCUS = "document"

COMPLETENESS_THRESHOLD = 0.60

CROSS_REFERENCE = re.compile(r"(?:\bSection\s+|§\s*)(\d+)")

_BULLET_LINE = re.compile(r"^[ \t]*[-*+•]\s+")


@dataclass(frozen=True)
class ValidationIssue:
    kind: str
    severity: str
    locus: str
    detail: str

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "severity": self.severity,
            "locus": self.locus,
            "detail": self.detail,
        }


def make_issue(kind: str, locus: str, detail: str) -> ValidationIssue:
    return ValidationIssue(kind, SEVERITY_BY_KIND[kind], locus, detail)


@dataclass
class ValidationReport:
    issues: list[ValidationIssue] = field(default_factory=list)
    fixes_applied: list[str] = field(default_factory=list)
    verdict: str = "accept"

    def to_dict(self) -> dict:
        return {
            "issues": [i.to_dict() for i in self.issues],
            "fixes_applied": list(self.fixes_applied),
            "verdict": self.verdict,
        }


@dataclass(frozen=True)
class RenderedDocument:
    format: str
    content: str
    checksum: str


def validate_structure(draft: SowDraft, required_keys) -> list[ValidationIssue]:
    """One error per required key that is absent, one per key that repeats."""
    issues = []
    keys = draft.keys()
    for key in required_keys:
        if key not in keys:
            issues.append(
                make_issue("missing_section", DOCUMENT_LOCUS, f"required section {key!r} is missing")
            )
    for key in sorted({k for k in keys if keys.count(k) > 1}):
        issues.append(
            make_issue("duplicate_section", DOCUMENT_LOCUS, f"section key {key!r} appears more than once")
        )
    return issues


def validate_crossrefs(draft: SowDraft) -> list[ValidationIssue]:
    """References use 1-based section numbers as rendered; anything outside
    1..N dangles."""
    issues = []
    count = len(draft.sections)
    for section in sorted(draft.sections, key=lambda s: s.order):
        for m in CROSS_REFERENCE.finditer(section.body):
            n = int(m.group(1))
            if not 1 <= n <= count:
                issues.append(
                    make_issue(
                        "dangling_reference",
                        section.id,
                        f"reference {m.group(0)!r} targets a section that does not exist",
                    )
                )
    return issues


def _addressed(item: str, bodies: list[str], body_vectors, embedder, threshold: float) -> bool:
    folded = item.casefold()
    for body in bodies:
        if folded in body.casefold():
            return True
    if not split_tokens(item):
        return True  # nothing measurable to address
    [item_vector] = embedder.embed([item])
    for vector in body_vectors:
        try:
            if cosine(item_vector, vector) >= threshold:
                return True
        except ZeroNorm:
            continue
    return False


def verify_completeness(
    draft: SowDraft,
    spec: RequirementSpec,
    embedder,
    *,
    threshold: float = COMPLETENESS_THRESHOLD,
) -> list[ValidationIssue]:
    """A deliverable or special requirement counts as addressed when it occurs
    verbatim (case-folded) in some section, or embeds close to one."""
    issues = []
    bodies = [s.body for s in draft.sections if s.body.strip()]
    embeddable = [b for b in bodies if split_tokens(b)]
    body_vectors = embedder.embed(embeddable) if embeddable else []
    items = [("deliverable", d.name) for d in spec.deliverables if d.name.strip()]
    items += [("special requirement", r) for r in spec.special_requirements if r.strip()]
    for label, item in items:
        if not _addressed(item, bodies, body_vectors, embedder, threshold):
            issues.append(
                make_issue(
                    "unaddressed_requirement",
                    DOCUMENT_LOCUS,
                    f"{label} {item!r} is not addressed by any section",
                )
            )
    return issues


def _format_body(body: str) -> str:
    lines = []
    for line in body.split("\n"):
        line = line.rstrip()
        if _BULLET_LINE.match(line):
            line = _BULLET_LINE.sub("- ", line)
        lines.append(line)
    return "\n".join(lines).rstrip()


def apply_formatting(draft: SowDraft) -> SowDraft:
    """Deterministic, idempotent cleanup: heading case, consecutive section
    numbering, "- " bullets, no trailing whitespace. Never touches keys or
    section identity, so structural findings are unaffected."""
    out = copy.deepcopy(draft)
    out.sections.sort(key=lambda s: s.order)
    for i, section in enumerate(out.sections):
        section.order = i
        section.title = title_case(section.title.strip())
        section.body = _format_body(section.body)
    return out


def validate_style(draft: SowDraft) -> list[ValidationIssue]:
    """Style findings are exactly the deltas apply_formatting would fix."""
    formatted = apply_formatting(draft)
    issues = []
    original = sorted(draft.sections, key=lambda s: s.order)
    if [s.order for s in original] != [s.order for s in formatted.sections]:
        issues.append(
            make_issue("style", DOCUMENT_LOCUS, "section numbering is not consecutive from 0")
        )
    for before, after in zip(original, formatted.sections):
        if before.title != after.title:
            issues.append(
                make_issue("style", before.id, f"heading {before.title!r} is not in title case")
            )
        if before.body != after.body:
            issues.append(
                make_issue(
                    "style", before.id, "body has trailing whitespace or non-standard bullets"
                )
            )
    return issues


def describe_fixes(before: SowDraft, after: SowDraft) -> list[str]:
    fixes = []
    before_sections = sorted(before.sections, key=lambda s: s.order)
    if [s.order for s in before_sections] != [s.order for s in after.sections]:
        fixes.append("renumbered sections consecutively from 0")
    for old, new in zip(before_sections, after.sections):
        if old.title != new.title:
            fixes.append(f"retitled {old.title!r} to {new.title!r}")
        if old.body != new.body:
            fixes.append(f"reformatted body of section {new.key!r}")
    return fixes


def decide(
    compliance: ComplianceReport,
    issues: list[ValidationIssue],
    iteration: int,
    max_iterations: int,
) -> str:
    """Routing decision.

    reject on any error-severity issue or failed compliance (the caller
    treats reject at iteration == max_iterations as final); accept_with_fixes
    when the only findings are style warnings and/or a compliance warn;
    accept otherwise. Warnings that formatting cannot fix (unaddressed
    requirements) ride along on an accept.
    """
    del iteration, max_iterations  # finality is the caller's call
    if compliance.overall == "fail" or any(i.severity == "error" for i in issues):
        return "reject"
    only_style = bool(issues) and all(i.kind == "style" for i in issues)
    if only_style or compliance.overall == "warn":
        return "accept_with_fixes"
    return "accept"


def render(draft: SowDraft, format: str) -> RenderedDocument:
    """Render to markdown or canonical JSON ("structured"); deterministic."""
    if format == "markdown":
        md = draft.metadata
        lines = [
            f"# {md.project_title}",
            "",
            f"- Client: {md.client}",
            f"- Vendor: {md.vendor}",
            f"- Effective Date: {md.effective_date}",
            f"- Generated: {md.generated_at}",
            f"- Identifier: {draft.sow_id} (version {draft.version})",
        ]
        for i, section in enumerate(sorted(draft.sections, key=lambda s: s.order), start=1):
            lines += ["", f"## {i}. {section.title}", "", section.body]
        content = "\n".join(lines).rstrip("\n") + "\n"
    elif format == "structured":
        content = draft_to_json(draft)
    else:
        raise UnsupportedFormat(f"format {format!r} is not supported")
    checksum = hashlib.sha256(content.encode("utf-8")).hexdigest()
    return RenderedDocument(format=format, content=content, checksum=checksum)
