"""Input validation, draft generation, and model-output parsing.

drafting makes exactly one generation call per draft; revision calls belong
to the pipeline driver. All functions leave their inputs untouched.
"""

from __future__ import annotations

import datetime as _dt
import hashlib
import json
import uuid
from dataclasses import dataclass, field

from sowgen.backends import GenerationRequest
from sowgen.errors import ParseFailure, SchemaViolation
from sowgen.ragchain import AugmentedPrompt
from sowgen.sections import SECTION_TITLES, match_clauses_to_keys
from sowgen.textutil import parse_iso_date


@dataclass
class Deliverable:
    name: str
    description: str = ""
    due_date: str | None = None


@dataclass
class RequirementSpec:
    project_title: str = ""
    client_name: str = ""
    vendor_name: str = ""
    goals: str = ""
    deliverables: list[Deliverable] = field(default_factory=list)
    start_date: str = ""
    end_date: str = ""
    payment_terms: str = ""
    special_requirements: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "project_title": self.project_title,
            "client_name": self.client_name,
            "vendor_name": self.vendor_name,
            "goals": self.goals,
            "deliverables": [
                {"name": d.name, "description": d.description, "due_date": d.due_date}
                for d in self.deliverables
            ],
            "start_date": self.start_date,
            "end_date": self.end_date,
            "payment_terms": self.payment_terms,
            "special_requirements": list(self.special_requirements),
        }


@dataclass(frozen=True)
class FieldError:
    field: str
    code: str
    message: str

    def to_dict(self) -> dict:
        return {"field": self.field, "code": self.code, "message": self.message}


@dataclass
class DraftMetadata:
    project_title: str = ""
    client: str = ""
    vendor: str = ""
    effective_date: str = ""
    generated_at: str = ""


@dataclass
class SectionDraft:
    id: str
    key: str
    title: str
    body: str
    provenance: list[str] = field(default_factory=list)
    order: int = 0


@dataclass
class SowDraft:
    sow_id: str = ""
    version: int = 1
    metadata: DraftMetadata = field(default_factory=DraftMetadata)
    sections: list[SectionDraft] = field(default_factory=list)

    def section_by_id(self, section_id: str) -> SectionDraft | None:
        return next((s for s in self.sections if s.id == section_id), None)

    def section_by_key(self, key: str) -> SectionDraft | None:
        return next((s for s in self.sections if s.key == key), None)

    def keys(self) -> list[str]:
        return [s.key for s in self.sections]


def draft_to_dict(draft: SowDraft) -> dict:
    md = draft.metadata
    return {
        "sow_id": draft.sow_id,
        "version": draft.version,
        "metadata": {
            "project_title": md.project_title,
            "client": md.client,
            "vendor": md.vendor,
            "effective_date": md.effective_date,
            "generated_at": md.generated_at,
        },
        "sections": [
            {
                "id": s.id,
                "key": s.key,
                "title": s.title,
                "body": s.body,
                "provenance": list(s.provenance),
                "order": s.order,
            }
            for s in sorted(draft.sections, key=lambda s: s.order)
        ],
    }


def draft_to_json(draft: SowDraft) -> str:
    """Canonical serialization; identical drafts produce identical bytes."""
    return json.dumps(draft_to_dict(draft), ensure_ascii=False, indent=2) + "\n"


# ---------------------------------------------------------------------------
# Input validation
# ---------------------------------------------------------------------------


def spec_from_dict(data: dict) -> tuple[RequirementSpec, list[FieldError]]:
    """Lenient structural parse: wrong types are reported, missing fields
    default to empty and are left for validate_input to judge."""
    errors: list[FieldError] = []

    def text_field(name: str) -> str:
        value = data.get(name, "")
        if value is None:
            return ""
        if not isinstance(value, str):
            errors.append(FieldError(name, "BAD_TYPE", f"{name} must be a string"))
            return ""
        return value

    deliverables: list[Deliverable] = []
    raw_deliverables = data.get("deliverables", [])
    if not isinstance(raw_deliverables, list):
        errors.append(FieldError("deliverables", "BAD_TYPE", "deliverables must be a list"))
        raw_deliverables = []
    for i, item in enumerate(raw_deliverables):
        if not isinstance(item, dict):
            errors.append(
                FieldError(f"deliverables[{i}]", "BAD_TYPE", "deliverable must be an object")
            )
            continue
        name = item.get("name", "")
        description = item.get("description", "")
        due = item.get("due_date")
        if not isinstance(name, str) or not isinstance(description, str):
            errors.append(
                FieldError(
                    f"deliverables[{i}]", "BAD_TYPE", "name and description must be strings"
                )
            )
            continue
        if due is not None and not isinstance(due, str):
            errors.append(
                FieldError(f"deliverables[{i}].due_date", "BAD_TYPE", "due_date must be a string")
            )
            due = None
        deliverables.append(Deliverable(name=name, description=description, due_date=due))

    requirements = data.get("special_requirements", [])
    if not isinstance(requirements, list) or any(
        not isinstance(r, str) for r in requirements
    ):
        errors.append(
            FieldError(
                "special_requirements", "BAD_TYPE", "special_requirements must be a list of strings"
            )
        )
        requirements = []

    spec = RequirementSpec(
        project_title=text_field("project_title"),
        client_name=text_field("client_name"),
        vendor_name=text_field("vendor_name"),
        goals=text_field("goals"),
        deliverables=deliverables,
        start_date=text_field("start_date"),
        end_date=text_field("end_date"),
        payment_terms=text_field("payment_terms"),
        special_requirements=list(requirements),
    )
    return spec, errors


def validate_input(spec: RequirementSpec) -> list[FieldError]:
    """Every violated invariant, one entry each; valid input yields []."""
    errors: list[FieldError] = []
    if not spec.project_title.strip():
        errors.append(FieldError("project_title", "REQUIRED", "project_title must not be empty"))
    if not spec.deliverables:
        errors.append(FieldError("deliverables", "REQUIRED", "at least one deliverable is required"))
    for i, d in enumerate(spec.deliverables):
        if not d.name.strip():
            errors.append(
                FieldError(f"deliverables[{i}].name", "REQUIRED", "deliverable name must not be empty")
            )
        if d.due_date and parse_iso_date(d.due_date) is None:
            errors.append(
                FieldError(
                    f"deliverables[{i}].due_date", "BAD_DATE", f"{d.due_date!r} is not an ISO-8601 date"
                )
            )
    start = end = None
    for name, value in (("start_date", spec.start_date), ("end_date", spec.end_date)):
        if not value.strip():
            errors.append(FieldError(name, "REQUIRED", f"{name} must not be empty"))
        else:
            parsed = parse_iso_date(value)
            if parsed is None:
                errors.append(FieldError(name, "BAD_DATE", f"{value!r} is not an ISO-8601 date"))
            elif name == "start_date":
                start = parsed
            else:
                end = parsed
    if start and end and end < start:
        errors.append(
            FieldError("end_date", "DATE_ORDER", "end_date must not be earlier than start_date")
        )
    return errors


# ---------------------------------------------------------------------------
# Output parsing
# ---------------------------------------------------------------------------

_FENCE_LINE = frozenset(("```", "```json", "```JSON"))


def _strip_fences(text: str) -> str:
    return "\n".join(
        line for line in text.split("\n") if line.strip() not in _FENCE_LINE
    )


def _first_json_object(text: str) -> dict:
    decoder = json.JSONDecoder()
    reasons = []
    for candidate in (text, _strip_fences(text)):
        start = candidate.find("{")
        if start < 0:
            reasons.append("no '{' found")
            continue
        try:
            obj, _ = decoder.raw_decode(candidate[start:])
        except json.JSONDecodeError as exc:
            reasons.append(str(exc))
            continue
        if isinstance(obj, dict):
            return obj
        reasons.append("top-level JSON value is not an object")
    raise ParseFailure("; ".join(dict.fromkeys(reasons)) or "empty output")


def parse_model_output(text: str) -> SowDraft:
    """Parse the first balanced JSON object in `text` into a draft.

    A repair pass strips Markdown code fences and ignores prose around the
    object before giving up. Schema violations are collected exhaustively.
    """
    payload = _first_json_object(text)
    violations: list[str] = []

    sow_id = payload.get("sow_id", "")
    if not isinstance(sow_id, str):
        violations.append("sow_id must be a string")
        sow_id = ""
    version = payload.get("version", 1)
    if not isinstance(version, int) or isinstance(version, bool) or version < 1:
        violations.append("version must be an integer >= 1")
        version = 1

    metadata = DraftMetadata()
    raw_md = payload.get("metadata")
    if raw_md is None:
        violations.append("metadata: missing")
    elif not isinstance(raw_md, dict):
        violations.append("metadata must be an object")
    else:
        for name in ("project_title", "client", "vendor", "effective_date", "generated_at"):
            value = raw_md.get(name, "")
            if value is None:
                value = ""
            if not isinstance(value, str):
                violations.append(f"metadata.{name} must be a string")
                value = ""
            setattr(metadata, name, value)

    sections: list[SectionDraft] = []
    raw_sections = payload.get("sections")
    if raw_sections is None:
        violations.append("sections: missing")
    elif not isinstance(raw_sections, list):
        violations.append("sections must be an array")
    else:
        for i, raw in enumerate(raw_sections):
            where = f"sections[{i}]"
            if not isinstance(raw, dict):
                violations.append(f"{where} must be an object")
                continue
            key = raw.get("key")
            if not isinstance(key, str) or not key:
                violations.append(f"{where}.key must be a non-empty string")
                continue
            body = raw.get("body", "")
            if not isinstance(body, str):
                violations.append(f"{where}.body must be a string")
                body = ""
            title = raw.get("title", SECTION_TITLES.get(key, key.replace("_", " ").title()))
            if not isinstance(title, str):
                violations.append(f"{where}.title must be a string")
                title = key
            section_id = raw.get("id", key)
            if not isinstance(section_id, str) or not section_id:
                violations.append(f"{where}.id must be a non-empty string")
                section_id = key
            order = raw.get("order", i)
            if not isinstance(order, int) or isinstance(order, bool):
                violations.append(f"{where}.order must be an integer")
                order = i
            provenance = raw.get("provenance", [])
            if not isinstance(provenance, list) or any(
                not isinstance(p, str) for p in provenance
            ):
                violations.append(f"{where}.provenance must be a list of strings")
                provenance = []
            sections.append(
                SectionDraft(
                    id=section_id,
                    key=key,
                    title=title,
                    body=body,
                    provenance=list(provenance),
                    order=order,
                )
            )
        keys = [s.key for s in sections]
        for key in sorted(set(k for k in keys if keys.count(k) > 1)):
            violations.append(f"sections: duplicate key {key!r}")
        if sorted(s.order for s in sections) != list(range(len(sections))):
            violations.append("sections: orders must be consecutive from 0")

    if violations:
        raise SchemaViolation(violations)
    sections.sort(key=lambda s: s.order)
    return SowDraft(sow_id=sow_id, version=version, metadata=metadata, sections=sections)


# ---------------------------------------------------------------------------
# Drafting
# ---------------------------------------------------------------------------


def compute_sow_id(spec: RequirementSpec, seed: int | None) -> str:
    """Content-addressed id: stable for identical requests (stub replays)."""
    digest = hashlib.sha256(
        (json.dumps(spec.to_dict(), sort_keys=True) + f"|{seed}").encode("utf-8")
    ).hexdigest()
    return f"sow-{digest[:12]}"


def random_sow_id() -> str:
    return f"sow-{uuid.uuid4().hex[:12]}"


def assign_provenance(
    draft: SowDraft, refs: tuple[tuple[str, str | None], ...]
) -> None:
    """Attach retrieval provenance to sections by canonical key, regardless of
    what the backend claimed; provenance must be auditable from the context."""
    assignment = match_clauses_to_keys(list(refs), draft.keys())
    for section in draft.sections:
        section.provenance = list(assignment.get(section.key, []))


def draft(
    spec: RequirementSpec,
    prompt: AugmentedPrompt,
    backend,
    *,
    sow_id: str | None = None,
    seed: int | None = None,
    temperature: float = 0.2,
    max_output_chars: int = 32768,
    clock=None,
) -> SowDraft:
    """Generate a version-1 draft from a rendered prompt with one backend call."""
    errors = validate_input(spec)
    if errors:
        raise ValueError(f"invalid requirement input: {[e.field for e in errors]}")
    request = GenerationRequest(
        system_instructions=prompt.system_instructions,
        user_content=prompt.user_content,
        max_output_chars=max_output_chars,
        temperature=temperature,
        seed=seed,
    )
    output = backend.generate(request)
    parsed = parse_model_output(output)
    parsed.sow_id = sow_id or compute_sow_id(spec, seed)
    parsed.version = 1
    now = clock() if clock is not None else _dt.datetime.now(_dt.timezone.utc)
    parsed.metadata.generated_at = now.isoformat()
    if not parsed.metadata.project_title:
        parsed.metadata.project_title = spec.project_title
    assign_provenance(parsed, prompt.context_refs)
    return parsed
