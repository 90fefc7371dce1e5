"""Retrieval context assembly and prompt rendering.

The rendered prompt has three audiences at once: a human reading the request,
a hosted model drafting from it, and the deterministic stub backend that
parses the structured-input block appended at the end. Rendering is pure —
the same template, request, and context always produce identical bytes.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import TYPE_CHECKING

from sowgen.backends import format_structured_input
from sowgen.errors import TemplateError, UnboundPlaceholder
from sowgen.vecstore import RetrievalHit, VectorStore

if TYPE_CHECKING:
    from sowgen.drafting import RequirementSpec

PLACEHOLDER = re.compile(r"\{\{(\w+)\}\}")
_ESCAPED_OPEN = "\x00"
_ESCAPED_CLOSE = "\x01"

SYSTEM_INSTRUCTIONS = """\
You are the drafting component of a Statement of Work generation service.
Respond with a single JSON object and no surrounding prose. The object must
contain "metadata" (project_title, client, vendor, effective_date,
generated_at) and "sections": an array whose entries carry id, key, title,
body, provenance, and order. Include exactly these sections, in this order:
{section_list}
Ground legal language in the reference clauses when they apply, and keep
every statement specific to the request."""


@dataclass(frozen=True)
class PromptTemplate:
    template_id: str
    body: str
    required_placeholders: frozenset[str]
    fixed_sections: tuple[str, ...]

    def __post_init__(self):
        present = set(PLACEHOLDER.findall(self.body))
        missing = self.required_placeholders - present
        if missing:
            raise TemplateError(
                f"template {self.template_id!r} never uses required "
                f"placeholder(s): {', '.join(sorted(missing))}"
            )


@dataclass(frozen=True)
class ContextClause:
    hit: RetrievalHit
    text: str
    canonical_key: str | None


@dataclass(frozen=True)
class RetrievalContext:
    hits: tuple[ContextClause, ...]
    char_budget: int
    query_text: str


@dataclass(frozen=True)
class AugmentedPrompt:
    system_instructions: str
    user_content: str
    context_block: str
    bindings: dict[str, str]
    context_refs: tuple[tuple[str, str | None], ...]


def load_template(descriptor_path: Path) -> PromptTemplate:
    """Load a template from its JSON descriptor plus the sibling .txt body."""
    descriptor_path = Path(descriptor_path)
    descriptor = json.loads(descriptor_path.read_text(encoding="utf-8"))
    body = descriptor_path.with_suffix(".txt").read_text(encoding="utf-8")
    template = PromptTemplate(
        template_id=descriptor["template_id"],
        body=body,
        required_placeholders=frozenset(descriptor["required_placeholders"]),
        fixed_sections=tuple(descriptor["fixed_sections"]),
    )
    if not template.fixed_sections:
        raise TemplateError(f"template {template.template_id!r} has no fixed sections")
    return template


def default_template() -> PromptTemplate:
    with resources.as_file(
        resources.files("sowgen.data").joinpath("templates/sow_draft.json")
    ) as path:
        return load_template(path)


def query_text_for(spec: "RequirementSpec") -> str:
    """Retrieval query: the fields that carry the request's semantics."""
    parts = [spec.project_title, spec.goals, *[d.name for d in spec.deliverables]]
    return " ".join(p for p in parts if p).strip()


def build_context(
    spec: "RequirementSpec",
    store: VectorStore,
    k: int,
    min_score: float,
    budget: int,
    embedder,
) -> RetrievalContext:
    """Embed the query, search the store, keep the best-ranked whole clauses
    that fit the character budget (never truncating a clause mid-text)."""
    query = query_text_for(spec)
    if budget <= 0 or len(store) == 0 or not query:
        return RetrievalContext(hits=(), char_budget=max(budget, 0), query_text=query)
    [vector] = embedder.embed([query])
    hits = store.search(vector, k, min_score)
    kept: list[ContextClause] = []
    total = 0
    for hit in hits:
        record = store.get(hit.clause_id)
        if total + len(record.text) > budget:
            break  # drop this and every lower-ranked clause
        total += len(record.text)
        kept.append(ContextClause(hit, record.text, record.canonical_key))
    return RetrievalContext(hits=tuple(kept), char_budget=budget, query_text=query)


def spec_bindings(spec: "RequirementSpec") -> dict[str, str]:
    deliverable_lines = []
    for d in spec.deliverables:
        line = f"- {d.name}: {d.description}" if d.description else f"- {d.name}"
        if d.due_date:
            line += f" (due {d.due_date})"
        deliverable_lines.append(line)
    requirements = "\n".join(f"- {r}" for r in spec.special_requirements if r)
    return {
        "project_title": spec.project_title,
        "client_name": spec.client_name,
        "vendor_name": spec.vendor_name,
        "goals": spec.goals,
        "start_date": spec.start_date,
        "end_date": spec.end_date,
        "payment_terms": spec.payment_terms,
        "deliverables": "\n".join(deliverable_lines),
        "special_requirements": requirements or "(none)",
    }


def render_context_block(ctx: RetrievalContext) -> str:
    if not ctx.hits:
        return ""
    return "\n".join(f"[{item.hit.clause_id}] {item.text}" for item in ctx.hits)


def _substitute_placeholders(body: str, bindings: dict[str, str]) -> str:
    text = body.replace("{{{{", _ESCAPED_OPEN).replace("}}}}", _ESCAPED_CLOSE)

    def repl(m: re.Match) -> str:
        name = m.group(1)
        if name not in bindings:
            raise UnboundPlaceholder(name)
        return bindings[name]

    text = PLACEHOLDER.sub(repl, text)
    if "{{" in text:
        m = re.search(r"\{\{([^}\n]*)", text)
        raise UnboundPlaceholder(m.group(1) if m else "{{")
    return text.replace(_ESCAPED_OPEN, "{{").replace(_ESCAPED_CLOSE, "}}")


def render_prompt(
    template: PromptTemplate, spec: "RequirementSpec", ctx: RetrievalContext
) -> AugmentedPrompt:
    """Bind spec fields into the template and assemble the full prompt."""
    bindings = spec_bindings(spec)
    for name in sorted(template.required_placeholders):
        if name not in bindings:
            raise UnboundPlaceholder(name)
    rendered = _substitute_placeholders(template.body, bindings)

    context_block = render_context_block(ctx)
    section_list = "\n".join(
        f"{i}. {key}" for i, key in enumerate(template.fixed_sections, start=1)
    )
    system = SYSTEM_INSTRUCTIONS.format(section_list=section_list)

    machine_payload = {
        "bindings": bindings,
        "required_sections": list(template.fixed_sections),
        "context_clauses": [
            {
                "clause_id": item.hit.clause_id,
                "canonical_key": item.canonical_key,
                "text": item.text,
            }
            for item in ctx.hits
        ],
    }
    user_content = (
        f"{rendered.rstrip()}\n\n### Reference Clauses\n"
        f"{context_block or '(none)'}\n\n{format_structured_input(machine_payload)}"
    )
    return AugmentedPrompt(
        system_instructions=system,
        user_content=user_content,
        context_block=context_block,
        bindings=bindings,
        context_refs=tuple((i.hit.clause_id, i.canonical_key) for i in ctx.hits),
    )
