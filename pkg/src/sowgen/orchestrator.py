"""Pipeline driver: an explicit stage machine with a bounded revision loop,
an audit trail for every run, and the feedback mechanism that re-ranks
retrieval.

Stage graph:

    ValidateInput -> RetrieveContext -> Draft -> ComplianceReview
        -> FormatValidate -> Emit
    FormatValidate -> Revise -> ComplianceReview   (at most max_revisions)
    any stage -> Failed

Each run is an isolated sequential process; the clause store is the only
shared resource and is consulted under its own locking contract.
"""

from __future__ import annotations

import csv
import datetime as _dt
import json
import logging
import threading
from dataclasses import dataclass, field
from pathlib import Path

from sowgen import compliance as compliance_mod
from sowgen import validation as validation_mod
from sowgen.backends import (
    BackendDescriptor,
    GenerationRequest,
    classification_backend,
    embedding_backend,
    format_structured_input,
    generation_backend,
)
from sowgen.compliance import ComplianceReport
from sowgen.drafting import (
    RequirementSpec,
    SowDraft,
    assign_provenance,
    compute_sow_id,
    draft as make_draft,
    draft_to_dict,
    draft_to_json,
    parse_model_output,
    random_sow_id,
    validate_input,
)
from sowgen.errors import NothingToRevise, SowgenError, UnknownSection, UnknownSow
from sowgen.ragchain import (
    AugmentedPrompt,
    RetrievalContext,
    build_context,
    default_template,
    query_text_for,
    render_prompt,
)
from sowgen.sections import CANONICAL_SECTION_KEYS
from sowgen.vecstore import VectorStore

logger = logging.getLogger("sowgen.orchestrator")

STAGES = (
    "ValidateInput",
    "RetrieveContext",
    "Draft",
    "ComplianceReview",
    "Revise",
    "FormatValidate",
    "Emit",
    "Failed",
)

ABLATABLE = frozenset({"rag", "compliance", "formatting"})

_LOGICAL_EPOCH = _dt.datetime(2024, 1, 1, tzinfo=_dt.timezone.utc)


@dataclass
class PipelineConfig:
    similarity_min: float = 0.70
    k: int = 5
    context_budget: int = 4000
    clause_strong: float = 0.75
    clause_weak: float = 0.40
    completeness_min: float = 0.60
    max_revisions: int = 2
    required_keys: tuple[str, ...] = CANONICAL_SECTION_KEYS
    embedding_dim: int = 384
    feedback_alpha: float = 0.1
    temperature: float = 0.2
    seed: int = 0
    max_output_chars: int = 32768
    generation: BackendDescriptor = field(default_factory=BackendDescriptor)
    classification: BackendDescriptor = field(default_factory=BackendDescriptor)
    embedding: BackendDescriptor = field(default_factory=BackendDescriptor)

    def validate(self) -> None:
        if not 0.0 <= self.clause_weak < self.clause_strong <= 1.0:
            raise ValueError("need 0 <= clause_weak < clause_strong <= 1")
        if not 0.0 <= self.similarity_min <= 1.0:
            raise ValueError("similarity_min must be in [0, 1]")
        if not 0.0 <= self.completeness_min <= 1.0:
            raise ValueError("completeness_min must be in [0, 1]")
        if self.max_revisions < 0:
            raise ValueError("max_revisions must be >= 0")
        if self.feedback_alpha < 0:
            raise ValueError("feedback_alpha must be >= 0")
        if self.embedding_dim <= 0:
            raise ValueError("embedding_dim must be positive")
        if self.k < 0:
            raise ValueError("k must be >= 0")
        for descriptor in (self.generation, self.classification, self.embedding):
            descriptor.validate()


@dataclass
class FeedbackRecord:
    sow_id: str
    rating: int  # -1 | 0 | +1
    section_id: str | None = None
    comment: str = ""
    created_at: str = ""

    def to_dict(self) -> dict:
        return {
            "sow_id": self.sow_id,
            "section_id": self.section_id,
            "rating": self.rating,
            "comment": self.comment,
            "created_at": self.created_at,
        }


@dataclass
class AuditEntry:
    stage: str
    entered_at: str
    outcome: str = ""

    def to_dict(self) -> dict:
        return {"stage": self.stage, "entered_at": self.entered_at, "outcome": self.outcome}


@dataclass
class RunOutcome:
    sow_id: str
    status: str  # processing | complete | failed
    spec: RequirementSpec | None = None
    draft: SowDraft | None = None
    compliance: ComplianceReport | None = None
    validation: validation_mod.ValidationReport | None = None
    audit: list[AuditEntry] = field(default_factory=list)
    prompt: AugmentedPrompt | None = None
    context: RetrievalContext | None = None
    completeness: float | None = None

    def to_resource_dict(self) -> dict:
        """Wire shape for the run registry and the HTTP resource: the draft is
        only exposed once the run completed."""
        return {
            "sow_id": self.sow_id,
            "status": self.status,
            "draft": draft_to_dict(self.draft) if self.status == "complete" and self.draft else None,
            "compliance": self.compliance.to_dict() if self.compliance else None,
            "validation": self.validation.to_dict() if self.validation else None,
            "audit": [entry.to_dict() for entry in self.audit],
            "completeness": self.completeness,
        }


class LogicalClock:
    """Deterministic clock for replayable stub runs: fixed epoch, one second
    per reading."""

    def __init__(self, start: _dt.datetime = _LOGICAL_EPOCH):
        self._now = start

    def __call__(self) -> _dt.datetime:
        current = self._now
        self._now = current + _dt.timedelta(seconds=1)
        return current


def wall_clock() -> _dt.datetime:
    return _dt.datetime.now(_dt.timezone.utc)


class _StrictlyIncreasing:
    """Audit entries must be strictly time-ordered; a fast wall clock can
    stamp two stage transitions with the same microsecond, so nudge repeats
    forward."""

    def __init__(self, inner):
        self._inner = inner
        self._last: _dt.datetime | None = None

    def __call__(self) -> _dt.datetime:
        now = self._inner()
        if self._last is not None and now <= self._last:
            now = self._last + _dt.timedelta(microseconds=1)
        self._last = now
        return now


class RunRegistry:
    """Run outcomes by sow_id, optionally persisted one JSON file per run."""

    def __init__(self, directory: Path | None = None):
        self._outcomes: dict[str, RunOutcome] = {}
        self._lock = threading.Lock()
        self.directory = Path(directory) if directory else None
        if self.directory:
            self.directory.mkdir(parents=True, exist_ok=True)

    def put(self, outcome: RunOutcome) -> None:
        with self._lock:
            self._outcomes[outcome.sow_id] = outcome
        if self.directory:
            path = self.directory / f"{outcome.sow_id}.json"
            path.write_text(
                json.dumps(outcome.to_resource_dict(), ensure_ascii=False, indent=2) + "\n",
                encoding="utf-8",
            )

    def get(self, sow_id: str) -> RunOutcome | None:
        with self._lock:
            return self._outcomes.get(sow_id)

    def append_feedback(self, record: FeedbackRecord) -> None:
        if not self.directory:
            return
        path = self.directory / "feedback.jsonl"
        with path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(record.to_dict(), ensure_ascii=False) + "\n")


class Pipeline:
    """Wires the agents together for one configuration and clause store."""

    def __init__(
        self,
        config: PipelineConfig,
        store: VectorStore,
        *,
        generation=None,
        classification=None,
        embedding=None,
        template=None,
        registry: RunRegistry | None = None,
        clock=None,
    ):
        config.validate()
        if store.dim != config.embedding_dim:
            raise ValueError(
                f"store dimension {store.dim} differs from configured {config.embedding_dim}"
            )
        self.config = config
        self.store = store
        store.feedback_alpha = config.feedback_alpha
        self.generation = generation or generation_backend(config.generation)
        self.classification = classification or classification_backend(config.classification)
        self.embedding = embedding or embedding_backend(config.embedding, config.embedding_dim)
        self.template = template or default_template()
        self.registry = registry or RunRegistry()
        if clock is not None:
            self.clock = clock
        elif getattr(self.generation, "kind", "stub") == "stub":
            # Stub runs replay byte-for-byte, timestamps included.
            self.clock = LogicalClock()
        else:
            self.clock = _StrictlyIncreasing(wall_clock)
        self.generation_calls = 0

    # -- ids ---------------------------------------------------------------

    def sow_id_for(self, spec: RequirementSpec) -> str:
        if getattr(self.generation, "kind", "stub") == "stub":
            return compute_sow_id(spec, self.config.seed)
        return random_sow_id()

    # -- pipeline ----------------------------------------------------------

    def run(self, spec: RequirementSpec, sow_id: str | None = None) -> RunOutcome:
        return self._run(spec, frozenset(), sow_id)

    def ablation_run(
        self, spec: RequirementSpec, disabled: frozenset[str] | set[str], sow_id: str | None = None
    ) -> RunOutcome:
        """Run with modules selectively disabled; the outcome additionally
        carries a completeness score (fraction of required sections present
        and requirements addressed)."""
        disabled = frozenset(disabled)
        unknown = disabled - ABLATABLE
        if unknown:
            raise ValueError(f"cannot disable unknown module(s): {sorted(unknown)}")
        outcome = self._run(spec, disabled, sow_id)
        outcome.completeness = self._completeness(outcome.draft, spec)
        return outcome

    def _run(self, spec: RequirementSpec, disabled: frozenset[str], sow_id: str | None) -> RunOutcome:
        cfg = self.config
        audit: list[AuditEntry] = []

        def enter(stage: str) -> AuditEntry:
            entry = AuditEntry(stage=stage, entered_at=self.clock().isoformat())
            audit.append(entry)
            return entry

        def failed(outcome: RunOutcome, reason: str) -> RunOutcome:
            enter("Failed").outcome = reason
            outcome.status = "failed"
            outcome.audit = audit
            self.registry.put(outcome)
            return outcome

        sow_id = sow_id or self.sow_id_for(spec)
        outcome = RunOutcome(sow_id=sow_id, status="processing", spec=spec, audit=audit)

        entry = enter("ValidateInput")
        field_errors = validate_input(spec)
        if field_errors:
            entry.outcome = f"{len(field_errors)} field error(s)"
            return failed(outcome, "input validation failed")
        entry.outcome = "ok"

        entry = enter("RetrieveContext")
        if "rag" in disabled:
            ctx = RetrievalContext(hits=(), char_budget=cfg.context_budget,
                                   query_text=query_text_for(spec))
            entry.outcome = "rag disabled; relying on user input only"
        else:
            try:
                ctx = build_context(
                    spec, self.store, cfg.k, cfg.similarity_min, cfg.context_budget, self.embedding
                )
            except SowgenError as exc:
                entry.outcome = f"failed: {exc}"
                return failed(outcome, f"RetrieveContext: {exc}")
            entry.outcome = f"{len(ctx.hits)} clause(s) in context"
        outcome.context = ctx
        try:
            prompt = render_prompt(self.template, spec, ctx)
        except SowgenError as exc:
            entry.outcome += f"; prompt render failed: {exc}"
            return failed(outcome, f"RetrieveContext: {exc}")
        outcome.prompt = prompt

        entry = enter("Draft")
        try:
            self.generation_calls += 1
            current = make_draft(
                spec,
                prompt,
                self.generation,
                sow_id=sow_id,
                seed=cfg.seed,
                temperature=cfg.temperature,
                max_output_chars=cfg.max_output_chars,
                clock=self.clock,
            )
        except SowgenError as exc:
            entry.outcome = f"failed: {exc}"
            return failed(outcome, f"Draft: {exc}")
        entry.outcome = f"draft v{current.version} with {len(current.sections)} section(s)"

        iteration = 1
        max_iterations = cfg.max_revisions + 1
        while True:
            entry = enter("ComplianceReview")
            if "compliance" in disabled:
                report = ComplianceReport(findings=[], issues=[], field_checks=[], overall="pass")
                entry.outcome = "skipped (ablation)"
            else:
                try:
                    findings = compliance_mod.check_clauses(
                        current, self.classification,
                        strong=cfg.clause_strong, weak=cfg.clause_weak,
                    )
                except SowgenError as exc:
                    entry.outcome = f"failed: {exc}"
                    return failed(outcome, f"ComplianceReview: {exc}")
                lint = compliance_mod.lint_language(current)
                fields = compliance_mod.check_fields(current)
                report = compliance_mod.compile_report(findings, lint, fields)
                entry.outcome = f"overall={report.overall}"
            outcome.compliance = report

            entry = enter("FormatValidate")
            try:
                issues = (
                    validation_mod.validate_structure(current, cfg.required_keys)
                    + validation_mod.validate_crossrefs(current)
                    + validation_mod.verify_completeness(
                        current, spec, self.embedding, threshold=cfg.completeness_min
                    )
                    + validation_mod.validate_style(current)
                )
            except SowgenError as exc:
                entry.outcome = f"failed: {exc}"
                return failed(outcome, f"FormatValidate: {exc}")
            verdict = validation_mod.decide(report, issues, iteration, max_iterations)

            if verdict == "reject":
                outcome.validation = validation_mod.ValidationReport(
                    issues=issues, fixes_applied=[], verdict="reject"
                )
                outcome.draft = current
                if iteration >= max_iterations:
                    entry.outcome = f"verdict=reject (final, iteration {iteration})"
                    return failed(outcome, f"rejected after {iteration - 1} revision(s)")
                entry.outcome = f"verdict=reject (iteration {iteration})"
                revise_entry = enter("Revise")
                try:
                    current = self.revise(current, report, outcome.validation, prompt)
                except SowgenError as exc:
                    revise_entry.outcome = f"failed: {exc}"
                    return failed(outcome, f"Revise: {exc}")
                revise_entry.outcome = f"draft v{current.version}"
                iteration += 1
                continue

            if verdict == "accept_with_fixes":
                if "formatting" in disabled:
                    fixes: list[str] = []
                    entry.outcome = "verdict=accept_with_fixes (formatting disabled)"
                else:
                    formatted = validation_mod.apply_formatting(current)
                    fixes = validation_mod.describe_fixes(current, formatted)
                    current = formatted
                    entry.outcome = f"verdict=accept_with_fixes ({len(fixes)} fix(es))"
                outcome.validation = validation_mod.ValidationReport(
                    issues=issues, fixes_applied=fixes, verdict="accept_with_fixes"
                )
            else:
                outcome.validation = validation_mod.ValidationReport(
                    issues=issues, fixes_applied=[], verdict="accept"
                )
                entry.outcome = "verdict=accept"
            break

        outcome.draft = current
        enter("Emit").outcome = f"{current.sow_id} v{current.version}"
        outcome.status = "complete"
        self.registry.put(outcome)
        return outcome

    # -- revision ------------------------------------------------------------

    def revise(
        self,
        draft: SowDraft,
        compliance: ComplianceReport,
        validation: validation_mod.ValidationReport,
        prompt: AugmentedPrompt,
    ) -> SowDraft:
        """One generation call addressing every defect in the reports; the
        revised draft keeps its identity and bumps the version."""
        defects = revision_defects(compliance, validation)
        if not defects:
            raise NothingToRevise("reports contain no missing/weak clause, absent field, or error")
        defect_block = "\n".join(f"- {d}" for d in defects)
        machine_block = prompt.user_content.split("### Structured Input", 1)
        structured = (
            "### Structured Input" + machine_block[1]
            if len(machine_block) == 2
            else format_structured_input({"bindings": dict(prompt.bindings), "required_sections": [], "context_clauses": []})
        )
        user_content = (
            "Revise the Statement of Work draft below. Address every defect "
            f"listed; keep everything else intact.\n\n### Defects\n{defect_block}\n\n"
            f"### Current Draft\n```json\n{draft_to_json(draft)}```\n\n{structured}"
        )
        request = GenerationRequest(
            system_instructions=prompt.system_instructions,
            user_content=user_content,
            max_output_chars=self.config.max_output_chars,
            temperature=self.config.temperature,
            seed=self.config.seed,
        )
        self.generation_calls += 1
        revised = parse_model_output(self.generation.generate(request))
        revised.sow_id = draft.sow_id
        revised.version = draft.version + 1
        revised.metadata.generated_at = self.clock().isoformat()
        if not revised.metadata.project_title:
            revised.metadata.project_title = draft.metadata.project_title
        assign_provenance(revised, prompt.context_refs)
        return revised

    # -- feedback ------------------------------------------------------------

    def record_feedback(self, fb: FeedbackRecord) -> None:
        """Persist a rating and fold it into the feedback mean of every clause
        that grounded the rated section(s); search picks the change up through
        adjusted_score = raw * (1 + alpha * avg)."""
        if fb.rating not in (-1, 0, 1) or isinstance(fb.rating, bool):
            raise ValueError("rating must be -1, 0, or +1")
        outcome = self.registry.get(fb.sow_id)
        if outcome is None:
            raise UnknownSow(f"no run registered for {fb.sow_id!r}")
        draft = outcome.draft
        if fb.section_id is not None:
            if draft is None or draft.section_by_id(fb.section_id) is None:
                raise UnknownSection(f"section {fb.section_id!r} not in {fb.sow_id!r}")
            sections = [draft.section_by_id(fb.section_id)]
        else:
            sections = list(draft.sections) if draft else []
        if not fb.created_at:
            fb.created_at = self.clock().isoformat()
        clause_ids = sorted({cid for s in sections for cid in s.provenance})
        for clause_id in clause_ids:
            if clause_id in self.store:
                self.store.apply_rating(clause_id, fb.rating)
            else:
                logger.debug("feedback for unknown clause %s ignored", clause_id)
        self.registry.append_feedback(fb)

    # -- ablation helpers ------------------------------------------------------

    def _completeness(self, draft: SowDraft | None, spec: RequirementSpec) -> float:
        """Fraction of required section keys present and requirements
        (deliverables + special requirements) addressed."""
        required = list(self.config.required_keys)
        item_count = sum(1 for d in spec.deliverables if d.name.strip()) + sum(
            1 for r in spec.special_requirements if r.strip()
        )
        total = len(required) + item_count
        if total == 0:
            return 1.0
        if draft is None:
            return 0.0
        keys = set(draft.keys())
        present = sum(1 for key in required if key in keys)
        unaddressed = len(
            validation_mod.verify_completeness(
                draft, spec, self.embedding, threshold=self.config.completeness_min
            )
        )
        return (present + (item_count - unaddressed)) / total


def revision_defects(
    compliance: ComplianceReport, validation: validation_mod.ValidationReport | None
) -> list[str]:
    """Everything a revision must address, each with its locus."""
    defects = []
    for finding in compliance.findings:
        if finding.status in ("missing", "weak"):
            hypothesis = compliance_mod.HYPOTHESES[finding.clause_key]
            locus = finding.section_id or "document"
            defects.append(
                f"{finding.status} clause {finding.clause_key}: {hypothesis} (locus: {locus})"
            )
    for check in compliance.field_checks:
        if not check.present:
            defects.append(f"absent field {check.field}: {check.detail} (locus: document)")
    if validation is not None:
        for issue in validation.issues:
            if issue.severity == "error":
                defects.append(f"{issue.kind}: {issue.detail} (locus: {issue.locus})")
    return defects


def run_pipeline(
    spec: RequirementSpec,
    config: PipelineConfig,
    store: VectorStore | None = None,
    **kwargs,
) -> RunOutcome:
    """Convenience wrapper: build a Pipeline for `config` and run once."""
    store = store or VectorStore(dim=config.embedding_dim, feedback_alpha=config.feedback_alpha)
    return Pipeline(config, store, **kwargs).run(spec)


def write_ablation_csv(path: Path, rows: list[dict], append: bool = False) -> None:
    """One line per run: {run_id, disabled_set, completeness, verdict}."""
    path = Path(path)
    exists = path.exists() and append
    mode = "a" if append else "w"
    with path.open(mode, encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["run_id", "disabled_set", "completeness", "verdict"])
        if not exists:
            writer.writeheader()
        for row in rows:
            writer.writerow(row)
