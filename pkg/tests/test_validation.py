from __future__ import annotations

import copy
from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import three_section_draft
from sowgen.compliance import ComplianceReport
from sowgen.drafting import (
    Deliverable,
    DraftMetadata,
    RequirementSpec,
    SectionDraft,
    SowDraft,
    draft_to_json,
    parse_model_output,
)
from sowgen.errors import UnsupportedFormat
from sowgen.sections import CANONICAL_SECTION_KEYS
from sowgen.validation import (
    apply_formatting,
    decide,
    make_issue,
    render,
    validate_crossrefs,
    validate_structure,
    validate_style,
    verify_completeness,
)

GOLDEN = Path(__file__).parent / "golden" / "three_sections.md"


def full_draft() -> SowDraft:
    sections = [
        SectionDraft(id=key, key=key, title=key.replace("_", " ").title(), body=f"Body of {key}.", order=i)
        for i, key in enumerate(CANONICAL_SECTION_KEYS)
    ]
    return SowDraft(sow_id="sow-x", version=1, metadata=DraftMetadata(project_title="X"), sections=sections)


def compliance(overall: str) -> ComplianceReport:
    return ComplianceReport(findings=[], issues=[], field_checks=[], overall=overall)


class TestValidateStructure:
    def test_all_present_once(self):
        assert validate_structure(full_draft(), CANONICAL_SECTION_KEYS) == []

    def test_missing_section_named(self):
        draft = full_draft()
        draft.sections = [s for s in draft.sections if s.key != "payment_terms"]
        for i, s in enumerate(sorted(draft.sections, key=lambda s: s.order)):
            s.order = i
        issues = validate_structure(draft, CANONICAL_SECTION_KEYS)
        assert len(issues) == 1
        assert issues[0].kind == "missing_section"
        assert issues[0].severity == "error"
        assert "payment_terms" in issues[0].detail

    def test_duplicate_section_single_error(self):
        draft = full_draft()
        dup = copy.deepcopy(draft.section_by_key("confidentiality"))
        dup.id = "confidentiality-2"
        dup.order = len(draft.sections)
        draft.sections.append(dup)
        issues = validate_structure(draft, CANONICAL_SECTION_KEYS)
        assert [i.kind for i in issues] == ["duplicate_section"]


class TestValidateCrossrefs:
    def test_valid_reference(self):
        draft = three_section_draft()
        draft.sections[0].body += " See Section 2 for dates."
        assert validate_crossrefs(draft) == []

    def test_dangling_reference(self):
        draft = three_section_draft()
        draft.sections[0].body += " See Section 9."
        issues = validate_crossrefs(draft)
        assert len(issues) == 1
        assert issues[0].kind == "dangling_reference"
        assert issues[0].locus == "scope_of_work"

    def test_section_sign_syntax(self):
        draft = three_section_draft()
        draft.sections[1].body += " As noted in §4."
        issues = validate_crossrefs(draft)
        assert [i.kind for i in issues] == ["dangling_reference"]

    def test_no_references(self):
        assert validate_crossrefs(three_section_draft()) == []

    def test_zero_is_dangling(self):
        draft = three_section_draft()
        draft.sections[0].body += " Per Section 0."
        assert len(validate_crossrefs(draft)) == 1


class TestVerifyCompleteness:
    def spec(self, requirements=()) -> RequirementSpec:
        return RequirementSpec(
            project_title="Inventory Audit",
            deliverables=[Deliverable(name="Audit Report", description="")],
            start_date="2025-02-01",
            end_date="2025-03-15",
            special_requirements=list(requirements),
        )

    def test_verbatim_deliverable_is_addressed(self, stub_embedder):
        draft = three_section_draft()
        draft.sections[0].body += " The Audit Report lands mid-March."
        assert verify_completeness(draft, self.spec(), stub_embedder) == []

    def test_unrelated_requirement_is_flagged(self, stub_embedder):
        draft = three_section_draft()
        draft.sections[0].body += " The Audit Report lands mid-March."
        issues = verify_completeness(
            draft, self.spec(["quantum entanglement certification"]), stub_embedder
        )
        assert [i.kind for i in issues] == ["unaddressed_requirement"]
        assert issues[0].severity == "warning"

    def test_near_duplicate_body_passes_by_embedding(self, stub_embedder):
        draft = three_section_draft()
        draft.sections[0].body = "warehouse inventory records audit coverage"
        issues = verify_completeness(
            draft, self.spec(["audit coverage warehouse inventory records"]), stub_embedder
        )
        # Same token bag, different order: cosine 1.0 >= 0.60.
        assert not any("special requirement" in i.detail for i in issues)

    def test_vacuous_when_nothing_to_check(self, stub_embedder):
        draft = three_section_draft()
        draft.sections[0].body += " The Audit Report lands mid-March."
        spec = self.spec()
        spec.special_requirements = []
        assert verify_completeness(draft, spec, stub_embedder) == []


class TestApplyFormatting:
    def test_title_cased_headings(self):
        draft = three_section_draft()
        draft.sections[0].title = "scope of work"
        formatted = apply_formatting(draft)
        assert formatted.sections[0].title == "Scope of Work"

    def test_orders_rewritten_preserving_relative_order(self):
        draft = three_section_draft()
        draft.sections[0].order = 0
        draft.sections[1].order = 2
        draft.sections[2].order = 5
        formatted = apply_formatting(draft)
        assert [s.key for s in formatted.sections] == ["scope_of_work", "timeline", "payment_terms"]
        assert [s.order for s in formatted.sections] == [0, 1, 2]

    def test_bullets_normalized(self):
        draft = three_section_draft()
        draft.sections[0].body = "* first\n• second\n+  third\n- kept"
        formatted = apply_formatting(draft)
        assert formatted.sections[0].body == "- first\n- second\n- third\n- kept"

    def test_trailing_whitespace_stripped(self):
        draft = three_section_draft()
        draft.sections[0].body = "line one   \nline two\t\n\n"
        formatted = apply_formatting(draft)
        assert formatted.sections[0].body == "line one\nline two"

    def test_idempotent_byte_equal(self):
        draft = three_section_draft()
        draft.sections[0].title = "scope OF work"
        draft.sections[0].body = "* item  \ntext "
        once = apply_formatting(draft)
        twice = apply_formatting(once)
        assert draft_to_json(twice) == draft_to_json(once)

    def test_structural_findings_unchanged_by_formatting(self):
        draft = full_draft()
        draft.sections = [s for s in draft.sections if s.key != "liability"]
        before = validate_structure(draft, CANONICAL_SECTION_KEYS)
        after = validate_structure(apply_formatting(draft), CANONICAL_SECTION_KEYS)
        assert [(i.kind, i.detail) for i in before] == [(i.kind, i.detail) for i in after]

    def test_input_draft_untouched(self):
        draft = three_section_draft()
        draft.sections[0].title = "scope of work"
        apply_formatting(draft)
        assert draft.sections[0].title == "scope of work"


class TestValidateStyle:
    def test_canonical_draft_is_clean(self):
        assert validate_style(three_section_draft()) == []

    def test_lowercase_heading_flagged(self):
        draft = three_section_draft()
        draft.sections[0].title = "scope of work"
        issues = validate_style(draft)
        assert [i.kind for i in issues] == ["style"]
        assert issues[0].severity == "warning"

    def test_gappy_numbering_flagged(self):
        draft = three_section_draft()
        draft.sections[2].order = 7
        issues = validate_style(draft)
        assert any("numbering" in i.detail for i in issues)

    def test_formatting_clears_style_findings(self):
        draft = three_section_draft()
        draft.sections[0].title = "scope of work"
        draft.sections[1].body += "   "
        assert validate_style(apply_formatting(draft)) == []


class TestDecide:
    def test_clean_accept(self):
        assert decide(compliance("pass"), [], 1, 3) == "accept"

    def test_style_only_accepts_with_fixes(self):
        issues = [make_issue("style", "scope_of_work", "heading case")]
        assert decide(compliance("pass"), issues, 1, 3) == "accept_with_fixes"

    def test_compliance_warn_accepts_with_fixes(self):
        assert decide(compliance("warn"), [], 1, 3) == "accept_with_fixes"

    def test_error_issue_rejects(self):
        issues = [make_issue("missing_section", "document", "payment_terms missing")]
        assert decide(compliance("pass"), issues, 3, 3) == "reject"

    def test_compliance_fail_rejects(self):
        assert decide(compliance("fail"), [], 1, 3) == "reject"

    def test_non_style_warning_rides_along_on_accept(self):
        issues = [make_issue("unaddressed_requirement", "document", "item missing")]
        assert decide(compliance("pass"), issues, 1, 3) == "accept"

    @given(
        st.lists(
            st.sampled_from(
                ["missing_section", "duplicate_section", "dangling_reference", "unaddressed_requirement", "style"]
            ),
            max_size=6,
        ),
        st.sampled_from(["pass", "warn", "fail"]),
    )
    def test_never_accepts_with_error_issues(self, kinds, overall):
        issues = [make_issue(kind, "document", "x") for kind in kinds]
        verdict = decide(compliance(overall), issues, 1, 3)
        if any(i.severity == "error" for i in issues):
            assert verdict == "reject"


class TestRender:
    def test_markdown_matches_golden_byte_exactly(self):
        doc = render(three_section_draft(), "markdown")
        assert doc.content.encode() == GOLDEN.read_bytes()

    def test_structured_round_trip(self):
        draft = three_section_draft()
        doc = render(draft, "structured")
        assert parse_model_output(doc.content) == draft

    def test_unsupported_format(self):
        with pytest.raises(UnsupportedFormat):
            render(three_section_draft(), "pdf")

    def test_checksum_matches_content(self):
        import hashlib

        doc = render(three_section_draft(), "markdown")
        assert doc.checksum == hashlib.sha256(doc.content.encode()).hexdigest()

    def test_distinct_drafts_distinct_checksums(self):
        fixtures = [three_section_draft() for _ in range(3)]
        fixtures[1].metadata.project_title = "Different Title"
        fixtures[2].sections[0].body += " More."
        sums = {render(d, "markdown").checksum for d in fixtures}
        assert len(sums) == 3
