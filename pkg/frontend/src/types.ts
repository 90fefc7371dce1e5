// Wire types for the gateway JSON API. The console displays these verbatim;
// it never computes scores or verdicts of its own.

export interface Deliverable {
  name: string;
  description: string;
  due_date?: string | null;
}

export interface RequirementSpec {
  project_title: string;
  client_name: string;
  vendor_name: string;
  goals: string;
  deliverables: Deliverable[];
  start_date: string;
  end_date: string;
  payment_terms: string;
  special_requirements: string[];
}

export interface FieldError {
  field: string;
  code: string;
  message: string;
}

export interface ApiErrorBody {
  code: string;
  message: string;
  field_errors: FieldError[];
}

export interface DraftSection {
  id: string;
  key: string;
  title: string;
  body: string;
  provenance: string[];
  order: number;
}

export interface DraftMetadata {
  project_title: string;
  client: string;
  vendor: string;
  effective_date: string;
  generated_at: string;
}

export interface SowDraft {
  sow_id: string;
  version: number;
  metadata: DraftMetadata;
  sections: DraftSection[];
}

export type ClauseStatus = "strong" | "weak" | "missing";

export interface ClauseFinding {
  clause_key: string;
  status: ClauseStatus;
  score: number;
  section_id: string | null;
}

export interface LanguageIssue {
  kind: "passive_voice" | "vague_term";
  section_id: string;
  span: [number, number];
  excerpt: string;
}

export interface FieldCheck {
  field: string;
  present: boolean;
  detail: string;
}

export interface ComplianceReport {
  findings: ClauseFinding[];
  issues: LanguageIssue[];
  field_checks: FieldCheck[];
  overall: "pass" | "warn" | "fail";
}

export interface ValidationIssue {
  kind: string;
  severity: "error" | "warning";
  locus: string;
  detail: string;
}

export interface ValidationReport {
  issues: ValidationIssue[];
  fixes_applied: string[];
  verdict: "accept" | "accept_with_fixes" | "reject";
}

export interface AuditEntry {
  stage: string;
  entered_at: string;
  outcome: string;
}

export type SowStatus = "processing" | "complete" | "failed";

export interface SowResource {
  sow_id: string;
  status: SowStatus;
  draft: SowDraft | null;
  compliance: ComplianceReport | null;
  validation: ValidationReport | null;
  audit: AuditEntry[];
  completeness?: number | null;
}

export type Rating = -1 | 0 | 1;

export interface FeedbackBody {
  rating: Rating;
  section_id?: string;
  comment?: string;
}

export interface ClauseHit {
  clause_id: string;
  text: string;
  raw_score: number;
  adjusted_score: number;
}
