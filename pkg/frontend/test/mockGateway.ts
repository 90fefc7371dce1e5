// Stateful in-memory stand-in for the gateway, implementing the documented
// contract: async drafting with polling, field-error 400s, feedback that
// re-ranks clause search via adjusted = raw * (1 + 0.1 * mean(ratings)).

import type { FetchFn } from "../src/api.js";
import type {
  ApiErrorBody,
  FieldError,
  RequirementSpec,
  SowResource,
} from "../src/types.js";

interface MockClause {
  clause_id: string;
  text: string;
  raw: number;
  ratings: number[];
}

interface Run {
  resource: SowResource;
  pollsLeft: number;
}

const FEEDBACK_ALPHA = 0.1;

function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

function apiError(status: number, code: string, message: string, fieldErrors: FieldError[] = []) {
  const body: ApiErrorBody = { code, message, field_errors: fieldErrors };
  return jsonResponse(status, body);
}

function validate(spec: RequirementSpec): FieldError[] {
  const errors: FieldError[] = [];
  if (!spec.project_title?.trim()) {
    errors.push({ field: "project_title", code: "REQUIRED", message: "project_title must not be empty" });
  }
  if (!spec.deliverables || spec.deliverables.length === 0) {
    errors.push({ field: "deliverables", code: "REQUIRED", message: "at least one deliverable is required" });
  }
  if (spec.start_date && spec.end_date && spec.end_date < spec.start_date) {
    errors.push({ field: "end_date", code: "DATE_ORDER", message: "end_date must not be earlier than start_date" });
  }
  return errors;
}

export class MockGateway {
  readonly clauses: MockClause[] = [
    { clause_id: "lib-conf-1", text: "Proprietary information stays confidential.", raw: 0.8, ratings: [] },
    { clause_id: "lib-pay-1", text: "Invoices settle net 30.", raw: 0.85, ratings: [] },
    { clause_id: "lib-term-1", text: "Termination needs thirty days notice.", raw: 0.5, ratings: [] },
  ];
  pollsUntilReady = 2;
  private runs = new Map<string, Run>();
  private idsBySpec = new Map<string, string>();
  private counter = 0;
  log: string[] = [];

  readonly fetch: FetchFn = async (input, init) => {
    const url = new URL(input, "http://mock.gateway");
    const method = (init?.method ?? "GET").toUpperCase();
    this.log.push(`${method} ${url.pathname}`);

    if (method === "POST" && url.pathname === "/api/v1/sow") {
      const spec = JSON.parse(String(init?.body)) as RequirementSpec;
      const errors = validate(spec);
      if (errors.length > 0) {
        return apiError(400, "INVALID_SPEC", "requirement input is invalid", errors);
      }
      return jsonResponse(202, { sow_id: this.startRun(spec) });
    }

    const sowMatch = url.pathname.match(/^\/api\/v1\/sow\/([^/]+)$/);
    if (method === "GET" && sowMatch) {
      const run = this.runs.get(decodeURIComponent(sowMatch[1]));
      if (!run) return apiError(404, "UNKNOWN_SOW", "no such run");
      if (run.pollsLeft > 0) {
        run.pollsLeft -= 1;
        return jsonResponse(200, {
          sow_id: run.resource.sow_id,
          status: "processing",
          draft: null,
          compliance: null,
          validation: null,
          audit: [],
        });
      }
      return jsonResponse(200, run.resource);
    }

    const feedbackMatch = url.pathname.match(/^\/api\/v1\/sow\/([^/]+)\/feedback$/);
    if (method === "POST" && feedbackMatch) {
      const run = this.runs.get(decodeURIComponent(feedbackMatch[1]));
      if (!run) return apiError(404, "UNKNOWN_SOW", "no such run");
      const body = JSON.parse(String(init?.body)) as { rating: number; section_id?: string };
      if (![-1, 0, 1].includes(body.rating)) {
        return apiError(400, "INVALID_RATING", "rating must be -1, 0, or +1");
      }
      const sections = run.resource.draft?.sections ?? [];
      const targets = body.section_id
        ? sections.filter((s) => s.id === body.section_id)
        : sections;
      if (body.section_id && targets.length === 0) {
        return apiError(400, "UNKNOWN_SECTION", `section ${body.section_id} not in draft`);
      }
      for (const section of targets) {
        for (const clauseId of section.provenance) {
          const clause = this.clauses.find((c) => c.clause_id === clauseId);
          clause?.ratings.push(body.rating);
        }
      }
      return new Response(null, { status: 204 });
    }

    if (method === "GET" && url.pathname === "/api/v1/clauses/search") {
      const q = url.searchParams.get("q") ?? "";
      if (!q.trim()) return apiError(400, "MISSING_QUERY", "query parameter 'q' is required");
      const k = Number(url.searchParams.get("k") ?? "5");
      const minScore = Number(url.searchParams.get("min_score") ?? "0");
      const hits = this.clauses
        .map((clause) => {
          const mean =
            clause.ratings.length === 0
              ? 0
              : clause.ratings.reduce((a, b) => a + b, 0) / clause.ratings.length;
          return {
            clause_id: clause.clause_id,
            text: clause.text,
            raw_score: clause.raw,
            adjusted_score: clause.raw * (1 + FEEDBACK_ALPHA * mean),
          };
        })
        .filter((hit) => hit.raw_score >= minScore)
        .sort(
          (a, b) =>
            b.adjusted_score - a.adjusted_score || a.clause_id.localeCompare(b.clause_id),
        )
        .slice(0, k);
      return jsonResponse(200, hits);
    }

    return apiError(404, "NOT_FOUND", `no route for ${method} ${url.pathname}`);
  };

  private startRun(spec: RequirementSpec): string {
    const key = JSON.stringify(spec);
    let sowId = this.idsBySpec.get(key);
    const priorVersion = sowId ? this.runs.get(sowId)?.resource.draft?.version ?? 0 : 0;
    if (!sowId) {
      this.counter += 1;
      sowId = `sow-mock-${this.counter.toString().padStart(4, "0")}`;
      this.idsBySpec.set(key, sowId);
    }
    this.runs.set(sowId, {
      resource: this.buildResource(sowId, spec, priorVersion + 1),
      pollsLeft: this.pollsUntilReady,
    });
    return sowId;
  }

  private buildResource(sowId: string, spec: RequirementSpec, version: number): SowResource {
    const scopeBody = "The plan was approved by the client.";
    return {
      sow_id: sowId,
      status: "complete",
      draft: {
        sow_id: sowId,
        version,
        metadata: {
          project_title: spec.project_title,
          client: spec.client_name,
          vendor: spec.vendor_name,
          effective_date: spec.start_date,
          generated_at: `2024-01-01T00:00:0${version}+00:00`,
        },
        sections: [
          {
            id: "scope_of_work",
            key: "scope_of_work",
            title: "Scope of Work",
            body: scopeBody,
            provenance: [],
            order: 0,
          },
          {
            id: "confidentiality",
            key: "confidentiality",
            title: "Confidentiality",
            body: "Proprietary information stays confidential.",
            provenance: ["lib-conf-1"],
            order: 1,
          },
          {
            id: "payment_terms",
            key: "payment_terms",
            title: "payment terms",
            body: spec.payment_terms || "Net 30.",
            provenance: ["lib-pay-1"],
            order: 2,
          },
        ],
      },
      compliance: {
        findings: [
          { clause_key: "confidentiality", status: "strong", score: 1.0, section_id: "confidentiality" },
          { clause_key: "liability", status: "weak", score: 0.5, section_id: "payment_terms" },
          { clause_key: "termination", status: "missing", score: 0.0, section_id: null },
        ],
        issues: [
          {
            kind: "passive_voice",
            section_id: "scope_of_work",
            span: [scopeBody.indexOf("was approved"), scopeBody.indexOf("was approved") + "was approved".length],
            excerpt: "was approved",
          },
        ],
        field_checks: [
          { field: "project_title", present: true, detail: "present" },
          { field: "dates", present: true, detail: "present" },
          { field: "payment_terms", present: true, detail: "present" },
        ],
        overall: "warn",
      },
      validation: {
        issues: [
          { kind: "style", severity: "warning", locus: "payment_terms", detail: "heading 'payment terms' is not in title case" },
          { kind: "unaddressed_requirement", severity: "warning", locus: "document", detail: "special requirement 'GDPR handling' is not addressed by any section" },
        ],
        fixes_applied: ["retitled 'payment terms' to 'Payment Terms'"],
        verdict: "accept_with_fixes",
      },
      audit: [
        { stage: "ValidateInput", entered_at: "2024-01-01T00:00:00+00:00", outcome: "ok" },
        { stage: "RetrieveContext", entered_at: "2024-01-01T00:00:01+00:00", outcome: "2 clause(s) in context" },
        { stage: "Draft", entered_at: "2024-01-01T00:00:02+00:00", outcome: `draft v${version}` },
        { stage: "ComplianceReview", entered_at: "2024-01-01T00:00:03+00:00", outcome: "overall=warn" },
        { stage: "FormatValidate", entered_at: "2024-01-01T00:00:04+00:00", outcome: "verdict=accept_with_fixes" },
        { stage: "Emit", entered_at: "2024-01-01T00:00:05+00:00", outcome: `${sowId} v${version}` },
      ],
    };
  }
}

export function sampleSpec(): RequirementSpec {
  return {
    project_title: "Portal Rebuild",
    client_name: "Harbor Logistics Group",
    vendor_name: "Northwind Software Services",
    goals: "Rebuild the customer portal.",
    deliverables: [{ name: "Portal Release", description: "Production rollout", due_date: "2025-06-15" }],
    start_date: "2025-01-15",
    end_date: "2025-06-30",
    payment_terms: "Net 30.",
    special_requirements: ["GDPR handling"],
  };
}
