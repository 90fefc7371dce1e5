// Derivations from the report payloads into per-section display flags.
// Every flag points back at exactly one report entry (its `source`); the
// console invents nothing client-side.

import type {
  ClauseFinding,
  ComplianceReport,
  LanguageIssue,
  SowResource,
  ValidationIssue,
} from "./types.js";

export interface ClauseBadge {
  sectionId: string;
  label: string; // e.g. "confidentiality: strong (1.00)"
  status: ClauseFinding["status"];
  source: ClauseFinding;
}

export interface DocumentBanner {
  label: string;
  source: ClauseFinding | ValidationIssue;
}

export interface LintUnderline {
  sectionId: string;
  span: [number, number];
  excerpt: string;
  kind: LanguageIssue["kind"];
  source: LanguageIssue;
}

export interface PanelGroup {
  kind: string;
  entries: { detail: string; locus: string; severity: string; source: ValidationIssue }[];
}

export interface DraftFlags {
  badges: ClauseBadge[];
  banners: DocumentBanner[];
  underlines: LintUnderline[];
  panel: PanelGroup[];
}

export function clauseBadges(report: ComplianceReport): ClauseBadge[] {
  return report.findings
    .filter((f): f is ClauseFinding & { section_id: string } => f.section_id !== null)
    .map((finding) => ({
      sectionId: finding.section_id,
      label: `${finding.clause_key}: ${finding.status} (${finding.score.toFixed(2)})`,
      status: finding.status,
      source: finding,
    }));
}

export function documentBanners(resource: SowResource): DocumentBanner[] {
  const banners: DocumentBanner[] = [];
  for (const finding of resource.compliance?.findings ?? []) {
    if (finding.section_id === null) {
      banners.push({
        label: `Clause missing: ${finding.clause_key}`,
        source: finding,
      });
    }
  }
  for (const issue of resource.validation?.issues ?? []) {
    if (issue.locus === "document" && issue.severity === "error") {
      banners.push({ label: issue.detail, source: issue });
    }
  }
  return banners;
}

export function lintUnderlines(report: ComplianceReport): Map<string, LintUnderline[]> {
  const bySection = new Map<string, LintUnderline[]>();
  for (const issue of report.issues) {
    const list = bySection.get(issue.section_id) ?? [];
    list.push({
      sectionId: issue.section_id,
      span: issue.span,
      excerpt: issue.excerpt,
      kind: issue.kind,
      source: issue,
    });
    bySection.set(issue.section_id, list);
  }
  for (const list of bySection.values()) {
    list.sort((a, b) => a.span[0] - b.span[0]);
  }
  return bySection;
}

export function panelGroups(issues: ValidationIssue[]): PanelGroup[] {
  const byKind = new Map<string, PanelGroup>();
  for (const issue of issues) {
    const group = byKind.get(issue.kind) ?? { kind: issue.kind, entries: [] };
    group.entries.push({
      detail: issue.detail,
      locus: issue.locus,
      severity: issue.severity,
      source: issue,
    });
    byKind.set(issue.kind, group);
  }
  return [...byKind.values()];
}

export function deriveFlags(resource: SowResource): DraftFlags {
  const compliance = resource.compliance ?? {
    findings: [],
    issues: [],
    field_checks: [],
    overall: "pass" as const,
  };
  return {
    badges: clauseBadges(compliance),
    banners: documentBanners(resource),
    underlines: [...lintUnderlines(compliance).values()].flat(),
    panel: panelGroups(resource.validation?.issues ?? []),
  };
}

/** Every derived flag must trace to a report entry; used by tests and as a
 * runtime guard before rendering. */
export function allFlagsTraceable(resource: SowResource, flags: DraftFlags): boolean {
  const findings = new Set<object>(resource.compliance?.findings ?? []);
  const lints = new Set<object>(resource.compliance?.issues ?? []);
  const validations = new Set<object>(resource.validation?.issues ?? []);
  return (
    flags.badges.every((b) => findings.has(b.source)) &&
    flags.underlines.every((u) => lints.has(u.source)) &&
    flags.banners.every((b) => findings.has(b.source) || validations.has(b.source)) &&
    flags.panel.every((g) => g.entries.every((e) => validations.has(e.source)))
  );
}
