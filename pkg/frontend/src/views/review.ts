// Draft review: sections in order with clause badges, lint underlines on the
// exact flagged spans, a validation side panel grouped by kind, and the audit
// trail. Rendering refuses flags that do not trace back to a report entry.

import { allFlagsTraceable, deriveFlags, lintUnderlines } from "../flags.js";
import type { LintUnderline } from "../flags.js";
import type { SowResource } from "../types.js";

function renderBodyWithUnderlines(body: string, underlines: LintUnderline[]): HTMLElement {
  const container = document.createElement("p");
  container.className = "section-body";
  let cursor = 0;
  for (const underline of underlines) {
    const [start, end] = underline.span;
    if (start > cursor) {
      container.append(document.createTextNode(body.slice(cursor, start)));
    }
    const u = document.createElement("u");
    u.className = `lint lint-${underline.kind}`;
    u.dataset.kind = underline.kind;
    u.textContent = body.slice(start, end);
    container.append(u);
    cursor = end;
  }
  if (cursor < body.length) {
    container.append(document.createTextNode(body.slice(cursor)));
  }
  return container;
}

export function renderReview(resource: SowResource): HTMLElement {
  const root = document.createElement("article");
  root.className = "draft-review";
  root.dataset.status = resource.status;

  const flags = deriveFlags(resource);
  if (!allFlagsTraceable(resource, flags)) {
    throw new Error("derived flags do not all trace back to report entries");
  }

  const heading = document.createElement("header");
  const title = document.createElement("h2");
  title.textContent = resource.draft?.metadata.project_title ?? resource.sow_id;
  const version = document.createElement("span");
  version.className = "version-badge";
  version.textContent = resource.draft ? `v${resource.draft.version}` : resource.status;
  const verdict = document.createElement("span");
  verdict.className = "verdict";
  verdict.textContent = resource.validation ? resource.validation.verdict : "";
  heading.append(title, version, verdict);
  root.append(heading);

  for (const banner of flags.banners) {
    const el = document.createElement("div");
    el.className = "document-banner";
    el.textContent = banner.label;
    root.append(el);
  }

  const underlineMap = resource.compliance
    ? lintUnderlines(resource.compliance)
    : new Map<string, LintUnderline[]>();

  const sections = document.createElement("div");
  sections.className = "sections";
  const ordered = [...(resource.draft?.sections ?? [])].sort((a, b) => a.order - b.order);
  for (const section of ordered) {
    const el = document.createElement("section");
    el.dataset.sectionId = section.id;
    const h3 = document.createElement("h3");
    h3.textContent = `${section.order + 1}. ${section.title}`;
    el.append(h3);
    for (const badge of flags.badges.filter((b) => b.sectionId === section.id)) {
      const b = document.createElement("mark");
      b.className = `clause-badge clause-${badge.status}`;
      b.dataset.status = badge.status;
      b.textContent = badge.label;
      el.append(b);
    }
    el.append(renderBodyWithUnderlines(section.body, underlineMap.get(section.id) ?? []));
    sections.append(el);
  }
  root.append(sections);

  const panel = document.createElement("aside");
  panel.className = "validation-panel";
  for (const group of flags.panel) {
    const box = document.createElement("div");
    box.className = "issue-group";
    box.dataset.kind = group.kind;
    const h4 = document.createElement("h4");
    h4.textContent = group.kind;
    box.append(h4);
    const list = document.createElement("ul");
    for (const entry of group.entries) {
      const item = document.createElement("li");
      item.dataset.severity = entry.severity;
      item.textContent = `${entry.detail} (${entry.locus})`;
      list.append(item);
    }
    box.append(list);
    panel.append(box);
  }
  if (resource.validation && resource.validation.fixes_applied.length > 0) {
    const fixes = document.createElement("div");
    fixes.className = "fixes-applied";
    const h4 = document.createElement("h4");
    h4.textContent = "Fixes applied";
    const list = document.createElement("ul");
    for (const fix of resource.validation.fixes_applied) {
      const item = document.createElement("li");
      item.textContent = fix;
      list.append(item);
    }
    fixes.append(h4, list);
    panel.append(fixes);
  }
  root.append(panel);

  const audit = document.createElement("details");
  audit.className = "audit-trail";
  const summary = document.createElement("summary");
  summary.textContent = "Audit trail";
  audit.append(summary);
  const auditList = document.createElement("ol");
  for (const entry of resource.audit) {
    const item = document.createElement("li");
    item.dataset.stage = entry.stage;
    item.textContent = `${entry.stage} @ ${entry.entered_at}: ${entry.outcome}`;
    auditList.append(item);
  }
  audit.append(auditList);
  root.append(audit);

  return root;
}
