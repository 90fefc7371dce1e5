// Client-side mirror of the server's input validation, so obvious mistakes
// surface inline before any network call. The server stays authoritative.

import type { FieldError, RequirementSpec } from "./types.js";

const ISO_DATE = /^\d{4}-\d{2}-\d{2}$/;

function isIsoDate(value: string): boolean {
  if (!ISO_DATE.test(value)) return false;
  const time = Date.parse(`${value}T00:00:00Z`);
  if (Number.isNaN(time)) return false;
  return new Date(time).toISOString().slice(0, 10) === value;
}

export function validateSpec(spec: RequirementSpec): FieldError[] {
  const errors: FieldError[] = [];
  if (!spec.project_title.trim()) {
    errors.push({
      field: "project_title",
      code: "REQUIRED",
      message: "Project title is required.",
    });
  }
  if (spec.deliverables.length === 0) {
    errors.push({
      field: "deliverables",
      code: "REQUIRED",
      message: "Add at least one deliverable.",
    });
  }
  spec.deliverables.forEach((d, i) => {
    if (!d.name.trim()) {
      errors.push({
        field: `deliverables[${i}].name`,
        code: "REQUIRED",
        message: "Deliverable name is required.",
      });
    }
    if (d.due_date && !isIsoDate(d.due_date)) {
      errors.push({
        field: `deliverables[${i}].due_date`,
        code: "BAD_DATE",
        message: "Use an ISO date (YYYY-MM-DD).",
      });
    }
  });
  for (const field of ["start_date", "end_date"] as const) {
    const value = spec[field];
    if (!value.trim()) {
      errors.push({ field, code: "REQUIRED", message: "Date is required." });
    } else if (!isIsoDate(value)) {
      errors.push({ field, code: "BAD_DATE", message: "Use an ISO date (YYYY-MM-DD)." });
    }
  }
  if (
    isIsoDate(spec.start_date) &&
    isIsoDate(spec.end_date) &&
    spec.end_date < spec.start_date
  ) {
    errors.push({
      field: "end_date",
      code: "DATE_ORDER",
      message: "End date must not be earlier than the start date.",
    });
  }
  return errors;
}
