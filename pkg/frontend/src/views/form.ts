// New-SOW form. Required-field validation mirrors the server rules and runs
// before any request; server 400s land on the same fields.

import type { FieldError, RequirementSpec } from "../types.js";
import { validateSpec } from "../validate.js";

export interface FormHandles {
  root: HTMLElement;
  readSpec(): RequirementSpec;
  setSpec(spec: RequirementSpec): void;
  showErrors(errors: FieldError[]): void;
  clearErrors(): void;
  onSubmit(handler: (spec: RequirementSpec) => void): void;
}

interface FieldDef {
  name: string;
  label: string;
  kind: "input" | "textarea";
}

const FIELDS: FieldDef[] = [
  { name: "project_title", label: "Project title", kind: "input" },
  { name: "client_name", label: "Client", kind: "input" },
  { name: "vendor_name", label: "Vendor", kind: "input" },
  { name: "goals", label: "Goals", kind: "textarea" },
  { name: "start_date", label: "Start date (YYYY-MM-DD)", kind: "input" },
  { name: "end_date", label: "End date (YYYY-MM-DD)", kind: "input" },
  { name: "payment_terms", label: "Payment terms", kind: "input" },
  { name: "deliverables", label: "Deliverables (one per line: name | description | due date)", kind: "textarea" },
  { name: "special_requirements", label: "Special requirements (one per line)", kind: "textarea" },
];

function parseDeliverables(raw: string) {
  return raw
    .split("\n")
    .map((line) => line.trim())
    .filter(Boolean)
    .map((line) => {
      const [name = "", description = "", due = ""] = line.split("|").map((p) => p.trim());
      return { name, description, due_date: due || null };
    });
}

function serializeDeliverables(spec: RequirementSpec): string {
  return spec.deliverables
    .map((d) => [d.name, d.description, d.due_date ?? ""].join(" | "))
    .join("\n");
}

export function createForm(): FormHandles {
  const root = document.createElement("form");
  root.className = "sow-form";
  root.noValidate = true;

  const controls = new Map<string, HTMLInputElement | HTMLTextAreaElement>();
  const errorSlots = new Map<string, HTMLElement>();

  for (const field of FIELDS) {
    const row = document.createElement("label");
    row.className = "form-row";
    row.dataset.field = field.name;
    const caption = document.createElement("span");
    caption.textContent = field.label;
    const control = document.createElement(field.kind) as HTMLInputElement | HTMLTextAreaElement;
    control.name = field.name;
    const slot = document.createElement("em");
    slot.className = "field-error";
    slot.dataset.errorFor = field.name;
    row.append(caption, control, slot);
    root.append(row);
    controls.set(field.name, control);
    errorSlots.set(field.name, slot);
  }

  const submit = document.createElement("button");
  submit.type = "submit";
  submit.textContent = "Generate draft";
  root.append(submit);

  function readSpec(): RequirementSpec {
    const value = (name: string) => controls.get(name)?.value ?? "";
    return {
      project_title: value("project_title"),
      client_name: value("client_name"),
      vendor_name: value("vendor_name"),
      goals: value("goals"),
      deliverables: parseDeliverables(value("deliverables")),
      start_date: value("start_date"),
      end_date: value("end_date"),
      payment_terms: value("payment_terms"),
      special_requirements: value("special_requirements")
        .split("\n")
        .map((line) => line.trim())
        .filter(Boolean),
    };
  }

  function clearErrors(): void {
    for (const slot of errorSlots.values()) slot.textContent = "";
  }

  function showErrors(errors: FieldError[]): void {
    clearErrors();
    for (const error of errors) {
      // deliverables[2].name lands on the deliverables block.
      const base = error.field.split(/[[.]/)[0];
      const slot = errorSlots.get(base);
      if (slot) {
        slot.textContent = slot.textContent
          ? `${slot.textContent} ${error.message}`
          : error.message;
      }
    }
  }

  let submitHandler: ((spec: RequirementSpec) => void) | null = null;
  root.addEventListener("submit", (event) => {
    event.preventDefault();
    const spec = readSpec();
    const errors = validateSpec(spec);
    if (errors.length > 0) {
      showErrors(errors); // no network call on local failure
      return;
    }
    clearErrors();
    submitHandler?.(spec);
  });

  return {
    root,
    readSpec,
    setSpec(spec: RequirementSpec) {
      controls.get("project_title")!.value = spec.project_title;
      controls.get("client_name")!.value = spec.client_name;
      controls.get("vendor_name")!.value = spec.vendor_name;
      controls.get("goals")!.value = spec.goals;
      controls.get("start_date")!.value = spec.start_date;
      controls.get("end_date")!.value = spec.end_date;
      controls.get("payment_terms")!.value = spec.payment_terms;
      controls.get("deliverables")!.value = serializeDeliverables(spec);
      controls.get("special_requirements")!.value = spec.special_requirements.join("\n");
    },
    showErrors,
    clearErrors,
    onSubmit(handler) {
      submitHandler = handler;
    },
  };
}
