import { describe, expect, it, vi } from "vitest";

import { GatewayClient } from "../src/api.js";
import { createApp } from "../src/app.js";
import { createForm } from "../src/views/form.js";
import { MockGateway, sampleSpec } from "./mockGateway.js";

function fillForm(form: ReturnType<typeof createForm>, overrides = {}) {
  form.setSpec({ ...sampleSpec(), ...overrides });
}

function submit(form: ReturnType<typeof createForm>) {
  form.root.dispatchEvent(new Event("submit", { bubbles: true, cancelable: true }));
}

describe("new-sow form", () => {
  it("valid form produces the spec payload", () => {
    const form = createForm();
    fillForm(form);
    const seen: unknown[] = [];
    form.onSubmit((spec) => seen.push(spec));
    submit(form);
    expect(seen).toHaveLength(1);
    expect(seen[0]).toEqual(sampleSpec());
  });

  it("empty title shows an inline error and makes no network call", () => {
    const fetchSpy = vi.fn();
    const client = new GatewayClient("", fetchSpy);
    const app = createApp({ client, pollIntervalMs: 1 });
    document.body.append(app.root);
    const form = app.root.querySelector("form.sow-form")!;
    // Leave every field blank and submit.
    form.dispatchEvent(new Event("submit", { bubbles: true, cancelable: true }));
    const slot = app.root.querySelector('[data-error-for="project_title"]');
    expect(slot?.textContent).toContain("required");
    expect(fetchSpy).not.toHaveBeenCalled();
    app.root.remove();
  });

  it("server 400 lands on the same field", async () => {
    const gateway = new MockGateway();
    const client = new GatewayClient("", gateway.fetch);
    const app = createApp({ client, pollIntervalMs: 1, pollTimeoutMs: 500 });
    document.body.append(app.root);
    // Bypass the client-side mirror to exercise the server mapping.
    await expect(
      app.submitSpec({ ...sampleSpec(), project_title: "" }),
    ).rejects.toThrowError();
    const slot = app.root.querySelector('[data-error-for="project_title"]');
    expect(slot?.textContent).toContain("project_title must not be empty");
    app.root.remove();
  });
});
