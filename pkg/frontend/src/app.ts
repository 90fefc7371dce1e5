// Console shell: the form -> draft -> review -> feedback workflow plus the
// clause explorer tab. All state lives server-side; a reload rebuilds the
// same view from GET endpoints.

import { ApiError, GatewayClient } from "./api.js";
import { createExplorer } from "./views/explorer.js";
import { renderFeedbackControls, renderRevisionControl } from "./views/feedback.js";
import { createForm } from "./views/form.js";
import { renderReview } from "./views/review.js";
import type { RequirementSpec, SowResource } from "./types.js";

export interface AppOptions {
  client?: GatewayClient;
  pollIntervalMs?: number;
  pollTimeoutMs?: number;
}

export interface AppHandles {
  root: HTMLElement;
  client: GatewayClient;
  submitSpec(spec: RequirementSpec): Promise<SowResource>;
  currentResource(): SowResource | null;
  showTab(name: "draft" | "explorer"): void;
}

export function createApp(options: AppOptions = {}): AppHandles {
  const client = options.client ?? new GatewayClient("");
  const pollOpts = {
    intervalMs: options.pollIntervalMs ?? 1000,
    timeoutMs: options.pollTimeoutMs ?? 180_000,
  };

  const root = document.createElement("div");
  root.className = "sowgen-console";

  const tabs = document.createElement("nav");
  const draftTab = document.createElement("button");
  draftTab.textContent = "Draft";
  draftTab.dataset.tab = "draft";
  const explorerTab = document.createElement("button");
  explorerTab.textContent = "Clause explorer";
  explorerTab.dataset.tab = "explorer";
  tabs.append(draftTab, explorerTab);

  const banner = document.createElement("div");
  banner.className = "app-banner";
  banner.hidden = true;

  const draftPane = document.createElement("div");
  draftPane.className = "pane pane-draft";
  const explorerPane = document.createElement("div");
  explorerPane.className = "pane pane-explorer";
  explorerPane.hidden = true;

  const form = createForm();
  const statusLine = document.createElement("p");
  statusLine.className = "status-line";
  const reviewMount = document.createElement("div");
  reviewMount.className = "review-mount";
  const previousMount = document.createElement("div");
  previousMount.className = "previous-version";
  const versionRow = document.createElement("div");
  versionRow.className = "version-row";
  versionRow.append(reviewMount, previousMount);
  draftPane.append(form.root, statusLine, versionRow);

  const explorer = createExplorer(client);
  explorerPane.append(explorer.root);

  root.append(tabs, banner, draftPane, explorerPane);

  let current: SowResource | null = null;
  let lastSpec: RequirementSpec | null = null;

  function fail(message: string): void {
    banner.hidden = false;
    banner.textContent = message;
  }

  function renderResource(resource: SowResource): void {
    banner.hidden = true;
    const prior = current;
    current = resource;
    reviewMount.replaceChildren(renderReview(resource));
    if (prior && prior.draft && resource.draft && prior.draft.version !== resource.draft.version) {
      // Side-by-side compare of the prior version.
      previousMount.replaceChildren(renderReview(prior));
    } else {
      previousMount.replaceChildren();
    }
    if (resource.status === "complete" && resource.draft) {
      reviewMount.append(
        renderFeedbackControls(client, resource, { onError: fail }),
        renderRevisionControl(
          client,
          resource,
          () => {
            if (!lastSpec) throw new Error("no requirement input on record");
            return lastSpec;
          },
          { onRevision: renderResource, onError: fail },
          pollOpts,
        ),
      );
    }
  }

  async function submitSpec(spec: RequirementSpec): Promise<SowResource> {
    lastSpec = spec;
    statusLine.textContent = "Submitting…";
    try {
      const sowId = await client.createSow(spec);
      statusLine.textContent = `Processing ${sowId}…`;
      const resource = await client.pollSow(sowId, pollOpts);
      statusLine.textContent =
        resource.status === "complete" ? "Draft ready." : "Run failed; see audit trail.";
      renderResource(resource);
      return resource;
    } catch (error) {
      if (error instanceof ApiError && error.body.field_errors.length > 0) {
        form.showErrors(error.body.field_errors);
        statusLine.textContent = "Fix the highlighted fields.";
      } else {
        fail(error instanceof Error ? error.message : String(error));
        statusLine.textContent = "";
      }
      throw error;
    }
  }

  form.onSubmit((spec) => {
    void submitSpec(spec).catch(() => undefined);
  });

  function showTab(name: "draft" | "explorer"): void {
    draftPane.hidden = name !== "draft";
    explorerPane.hidden = name !== "explorer";
  }

  draftTab.addEventListener("click", () => showTab("draft"));
  explorerTab.addEventListener("click", () => showTab("explorer"));

  return {
    root,
    client,
    submitSpec,
    currentResource: () => current,
    showTab,
  };
}
