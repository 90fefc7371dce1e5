// Per-section rating widget (-1/0/+1 plus a comment) and the revision
// control. The widget locks while a rating is in flight and stays locked
// once the 204 lands.

import type { GatewayClient } from "../api.js";
import type { Rating, SowResource } from "../types.js";

export interface FeedbackEvents {
  onRated?: (sectionId: string, rating: Rating) => void;
  onRevision?: (resource: SowResource) => void;
  onError?: (message: string) => void;
}

export function renderFeedbackControls(
  client: GatewayClient,
  resource: SowResource,
  events: FeedbackEvents = {},
): HTMLElement {
  const root = document.createElement("div");
  root.className = "feedback-controls";

  for (const section of resource.draft?.sections ?? []) {
    const row = document.createElement("div");
    row.className = "feedback-row";
    row.dataset.sectionId = section.id;
    const label = document.createElement("span");
    label.textContent = section.title;
    row.append(label);

    const comment = document.createElement("input");
    comment.type = "text";
    comment.placeholder = "Optional comment";
    comment.className = "feedback-comment";

    const ratings: Rating[] = [-1, 0, 1];
    const buttons = ratings.map((rating) => {
      const button = document.createElement("button");
      button.type = "button";
      button.className = "rating-button";
      button.dataset.rating = String(rating);
      button.textContent = rating > 0 ? "+1" : String(rating);
      button.addEventListener("click", async () => {
        buttons.forEach((b) => (b.disabled = true));
        try {
          await client.postFeedback(resource.sow_id, {
            rating,
            section_id: section.id,
            comment: comment.value,
          });
          row.dataset.rated = String(rating);
          events.onRated?.(section.id, rating);
        } catch (error) {
          buttons.forEach((b) => (b.disabled = false));
          events.onError?.(error instanceof Error ? error.message : String(error));
        }
      });
      return button;
    });
    row.append(...buttons, comment);
    root.append(row);
  }

  return root;
}

export function renderRevisionControl(
  client: GatewayClient,
  resource: SowResource,
  currentSpec: () => Parameters<GatewayClient["createSow"]>[0],
  events: FeedbackEvents = {},
  pollOpts: { intervalMs?: number; timeoutMs?: number } = {},
): HTMLElement {
  const button = document.createElement("button");
  button.type = "button";
  button.className = "request-revision";
  button.textContent = "Request revision";
  button.addEventListener("click", async () => {
    button.disabled = true;
    try {
      const sowId = await client.createSow(currentSpec());
      const revised = await client.pollSow(sowId, pollOpts);
      events.onRevision?.(revised);
    } catch (error) {
      events.onError?.(error instanceof Error ? error.message : String(error));
    } finally {
      button.disabled = false;
    }
  });
  return button;
}
