// Thin fetch client for the gateway. Every non-2xx body is one ApiErrorBody;
// ApiError carries it so views can map field_errors back onto inputs.

import type {
  ApiErrorBody,
  ClauseHit,
  FeedbackBody,
  RequirementSpec,
  SowResource,
} from "./types.js";

export class ApiError extends Error {
  readonly status: number;
  readonly body: ApiErrorBody;

  constructor(status: number, body: ApiErrorBody) {
    super(body.message || `HTTP ${status}`);
    this.status = status;
    this.body = body;
  }
}

export type FetchFn = (input: string, init?: RequestInit) => Promise<Response>;

async function errorBody(response: Response): Promise<ApiErrorBody> {
  try {
    return (await response.json()) as ApiErrorBody;
  } catch {
    return { code: "UNREADABLE", message: `HTTP ${response.status}`, field_errors: [] };
  }
}

export class GatewayClient {
  readonly baseUrl: string;
  private readonly fetchFn: FetchFn;

  constructor(baseUrl = "", fetchFn?: FetchFn) {
    this.baseUrl = baseUrl.replace(/\/$/, "");
    this.fetchFn = fetchFn ?? ((input, init) => globalThis.fetch(input, init));
  }

  private async request(path: string, init?: RequestInit): Promise<Response> {
    const response = await this.fetchFn(this.baseUrl + path, init);
    if (!response.ok) {
      throw new ApiError(response.status, await errorBody(response));
    }
    return response;
  }

  async createSow(spec: RequirementSpec): Promise<string> {
    const response = await this.request("/api/v1/sow", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(spec),
    });
    const body = (await response.json()) as { sow_id: string };
    return body.sow_id;
  }

  async getSow(sowId: string): Promise<SowResource> {
    const response = await this.request(`/api/v1/sow/${encodeURIComponent(sowId)}`);
    return (await response.json()) as SowResource;
  }

  /** Poll until the run leaves "processing"; resolves with the settled resource. */
  async pollSow(
    sowId: string,
    opts: { intervalMs?: number; timeoutMs?: number; backoff?: number } = {},
  ): Promise<SowResource> {
    const intervalMs = opts.intervalMs ?? 1000;
    const timeoutMs = opts.timeoutMs ?? 120_000;
    const backoff = opts.backoff ?? 1.25;
    const deadline = Date.now() + timeoutMs;
    let wait = intervalMs;
    for (;;) {
      const resource = await this.getSow(sowId);
      if (resource.status !== "processing") return resource;
      if (Date.now() + wait > deadline) {
        throw new Error(`run ${sowId} still processing after ${timeoutMs}ms`);
      }
      await new Promise((resolve) => setTimeout(resolve, wait));
      wait = Math.min(wait * backoff, 10_000);
    }
  }

  async postFeedback(sowId: string, feedback: FeedbackBody): Promise<void> {
    await this.request(`/api/v1/sow/${encodeURIComponent(sowId)}/feedback`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(feedback),
    });
  }

  async searchClauses(q: string, k = 10, minScore = 0): Promise<ClauseHit[]> {
    const params = new URLSearchParams({
      q,
      k: String(k),
      min_score: String(minScore),
    });
    const response = await this.request(`/api/v1/clauses/search?${params}`);
    return (await response.json()) as ClauseHit[];
  }
}
