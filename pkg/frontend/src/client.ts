// Thin fetch wrapper around the moderation API. Decision posts never throw
// for the expected moderation outcomes (conflict, refusal, missing item);
// those come back as tagged variants so the UI can react to each one.

import type {
  DecisionRequest,
  ItemDetail,
  QueueKind,
  QueueResponse,
  Stats,
} from "./types.js";

export type DecisionOutcome =
  | { kind: "ok"; item: ItemDetail }
  | { kind: "conflict"; expectedRevision: number; currentRevision: number }
  | { kind: "refused"; message: string }
  | { kind: "missing"; message: string };

export class ApiError extends Error {
  readonly status: number;

  constructor(status: number, message: string) {
    super(message);
    this.name = "ApiError";
    this.status = status;
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

function errorMessage(body: unknown, status: number): string {
  if (body !== null && typeof body === "object") {
    const err = (body as { error?: unknown }).error;
    if (typeof err === "string") return err;
    const detail = (body as { detail?: unknown }).detail;
    if (detail !== undefined) return JSON.stringify(detail);
  }
  return `request failed with status ${status}`;
}

async function readJson(response: Response): Promise<unknown> {
  try {
    return await response.json();
  } catch {
    return null;
  }
}

export class ApiClient {
  private readonly baseUrl: string;
  private readonly fetchFn: FetchLike;

  // fetch is wrapped so the default keeps its global receiver in browsers
  constructor(baseUrl = "", fetchFn: FetchLike = (input, init) => fetch(input, init)) {
    this.baseUrl = baseUrl;
    this.fetchFn = fetchFn;
  }

  private async getJson<T>(path: string): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path);
    const body = await readJson(response);
    if (!response.ok) {
      throw new ApiError(response.status, errorMessage(body, response.status));
    }
    return body as T;
  }

  health(): Promise<{ status: string }> {
    return this.getJson("/api/health");
  }

  stats(): Promise<Stats> {
    return this.getJson("/api/stats");
  }

  queue(kind: QueueKind, limit = 50): Promise<QueueResponse> {
    return this.getJson(`/api/queue?kind=${kind}&limit=${limit}`);
  }

  item(id: string): Promise<ItemDetail> {
    return this.getJson(`/api/items/${encodeURIComponent(id)}`);
  }

  async decide(id: string, request: DecisionRequest): Promise<DecisionOutcome> {
    const url = `${this.baseUrl}/api/items/${encodeURIComponent(id)}/decision`;
    const response = await this.fetchFn(url, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(request),
    });
    const body = await readJson(response);
    if (response.ok) {
      return { kind: "ok", item: body as ItemDetail };
    }
    if (response.status === 409) {
      const conflict = body as { expected_revision: number; current_revision: number };
      return {
        kind: "conflict",
        expectedRevision: conflict.expected_revision,
        currentRevision: conflict.current_revision,
      };
    }
    if (response.status === 404) {
      return { kind: "missing", message: errorMessage(body, 404) };
    }
    if (response.status === 422) {
      return { kind: "refused", message: errorMessage(body, 422) };
    }
    throw new ApiError(response.status, errorMessage(body, response.status));
  }
}
