/** Typed client for the assistlm JSON API.
 *
 * The demo performs no probability arithmetic of its own: every number it
 * shows on screen comes straight from these response bodies.  The fetch
 * implementation is injectable so tests can replay recorded wire traffic.
 */

export type KbValue = number | string | null;

export interface KbTuple {
  attribute: string;
  value: KbValue;
}

export interface Suggestion {
  word: string;
  probability: number;
  rank: number;
}

export interface PredictRequest {
  model_id: string;
  context_tokens: string[];
  kb: KbTuple[];
  k?: number;
}

export interface PredictResponse {
  model_id: string;
  ablation: { ignore_kb: boolean; ignore_values: boolean };
  suggestions: Suggestion[];
}

export interface CompleteRequest {
  model_id: string;
  context_tokens: string[];
  kb: KbTuple[];
  prefix: string;
}

export interface CompleteResponse {
  suggestion: string | null;
  probability: number | null;
}

export interface SubstitutionRequest {
  model_id: string;
  text: string;
  kb: KbTuple[];
  value_positions: Record<string, number[]>;
  slot_position: number;
  candidates: string[];
  configurations: Record<string, number>[];
}

export interface SubstitutionRow {
  configuration: Record<string, number>;
  probabilities: Record<string, number>;
  slot_probabilities: Record<string, number>;
}

export interface SubstitutionGrid {
  slot_position: number;
  candidates: string[];
  rows: SubstitutionRow[];
}

export interface ModelInfo {
  model_id: string;
  variant: string;
  conditional: boolean;
  grounded: boolean;
  hidden_dim: number;
  vocab_size: number;
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

/** Non-2xx response, carrying the service's field diagnostics when present. */
export class ApiError extends Error {
  constructor(message: string, readonly status: number) {
    super(message);
    this.name = "ApiError";
  }
}

function describeDetail(detail: unknown): string {
  if (typeof detail === "string") return detail;
  if (Array.isArray(detail)) {
    return detail
      .map((d) => {
        const item = d as { field?: string; message?: string };
        return item.field ? `${item.field}: ${item.message ?? ""}` : String(d);
      })
      .join("; ");
  }
  return JSON.stringify(detail);
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  models(): Promise<ModelInfo[]> {
    return this.request<ModelInfo[]>("GET", "/v1/models");
  }

  predict(body: PredictRequest): Promise<PredictResponse> {
    return this.request<PredictResponse>("POST", "/v1/predict", body);
  }

  complete(body: CompleteRequest): Promise<CompleteResponse> {
    return this.request<CompleteResponse>("POST", "/v1/complete", body);
  }

  substitution(body: SubstitutionRequest): Promise<SubstitutionGrid> {
    return this.request<SubstitutionGrid>("POST", "/v1/substitution", body);
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: { "content-type": "application/json" } };
    if (body !== undefined) init.body = JSON.stringify(body);
    const resp = await this.fetchFn(this.baseUrl + path, init);
    if (!resp.ok) {
      let message = `${method} ${path} failed with status ${resp.status}`;
      try {
        const payload = (await resp.json()) as { detail?: unknown };
        if (payload.detail !== undefined) message = describeDetail(payload.detail);
      } catch {
        // no JSON body; keep the generic message
      }
      throw new ApiError(message, resp.status);
    }
    return (await resp.json()) as T;
  }
}
