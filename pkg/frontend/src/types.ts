/** Wire types of the recommendation service HTTP contract. */

export interface ServiceInfo {
  id: string;
  name: string;
}

export interface EdgeInfo {
  source: string;
  sink: string;
}

export interface SessionState {
  session_id: string;
  goal: string;
  services: ServiceInfo[];
  edges: EdgeInfo[];
}

export interface Candidate {
  service_id: string;
  name: string;
  probability: number;
}

export interface RecommendResponse {
  anchor_id: string;
  k: number;
  candidates: Candidate[];
}

export interface ApiErrorBody {
  detail: unknown;
  cycle?: string[];
}

/** Error carrying the HTTP status so callers can branch on 404/422. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly body: ApiErrorBody,
    message?: string,
  ) {
    super(message ?? `request failed with status ${status}`);
  }

  get cycle(): string[] {
    return this.body.cycle ?? [];
  }
}
