/** Thin typed client over the session routes. No model logic lives here. */

import {
  ApiError,
  Candidate,
  RecommendResponse,
  ServiceInfo,
  SessionState,
} from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
    private readonly baseUrl: string = "",
  ) {}

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
    signal?: AbortSignal,
  ): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path, {
      method,
      headers: body === undefined ? undefined : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
      signal,
    });
    if (!response.ok) {
      let parsed: unknown = {};
      try {
        parsed = await response.json();
      } catch {
        parsed = { detail: response.statusText };
      }
      throw new ApiError(response.status, parsed as { detail: unknown; cycle?: string[] });
    }
    return (await response.json()) as T;
  }

  listServices(): Promise<ServiceInfo[]> {
    return this.request<ServiceInfo[]>("GET", "/services");
  }

  async createSession(goal: string): Promise<string> {
    const body = await this.request<{ session_id: string }>("POST", "/sessions", { goal });
    return body.session_id;
  }

  getSession(sessionId: string): Promise<SessionState> {
    return this.request<SessionState>("GET", `/sessions/${sessionId}`);
  }

  addService(
    sessionId: string,
    serviceId: string,
    sourceId?: string,
  ): Promise<SessionState> {
    const body: { service_id: string; source_id?: string } = { service_id: serviceId };
    if (sourceId !== undefined) body.source_id = sourceId;
    return this.request<SessionState>("POST", `/sessions/${sessionId}/services`, body);
  }

  recommend(
    sessionId: string,
    anchorId: string,
    k: number,
    signal?: AbortSignal,
  ): Promise<Candidate[]> {
    return this.request<RecommendResponse>(
      "POST",
      `/sessions/${sessionId}/recommend`,
      { anchor_id: anchorId, k },
      signal,
    ).then((body) => body.candidates);
  }
}
