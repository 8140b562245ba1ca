/** In-memory implementation of the recommendation service HTTP contract.

Mirrors the real service's semantics: session registry, 404 for unknown
sessions/services, 422 with the offending cycle for duplicate or
cycle-closing edges, ranked candidates that exclude composed services.
Request counts are recorded so tests can assert how many recommend calls
an interaction triggered.
*/

import type { FetchLike } from "../src/api.js";
import type { Candidate, EdgeInfo, ServiceInfo } from "../src/types.js";

interface FakeSession {
  id: string;
  goal: string;
  services: string[];
  edges: EdgeInfo[];
}

function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

export class FakeServer {
  readonly sessions = new Map<string, FakeSession>();
  recommendCalls: { session: string; anchor: string; k: number }[] = [];
  failNextRecommend = false;
  private serial = 0;

  constructor(readonly vocabulary: ServiceInfo[]) {}

  get fetch(): FetchLike {
    return async (input, init) => this.dispatch(input, init);
  }

  state(sessionId: string) {
    const session = this.sessions.get(sessionId);
    if (!session) throw new Error(`no session ${sessionId}`);
    return {
      session_id: session.id,
      goal: session.goal,
      services: session.services.map(
        (id) => this.vocabulary.find((s) => s.id === id) ?? { id, name: id },
      ),
      edges: session.edges.map((e) => ({ ...e })),
    };
  }

  /** Deterministic ranking: fixed per-service weights, composed excluded. */
  private candidates(session: FakeSession, k: number): Candidate[] {
    const eligible = this.vocabulary.filter((s) => !session.services.includes(s.id));
    const weights = eligible.map((s, index) => ({
      service: s,
      weight: 1.0 / (index + 2),
    }));
    const total = this.vocabulary.length + 1;
    return weights
      .sort((a, b) => b.weight - a.weight || a.service.id.localeCompare(b.service.id))
      .slice(0, k)
      .map(({ service, weight }) => ({
        service_id: service.id,
        name: service.name,
        probability: weight / total,
      }));
  }

  private findCycle(services: string[], edges: EdgeInfo[]): string[] | null {
    const adjacency = new Map<string, string[]>(services.map((s) => [s, []]));
    for (const e of edges) adjacency.get(e.source)?.push(e.sink);
    const color = new Map<string, number>();
    const path: string[] = [];
    const visit = (node: string): string[] | null => {
      color.set(node, 1);
      path.push(node);
      for (const next of adjacency.get(node) ?? []) {
        if (color.get(next) === 1) return path.slice(path.indexOf(next));
        if (!color.has(next)) {
          const found = visit(next);
          if (found) return found;
        }
      }
      color.set(node, 2);
      path.pop();
      return null;
    };
    for (const s of services) {
      if (!color.has(s)) {
        const found = visit(s);
        if (found) return found;
      }
    }
    return null;
  }

  private dispatch(url: string, init?: RequestInit): Response {
    const method = init?.method ?? "GET";
    const body = init?.body ? JSON.parse(String(init.body)) : {};

    if (method === "GET" && url === "/services") {
      return jsonResponse(200, this.vocabulary);
    }
    if (method === "POST" && url === "/sessions") {
      const session: FakeSession = {
        id: `fake-${this.serial++}`,
        goal: String(body.goal ?? ""),
        services: [],
        edges: [],
      };
      this.sessions.set(session.id, session);
      return jsonResponse(200, { session_id: session.id });
    }

    const sessionMatch = url.match(/^\/sessions\/([^/]+)(\/.*)?$/);
    if (!sessionMatch) return jsonResponse(404, { detail: "no route" });
    const session = this.sessions.get(sessionMatch[1]);
    if (!session) return jsonResponse(404, { detail: "unknown session" });
    const rest = sessionMatch[2] ?? "";

    if (method === "GET" && rest === "") {
      return jsonResponse(200, this.state(session.id));
    }

    if (method === "POST" && rest === "/services") {
      const serviceId = String(body.service_id ?? "");
      const sourceId = body.source_id === undefined ? undefined : String(body.source_id);
      if (!this.vocabulary.some((s) => s.id === serviceId)) {
        return jsonResponse(404, { detail: `unknown service '${serviceId}'` });
      }
      const exists = session.services.includes(serviceId);
      if (sourceId === undefined) {
        if (exists) {
          return jsonResponse(422, { detail: `service '${serviceId}' is already composed` });
        }
        session.services.push(serviceId);
        return jsonResponse(200, this.state(session.id));
      }
      if (!session.services.includes(sourceId)) {
        return jsonResponse(404, { detail: `source service '${sourceId}' is not composed` });
      }
      if (session.edges.some((e) => e.source === sourceId && e.sink === serviceId)) {
        return jsonResponse(422, {
          detail: `edge ${sourceId} -> ${serviceId} already exists`,
        });
      }
      const services = exists ? session.services : [...session.services, serviceId];
      const edges = [...session.edges, { source: sourceId, sink: serviceId }];
      const cycle = this.findCycle(services, edges);
      if (cycle) {
        return jsonResponse(422, {
          detail: `edge would close a cycle: [${cycle.join(",")}]`,
          cycle,
        });
      }
      session.services = services;
      session.edges = edges;
      return jsonResponse(200, this.state(session.id));
    }

    if (method === "POST" && rest === "/recommend") {
      const anchor = String(body.anchor_id ?? "");
      const k = Number(body.k ?? 5);
      this.recommendCalls.push({ session: session.id, anchor, k });
      if (this.failNextRecommend) {
        this.failNextRecommend = false;
        return jsonResponse(500, { detail: "injected failure" });
      }
      if (!session.services.includes(anchor)) {
        return jsonResponse(404, { detail: `anchor '${anchor}' is not composed` });
      }
      return jsonResponse(200, {
        anchor_id: anchor,
        k,
        candidates: this.candidates(session, k),
      });
    }

    return jsonResponse(404, { detail: "no route" });
  }
}

export function makeVocabulary(n = 12): ServiceInfo[] {
  return Array.from({ length: n }, (_, i) => ({
    id: `t${String(i).padStart(2, "0")}`,
    name: `svc t${String(i).padStart(2, "0")}`,
  }));
}
