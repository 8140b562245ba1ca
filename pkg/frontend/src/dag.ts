/** Client-side mirror of the session DAG plus a layered auto-layout. */

import { EdgeInfo, ServiceInfo, SessionState } from "./types.js";

export interface NodePosition {
  id: string;
  name: string;
  x: number;
  y: number;
  layer: number;
}

export class DagModel {
  services: ServiceInfo[] = [];
  edges: EdgeInfo[] = [];

  /** Replace local state with an acknowledged server snapshot. */
  syncFrom(state: SessionState): void {
    this.services = state.services.map((s) => ({ ...s }));
    this.edges = state.edges.map((e) => ({ ...e }));
  }

  /** Serialization that must equal the server session state. */
  serialize(): { services: ServiceInfo[]; edges: EdgeInfo[] } {
    return {
      services: this.services.map((s) => ({ ...s })),
      edges: this.edges.map((e) => ({ ...e })),
    };
  }

  has(serviceId: string): boolean {
    return this.services.some((s) => s.id === serviceId);
  }

  predecessors(serviceId: string): string[] {
    return this.edges.filter((e) => e.sink === serviceId).map((e) => e.source);
  }

  /** Longest-path layering: a node sits one layer past its deepest parent. */
  layers(): Map<string, number> {
    const depth = new Map<string, number>();
    const resolve = (id: string, seen: Set<string>): number => {
      const cached = depth.get(id);
      if (cached !== undefined) return cached;
      if (seen.has(id)) return 0; // cycles cannot occur in acknowledged state
      seen.add(id);
      const preds = this.predecessors(id);
      const value = preds.length
        ? 1 + Math.max(...preds.map((p) => resolve(p, seen)))
        : 0;
      depth.set(id, value);
      return value;
    };
    for (const s of this.services) resolve(s.id, new Set());
    return depth;
  }

  /** Deterministic positions for rendering: columns by layer, rows in order. */
  layout(columnWidth = 170, rowHeight = 64): NodePosition[] {
    const depth = this.layers();
    const perLayerCount = new Map<number, number>();
    const positions: NodePosition[] = [];
    for (const s of this.services) {
      const layer = depth.get(s.id) ?? 0;
      const row = perLayerCount.get(layer) ?? 0;
      perLayerCount.set(layer, row + 1);
      positions.push({
        id: s.id,
        name: s.name,
        layer,
        x: 30 + layer * columnWidth,
        y: 30 + row * rowHeight,
      });
    }
    return positions;
  }
}
