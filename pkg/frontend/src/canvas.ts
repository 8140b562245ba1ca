/** SVG rendering of the workflow DAG with clickable anchor selection. */

import { DagModel } from "./dag.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const NODE_W = 130;
const NODE_H = 36;

export class DagCanvas {
  readonly svg: SVGSVGElement;
  private anchor: string | null = null;

  constructor(
    private readonly container: HTMLElement,
    private readonly model: DagModel,
    private readonly onSelectAnchor: (id: string) => void,
  ) {
    this.svg = document.createElementNS(SVG_NS, "svg") as SVGSVGElement;
    this.svg.setAttribute("class", "dag-canvas");
    this.svg.setAttribute("width", "100%");
    this.svg.setAttribute("height", "420");
    this.container.appendChild(this.svg);
  }

  get selectedAnchor(): string | null {
    return this.anchor;
  }

  setAnchor(id: string | null): void {
    this.anchor = id;
    this.render();
  }

  render(): void {
    while (this.svg.firstChild) this.svg.removeChild(this.svg.firstChild);
    const positions = this.model.layout();
    const byId = new Map(positions.map((p) => [p.id, p]));

    const defs = document.createElementNS(SVG_NS, "defs");
    defs.innerHTML =
      '<marker id="arrow" viewBox="0 0 10 10" refX="9" refY="5" ' +
      'markerWidth="7" markerHeight="7" orient="auto-start-reverse">' +
      '<path d="M 0 0 L 10 5 L 0 10 z" fill="#8888a0"/></marker>';
    this.svg.appendChild(defs);

    for (const edge of this.model.edges) {
      const from = byId.get(edge.source);
      const to = byId.get(edge.sink);
      if (!from || !to) continue;
      const line = document.createElementNS(SVG_NS, "line");
      line.setAttribute("x1", String(from.x + NODE_W));
      line.setAttribute("y1", String(from.y + NODE_H / 2));
      line.setAttribute("x2", String(to.x));
      line.setAttribute("y2", String(to.y + NODE_H / 2));
      line.setAttribute("class", "dag-edge");
      line.setAttribute("marker-end", "url(#arrow)");
      line.dataset.source = edge.source;
      line.dataset.sink = edge.sink;
      this.svg.appendChild(line);
    }

    for (const pos of positions) {
      const group = document.createElementNS(SVG_NS, "g");
      group.setAttribute("class", pos.id === this.anchor ? "dag-node anchor" : "dag-node");
      group.dataset.serviceId = pos.id;
      group.addEventListener("click", () => this.onSelectAnchor(pos.id));

      const rect = document.createElementNS(SVG_NS, "rect");
      rect.setAttribute("x", String(pos.x));
      rect.setAttribute("y", String(pos.y));
      rect.setAttribute("width", String(NODE_W));
      rect.setAttribute("height", String(NODE_H));
      rect.setAttribute("rx", "6");
      group.appendChild(rect);

      // node identity: name shown, id in the tooltip
      const title = document.createElementNS(SVG_NS, "title");
      title.textContent = pos.id;
      group.appendChild(title);

      const label = document.createElementNS(SVG_NS, "text");
      label.setAttribute("x", String(pos.x + NODE_W / 2));
      label.setAttribute("y", String(pos.y + NODE_H / 2 + 4));
      label.setAttribute("text-anchor", "middle");
      label.textContent =
        pos.name.length > 16 ? pos.name.slice(0, 15) + "…" : pos.name;
      group.appendChild(label);

      this.svg.appendChild(group);
    }
  }
}
