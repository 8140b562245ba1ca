/** Ranked-candidate panel: probability bars, accept buttons, inline errors.

The panel never recomputes or normalizes probabilities: the bar widths and
numbers shown are exactly the response values.
*/

import { Candidate } from "./types.js";

export class RecommendationPanel {
  readonly element: HTMLElement;
  private list: HTMLElement;
  private status: HTMLElement;
  private candidates: Candidate[] = [];

  constructor(
    container: HTMLElement,
    private readonly onAccept: (candidate: Candidate, row: HTMLElement) => void,
  ) {
    this.element = document.createElement("div");
    this.element.className = "panel";
    this.status = document.createElement("div");
    this.status.className = "panel-status";
    this.list = document.createElement("div");
    this.list.className = "panel-list";
    this.element.appendChild(this.status);
    this.element.appendChild(this.list);
    container.appendChild(this.element);
  }

  get current(): Candidate[] {
    return this.candidates;
  }

  setLoading(anchorId: string): void {
    this.status.textContent = `ranking services after ${anchorId}…`;
    this.element.classList.remove("stale");
  }

  /** Mark the shown list as possibly out of date after a failed refresh. */
  markStale(): void {
    this.element.classList.add("stale");
    this.status.textContent = "showing stale results (last request failed)";
  }

  clear(message = "select an anchor node"): void {
    this.candidates = [];
    this.list.textContent = "";
    this.status.textContent = message;
    this.element.classList.remove("stale");
  }

  show(anchorId: string, candidates: Candidate[]): void {
    this.candidates = candidates;
    this.element.classList.remove("stale");
    this.status.textContent = `top ${candidates.length} after ${anchorId}`;
    this.list.textContent = "";
    for (const candidate of candidates) {
      this.list.appendChild(this.row(candidate));
    }
  }

  showRowError(row: HTMLElement, message: string): void {
    let note = row.querySelector<HTMLElement>(".row-error");
    if (!note) {
      note = document.createElement("div");
      note.className = "row-error";
      row.appendChild(note);
    }
    note.textContent = message;
  }

  private row(candidate: Candidate): HTMLElement {
    const row = document.createElement("div");
    row.className = "candidate-row";
    row.dataset.serviceId = candidate.service_id;

    const name = document.createElement("span");
    name.className = "candidate-name";
    name.title = candidate.service_id;
    name.textContent = candidate.name;

    const bar = document.createElement("div");
    bar.className = "probability-bar";
    const fill = document.createElement("div");
    fill.className = "probability-fill";
    fill.style.width = `${(candidate.probability * 100).toFixed(2)}%`;
    bar.appendChild(fill);

    const value = document.createElement("span");
    value.className = "probability-value";
    value.textContent = candidate.probability.toFixed(4);

    const accept = document.createElement("button");
    accept.className = "accept-button";
    accept.textContent = "add";
    accept.addEventListener("click", () => this.onAccept(candidate, row));

    row.append(name, bar, value, accept);
    return row;
  }
}
