/** Composer application: session lifecycle, anchor selection, accept loop.

The canvas is never updated optimistically: every mutation renders the
acknowledged server state, so the local DAG always mirrors the session.
A newer anchor selection aborts any in-flight recommendation request.
*/

import { ApiClient } from "./api.js";
import { DagCanvas } from "./canvas.js";
import { DagModel } from "./dag.js";
import { RecommendationPanel } from "./panel.js";
import { ApiError, Candidate, ServiceInfo, SessionState } from "./types.js";

export class ComposerApp {
  readonly model = new DagModel();
  readonly canvas: DagCanvas;
  readonly panel: RecommendationPanel;

  private sessionId: string | null = null;
  private vocabulary: ServiceInfo[] = [];
  private inflight: AbortController | null = null;

  private banner: HTMLElement;
  private goalInput: HTMLInputElement;
  private kSlider: HTMLInputElement;
  private kValue: HTMLElement;
  private servicePicker: HTMLSelectElement;
  private edgeSource: HTMLSelectElement;
  private edgeSink: HTMLSelectElement;
  private edgeError: HTMLElement;
  private recreatePrompt: HTMLElement;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
  ) {
    this.root.innerHTML = `
      <div class="banner hidden" data-role="banner"></div>
      <div class="recreate-prompt hidden" data-role="recreate">
        session expired <button data-role="recreate-button">start a new session</button>
      </div>
      <header class="toolbar">
        <input data-role="goal" type="text" placeholder="workflow goal" size="36">
        <button data-role="start">start session</button>
        <label class="k-control">
          top K <input data-role="k" type="range" min="1" max="10" value="5">
          <span data-role="k-value">5</span>
        </label>
      </header>
      <section class="composer">
        <div class="canvas-pane">
          <div class="add-controls">
            <select data-role="service-picker"></select>
            <button data-role="add-service">add node</button>
          </div>
          <div class="edge-controls">
            <select data-role="edge-source"></select> →
            <select data-role="edge-sink"></select>
            <button data-role="add-edge">add edge</button>
            <span class="edge-error" data-role="edge-error"></span>
          </div>
          <div data-role="canvas"></div>
        </div>
        <aside data-role="panel-host" class="panel-pane"></aside>
      </section>
    `;
    this.banner = this.query("[data-role=banner]");
    this.goalInput = this.query("[data-role=goal]");
    this.kSlider = this.query("[data-role=k]");
    this.kValue = this.query("[data-role=k-value]");
    this.servicePicker = this.query("[data-role=service-picker]");
    this.edgeSource = this.query("[data-role=edge-source]");
    this.edgeSink = this.query("[data-role=edge-sink]");
    this.edgeError = this.query("[data-role=edge-error]");
    this.recreatePrompt = this.query("[data-role=recreate]");

    this.canvas = new DagCanvas(
      this.query("[data-role=canvas]"),
      this.model,
      (id) => void this.selectAnchor(id),
    );
    this.panel = new RecommendationPanel(
      this.query("[data-role=panel-host]"),
      (candidate, row) => void this.acceptCandidate(candidate, row),
    );
    this.panel.clear("start a session to compose");

    this.query<HTMLButtonElement>("[data-role=start]").addEventListener(
      "click", () => void this.startSession(),
    );
    this.query<HTMLButtonElement>("[data-role=add-service]").addEventListener(
      "click", () => void this.addPickedService(),
    );
    this.query<HTMLButtonElement>("[data-role=add-edge]").addEventListener(
      "click", () => void this.addManualEdge(),
    );
    this.query<HTMLButtonElement>("[data-role=recreate-button]").addEventListener(
      "click", () => void this.startSession(),
    );
    this.kSlider.addEventListener("input", () => {
      this.kValue.textContent = this.kSlider.value;
      if (this.canvas.selectedAnchor) void this.selectAnchor(this.canvas.selectedAnchor);
    });
  }

  private query<T extends HTMLElement = HTMLElement>(selector: string): T {
    const found = this.root.querySelector<T>(selector);
    if (!found) throw new Error(`missing element ${selector}`);
    return found;
  }

  get session(): string | null {
    return this.sessionId;
  }

  get k(): number {
    return Number(this.kSlider.value);
  }

  showBanner(message: string): void {
    this.banner.textContent = message;
    this.banner.classList.remove("hidden");
  }

  hideBanner(): void {
    this.banner.classList.add("hidden");
  }

  async init(): Promise<void> {
    try {
      this.vocabulary = await this.api.listServices();
    } catch {
      this.showBanner("could not load the service vocabulary");
      return;
    }
    this.fillPicker();
  }

  private fillPicker(): void {
    this.servicePicker.textContent = "";
    for (const service of this.vocabulary) {
      const option = document.createElement("option");
      option.value = service.id;
      option.textContent = `${service.name} (${service.id})`;
      this.servicePicker.appendChild(option);
    }
  }

  private fillEdgeSelects(): void {
    for (const select of [this.edgeSource, this.edgeSink]) {
      select.textContent = "";
      for (const service of this.model.services) {
        const option = document.createElement("option");
        option.value = service.id;
        option.textContent = service.id;
        select.appendChild(option);
      }
    }
  }

  async startSession(): Promise<void> {
    try {
      this.sessionId = await this.api.createSession(this.goalInput.value);
    } catch {
      this.showBanner("failed to create a session");
      return;
    }
    this.hideBanner();
    this.recreatePrompt.classList.add("hidden");
    this.applyState({
      session_id: this.sessionId,
      goal: this.goalInput.value,
      services: [],
      edges: [],
    });
    this.canvas.setAnchor(null);
    this.panel.clear("add a seed node, then click it");
  }

  /** Render an acknowledged server state; the only way the canvas changes. */
  private applyState(state: SessionState): void {
    this.model.syncFrom(state);
    this.canvas.render();
    this.fillEdgeSelects();
  }

  private handleSessionLoss(error: unknown): boolean {
    if (error instanceof ApiError && error.status === 404) {
      this.recreatePrompt.classList.remove("hidden");
      this.showBanner("the session no longer exists on the server");
      return true;
    }
    return false;
  }

  async addPickedService(): Promise<void> {
    if (!this.sessionId) return;
    const serviceId = this.servicePicker.value;
    if (!serviceId) return;
    const source = this.canvas.selectedAnchor ?? undefined;
    try {
      const state = await this.api.addService(this.sessionId, serviceId, source);
      this.hideBanner();
      this.applyState(state);
    } catch (error) {
      if (this.handleSessionLoss(error)) return;
      const detail =
        error instanceof ApiError ? JSON.stringify(error.body.detail) : String(error);
      this.showBanner(`could not add ${serviceId}: ${detail}`);
    }
  }

  async addManualEdge(): Promise<void> {
    if (!this.sessionId) return;
    this.edgeError.textContent = "";
    const source = this.edgeSource.value;
    const sink = this.edgeSink.value;
    if (!source || !sink) return;
    try {
      const state = await this.api.addService(this.sessionId, sink, source);
      this.hideBanner();
      this.applyState(state);
    } catch (error) {
      if (this.handleSessionLoss(error)) return;
      if (error instanceof ApiError && error.status === 422) {
        const cycle = error.cycle.length ? ` (cycle: ${error.cycle.join(" → ")})` : "";
        this.edgeError.textContent = `rejected: ${String(error.body.detail)}${cycle}`;
        return;
      }
      this.showBanner(`could not add edge ${source} → ${sink}`);
    }
  }

  /** Anchor click: refresh the panel; newer selections cancel older requests. */
  async selectAnchor(anchorId: string): Promise<void> {
    if (!this.sessionId || !this.model.has(anchorId)) return;
    this.canvas.setAnchor(anchorId);
    this.inflight?.abort();
    const controller = new AbortController();
    this.inflight = controller;
    this.panel.setLoading(anchorId);
    try {
      const candidates = await this.api.recommend(
        this.sessionId, anchorId, this.k, controller.signal,
      );
      if (controller.signal.aborted) return;
      this.hideBanner();
      this.panel.show(anchorId, candidates);
    } catch (error) {
      if (controller.signal.aborted) return;
      if (this.handleSessionLoss(error)) {
        this.panel.markStale();
        return;
      }
      this.showBanner("recommendation request failed");
      this.panel.markStale();
    } finally {
      if (this.inflight === controller) this.inflight = null;
    }
  }

  /** Accept a candidate: extend the DAG after the anchor, keep composing. */
  async acceptCandidate(candidate: Candidate, row: HTMLElement): Promise<void> {
    const anchor = this.canvas.selectedAnchor;
    if (!this.sessionId || !anchor) return;
    try {
      const state = await this.api.addService(
        this.sessionId, candidate.service_id, anchor,
      );
      this.hideBanner();
      this.applyState(state);
    } catch (error) {
      if (this.handleSessionLoss(error)) return;
      if (error instanceof ApiError && error.status === 422) {
        this.panel.showRowError(row, String(error.body.detail));
        return;
      }
      this.showBanner(`could not add ${candidate.service_id}`);
      return;
    }
    // the accepted service becomes the new anchor and the loop continues
    await this.selectAnchor(candidate.service_id);
  }
}
