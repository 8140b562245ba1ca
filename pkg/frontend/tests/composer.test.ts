/** Scripted browser tests of the composer loop against the service contract. */

import { beforeEach, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { ComposerApp } from "../src/app.js";
import { FakeServer, makeVocabulary } from "./fake-server.js";

async function flush(times = 6): Promise<void> {
  for (let i = 0; i < times; i++) {
    await new Promise((resolve) => setTimeout(resolve, 0));
  }
}

function setup() {
  const server = new FakeServer(makeVocabulary());
  const root = document.createElement("div");
  document.body.appendChild(root);
  const app = new ComposerApp(root, new ApiClient(server.fetch));
  return { server, root, app };
}

function click(root: HTMLElement, selector: string): void {
  const el = root.querySelector<HTMLElement>(selector);
  if (!el) throw new Error(`nothing to click at ${selector}`);
  el.dispatchEvent(new MouseEvent("click", { bubbles: true }));
}

function clickNode(root: HTMLElement, serviceId: string): void {
  click(root, `.dag-node[data-service-id="${serviceId}"]`);
}

async function startWithSeed(app: ComposerApp, root: HTMLElement, server: FakeServer) {
  await app.init();
  (root.querySelector("[data-role=goal]") as HTMLInputElement).value =
    "align protein sequences";
  click(root, "[data-role=start]");
  await flush();
  const sessionId = app.session!;
  (root.querySelector("[data-role=service-picker]") as HTMLSelectElement).value = "t00";
  click(root, "[data-role=add-service]");
  await flush();
  expect(server.state(sessionId).services.map((s) => s.id)).toEqual(["t00"]);
  return sessionId;
}

describe("composer accept loop", () => {
  beforeEach(() => {
    document.body.innerHTML = "";
  });

  it("extends the DAG via three accepted candidates, one recommend per accept", async () => {
    const { server, root, app } = setup();
    const sessionId = await startWithSeed(app, root, server);

    clickNode(root, "t00");
    await flush();
    expect(server.recommendCalls.length).toBe(1);
    expect(root.querySelectorAll(".candidate-row").length).toBe(5);

    for (let step = 0; step < 3; step++) {
      const callsBefore = server.recommendCalls.length;
      const topRow = root.querySelector<HTMLElement>(".candidate-row")!;
      const accepted = topRow.dataset.serviceId!;
      click(root, ".candidate-row .accept-button");
      await flush();
      // exactly one recommend request per accepted candidate
      expect(server.recommendCalls.length).toBe(callsBefore + 1);
      // the accepted service is the new anchor of the refreshed panel
      expect(server.recommendCalls.at(-1)!.anchor).toBe(accepted);
    }

    const state = server.state(sessionId);
    expect(state.services.length).toBe(4);
    expect(state.edges.length).toBe(3);
    // chain shape: each accept used the previous node as source
    expect(state.edges[0].source).toBe("t00");
  });

  it("mirrors the server DAG exactly after every acknowledged mutation", async () => {
    const { server, root, app } = setup();
    const sessionId = await startWithSeed(app, root, server);
    clickNode(root, "t00");
    await flush();
    click(root, ".candidate-row .accept-button");
    await flush();

    const serverState = server.state(sessionId);
    const canvasState = app.model.serialize();
    expect(canvasState.services).toEqual(serverState.services);
    expect(canvasState.edges).toEqual(serverState.edges);
    expect(root.querySelectorAll(".dag-node").length).toBe(serverState.services.length);
    expect(root.querySelectorAll(".dag-edge").length).toBe(serverState.edges.length);
  });

  it("shows panel probabilities verbatim from the response", async () => {
    const { server, root, app } = setup();
    await startWithSeed(app, root, server);
    clickNode(root, "t00");
    await flush();
    const served = server.recommendCalls.length;
    expect(served).toBe(1);
    const rows = [...root.querySelectorAll<HTMLElement>(".candidate-row")];
    const shown = rows.map((row) =>
      row.querySelector(".probability-value")!.textContent,
    );
    expect(shown).toEqual(app.panel.current.map((c) => c.probability.toFixed(4)));
    const widths = rows.map(
      (row) => (row.querySelector(".probability-fill") as HTMLElement).style.width,
    );
    expect(widths).toEqual(
      app.panel.current.map((c) => `${(c.probability * 100).toFixed(2)}%`),
    );
  });

  it("rejects a cycle-inducing manual edge with an inline 422", async () => {
    const { server, root, app } = setup();
    const sessionId = await startWithSeed(app, root, server);

    clickNode(root, "t00");
    await flush();
    click(root, ".candidate-row .accept-button");
    await flush();
    const [first, second] = server.state(sessionId).services.map((s) => s.id);

    // manual edge second -> first closes a cycle
    (root.querySelector("[data-role=edge-source]") as HTMLSelectElement).value = second;
    (root.querySelector("[data-role=edge-sink]") as HTMLSelectElement).value = first;
    click(root, "[data-role=add-edge]");
    await flush();

    const inline = root.querySelector("[data-role=edge-error]")!.textContent!;
    expect(inline).toContain("rejected");
    expect(inline).toContain(first);
    // canvas unchanged: still mirrors the server
    const state = server.state(sessionId);
    expect(app.model.serialize().edges).toEqual(state.edges);
    expect(state.edges.length).toBe(1);
  });

  it("shows an inline row error when the server rejects a duplicate", async () => {
    const { server, root, app } = setup();
    const sessionId = await startWithSeed(app, root, server);
    clickNode(root, "t00");
    await flush();
    // make the top candidate already-composed behind the UI's back
    const top = root.querySelector<HTMLElement>(".candidate-row")!.dataset.serviceId!;
    server.sessions.get(sessionId)!.services.push(top);
    server.sessions.get(sessionId)!.edges.push({ source: "t00", sink: top });
    click(root, ".candidate-row .accept-button");
    await flush();
    const note = root.querySelector(".candidate-row .row-error");
    expect(note?.textContent).toContain("already exists");
  });

  it("uses the slider value for k", async () => {
    const { server, root, app } = setup();
    await startWithSeed(app, root, server);
    const slider = root.querySelector("[data-role=k]") as HTMLInputElement;
    slider.value = "10";
    slider.dispatchEvent(new Event("input", { bubbles: true }));
    clickNode(root, "t00");
    await flush();
    expect(server.recommendCalls.at(-1)!.k).toBe(10);
    expect(root.querySelectorAll(".candidate-row").length).toBe(10);
    expect(app.k).toBe(10);
  });

  it("marks the panel stale and shows a banner on request failure", async () => {
    const { server, root, app } = setup();
    await startWithSeed(app, root, server);
    clickNode(root, "t00");
    await flush();
    server.failNextRecommend = true;
    clickNode(root, "t00");
    await flush();
    expect(root.querySelector(".panel")!.classList.contains("stale")).toBe(true);
    expect(root.querySelector("[data-role=banner]")!.classList.contains("hidden")).toBe(false);
  });

  it("prompts to recreate the session after a server-side 404", async () => {
    const { server, root, app } = setup();
    const sessionId = await startWithSeed(app, root, server);
    clickNode(root, "t00");
    await flush();
    server.sessions.delete(sessionId); // TTL eviction behind the UI's back
    clickNode(root, "t00");
    await flush();
    const prompt = root.querySelector("[data-role=recreate]")!;
    expect(prompt.classList.contains("hidden")).toBe(false);
    // recreating gives a fresh empty session
    click(root, "[data-role=recreate-button]");
    await flush();
    expect(app.session).not.toBe(sessionId);
    expect(app.model.services.length).toBe(0);
  });

  it("cancels an in-flight recommendation when a newer anchor is selected", async () => {
    const { server, root, app } = setup();
    await startWithSeed(app, root, server);
    (root.querySelector("[data-role=service-picker]") as HTMLSelectElement).value = "t01";
    // no anchor selected yet, so this adds a second seed node
    click(root, "[data-role=add-service]");
    await flush();

    // fire two selections back to back without waiting
    const first = app.selectAnchor("t00");
    const second = app.selectAnchor("t01");
    await Promise.all([first, second]);
    await flush();
    // the newer selection owns the panel
    expect(root.querySelector(".panel-status")!.textContent).toContain("t01");
    expect(server.recommendCalls.at(-1)!.anchor).toBe("t01");
  });
});
