// @vitest-environment jsdom
import { beforeEach, describe, expect, it } from "vitest";

import { FetchLike, GuidanceApi } from "../src/api.js";
import { Panels, render } from "../src/render.js";
import { Explorer } from "../src/viewmodel.js";
import { makeFakeService } from "./fake_service.js";

function mountExplorer(fetchFn: FetchLike) {
  const panels: Panels = {
    banner: document.createElement("div"),
    graph: document.createElement("div"),
    suggestions: document.createElement("div"),
    script: document.createElement("div"),
    controls: document.createElement("div"),
  };
  document.body.replaceChildren(
    panels.banner, panels.graph, panels.suggestions, panels.script, panels.controls,
  );
  const explorer = new Explorer(new GuidanceApi("http://fake", fetchFn),
                                () => render(explorer, panels));
  return { explorer, panels };
}

function clickStep(panels: Panels, label: string): void {
  const button = [...panels.suggestions.querySelectorAll<HTMLButtonElement>(".step-button")]
    .find((b) => b.dataset.label === label);
  expect(button, `button for ${label}`).toBeDefined();
  button!.click();
}

async function settle(): Promise<void> {
  // let the chain of fetch promises inside the click handler resolve
  for (let i = 0; i < 10; i += 1) await Promise.resolve();
  await new Promise((resolve) => setTimeout(resolve, 0));
}

describe("explorer DOM", () => {
  beforeEach(() => {
    document.body.innerHTML = "";
  });

  it("renders the graph with initial highlighted and accepting marked", async () => {
    const { fetchFn } = makeFakeService();
    const { explorer, panels } = mountExplorer(fetchFn);
    await explorer.loadModel("{}");
    const svg = panels.graph.querySelector("svg")!;
    expect(svg).toBeTruthy();
    expect(svg.querySelectorAll("circle.node")).toHaveLength(4);
    expect(svg.querySelectorAll("circle.node-current")).toHaveLength(1);
    expect(svg.querySelectorAll("circle.node-ring")).toHaveLength(1); // one accepting state
  });

  it("walking by clicks fills the script pane verbatim and shows the badge", async () => {
    const { fetchFn } = makeFakeService();
    const { explorer, panels } = mountExplorer(fetchFn);
    await explorer.loadModel("{}");

    // pick p1 = l from the ranked candidate list
    const row = [...panels.suggestions.querySelectorAll<HTMLElement>(".suggestion")]
      .find((r) => r.querySelector<HTMLButtonElement>(".step-button")?.dataset.label === "induction")!;
    const picker = row.querySelector<HTMLSelectElement>(".param-pick")!;
    const option = [...picker.options].find((o) => o.textContent === "l")!;
    picker.value = option.value;
    row.querySelector<HTMLButtonElement>(".step-button")!.click();
    await settle();
    expect(panels.script.querySelector("#script-pane")!.textContent).toBe("induction l.");

    clickStep(panels, "trivial_0");
    await settle();
    expect(panels.script.querySelector("#script-pane")!.textContent)
      .toBe("induction l. trivial.");
    expect(panels.suggestions.querySelector("#accepting-badge")).toBeTruthy();
  });

  it("free-text parameters are sent as typed", async () => {
    const { fetchFn, state } = makeFakeService();
    const { explorer, panels } = mountExplorer(fetchFn);
    await explorer.loadModel("{}");
    const row = [...panels.suggestions.querySelectorAll<HTMLElement>(".suggestion")]
      .find((r) => r.querySelector<HTMLButtonElement>(".step-button")?.dataset.label === "induction")!;
    row.querySelector<HTMLInputElement>(".param-free")!.value = "<- IHl";
    row.querySelector<HTMLButtonElement>(".step-button")!.click();
    await settle();
    expect(state.history[0]).toEqual({
      label: "induction",
      params: ["<- IHl"],
      combined: false,
    });
  });

  it("undo button reverts the view", async () => {
    const { fetchFn } = makeFakeService();
    const { explorer, panels } = mountExplorer(fetchFn);
    await explorer.loadModel("{}");
    clickStep(panels, "intros_0");
    await settle();
    expect(panels.script.querySelector("#script-pane")!.textContent).toBe("intros.");
    panels.controls.querySelector<HTMLButtonElement>("#undo-button")!.click();
    await settle();
    expect(panels.script.querySelector("#script-pane")!.textContent).toBe("");
  });

  it("a dead service freezes every control", async () => {
    const { fetchFn, state } = makeFakeService();
    const { explorer, panels } = mountExplorer(fetchFn);
    await explorer.loadModel("{}");
    state.dead = true;
    clickStep(panels, "induction");
    await settle();
    expect(explorer.state.phase).toBe("frozen");
    expect(panels.banner.textContent).toContain("controls frozen");
    const controls = [
      ...panels.suggestions.querySelectorAll<HTMLButtonElement>("button"),
      ...panels.suggestions.querySelectorAll<HTMLSelectElement>("select"),
      ...panels.suggestions.querySelectorAll<HTMLInputElement>("input"),
      ...panels.controls.querySelectorAll<HTMLButtonElement>("button"),
    ];
    expect(controls.length).toBeGreaterThan(0);
    expect(controls.every((c) => c.disabled)).toBe(true);
    // and the script pane still shows the last confirmed text
    expect(panels.script.querySelector("#script-pane")!.textContent).toBe("");
  });
});
