// @vitest-environment jsdom
//
// End-to-end walk against the real guidance service: infer the bundled
// list/nat model without app_nil_l, serve it, click through the five-step
// derivation in the DOM, verify the script pane, then kill the service
// and verify the page freezes.
import { spawn, spawnSync, ChildProcess } from "node:child_process";
import { mkdtempSync, writeFileSync, readFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { GuidanceApi } from "../src/api.js";
import { Panels, render } from "../src/render.js";
import { Explorer } from "../src/viewmodel.js";

const PORT = 18412;
const BASE = `http://127.0.0.1:${PORT}`;

const BUILD_MODEL = `
import pathlib, sys
import importlib.resources as resources
from proofminer.proofscript import parse_script
from proofminer.traces import Corpus
from proofminer.inference import infer
from proofminer.efsm import export_json
text = (resources.files("proofminer") / "data" / "listnat.v").read_text()
corpus = parse_script(text, source="listnat.v")
corpus = Corpus(tuple(t for t in corpus.traces if t.name != "app_nil_l"), source=corpus.source)
pathlib.Path(sys.argv[1]).write_bytes(export_json(infer(corpus)))
`;

let server: ChildProcess | null = null;
let modelJson = "";

async function waitForService(timeoutMs = 20000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    try {
      const response = await fetch(`${BASE}/models`);
      if (response.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((resolve) => setTimeout(resolve, 150));
  }
  throw new Error("guidance service did not come up");
}

beforeAll(async () => {
  const dir = mkdtempSync(join(tmpdir(), "explorer-e2e-"));
  const modelPath = join(dir, "model.json");
  const build = spawnSync("python3", ["-c", BUILD_MODEL, modelPath], {
    encoding: "utf-8",
  });
  if (build.status !== 0) {
    throw new Error(`model build failed: ${build.stderr}`);
  }
  modelJson = readFileSync(modelPath, "utf-8");
  server = spawn("proofminer",
    ["serve", "-m", modelPath, "--port", String(PORT), "--host", "127.0.0.1"],
    { stdio: "ignore" });
  await waitForService();
}, 40000);

afterAll(() => {
  server?.kill("SIGKILL");
});

function mount(): { explorer: Explorer; panels: Panels } {
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
  const explorer = new Explorer(new GuidanceApi(BASE), () => render(explorer, panels));
  return { explorer, panels };
}

async function settle(): Promise<void> {
  await new Promise((resolve) => setTimeout(resolve, 50));
}

async function clickStep(panels: Panels, label: string, pick?: string, free?: string) {
  const row = [...panels.suggestions.querySelectorAll<HTMLElement>(".suggestion")]
    .find((r) => r.querySelector<HTMLButtonElement>(".step-button")?.dataset.label === label);
  expect(row, `suggestion row for ${label}`).toBeDefined();
  if (pick !== undefined) {
    const picker = row!.querySelector<HTMLSelectElement>(".param-pick")!;
    const option = [...picker.options].find((o) => o.textContent === pick);
    expect(option, `candidate ${pick} for ${label}`).toBeDefined();
    picker.value = option!.value;
  }
  if (free !== undefined) {
    row!.querySelector<HTMLInputElement>(".param-free")!.value = free;
  }
  row!.querySelector<HTMLButtonElement>(".step-button")!.click();
  await settle();
}

describe("browser walk against the live service", () => {
  it("derives the held-out proof and shows the accepting badge", async () => {
    const { explorer, panels } = mount();
    await explorer.loadModel(modelJson);
    expect(explorer.state.phase).toBe("ready");

    const initial = explorer.state.suggestions.map((s) => s.displayName).sort();
    expect(initial).toEqual(["induction", "intros"]);

    await clickStep(panels, "induction", "l");
    await clickStep(panels, "trivial_0");
    await clickStep(panels, "simpl_0");
    await clickStep(panels, "rewrite", undefined, "<- IHl");
    await clickStep(panels, "trivial_0");

    expect(panels.script.querySelector("#script-pane")!.textContent)
      .toBe("induction l. trivial. simpl. rewrite <- IHl. trivial.");
    expect(panels.suggestions.querySelector("#accepting-badge")).toBeTruthy();
    expect(explorer.state.canFinish).toBe(true);
  }, 30000);

  it("killing the service mid-session freezes all controls", async () => {
    const { explorer, panels } = mount();
    await explorer.loadModel(modelJson);
    await clickStep(panels, "induction", "l");
    const scriptBefore = panels.script.querySelector("#script-pane")!.textContent;

    server!.kill("SIGKILL");
    await new Promise((resolve) => setTimeout(resolve, 300));

    await clickStep(panels, "trivial_0");
    expect(explorer.state.phase).toBe("frozen");
    expect(panels.banner.textContent).toContain("controls frozen");
    const controls = [
      ...panels.suggestions.querySelectorAll<HTMLButtonElement>("button"),
      ...panels.controls.querySelectorAll<HTMLButtonElement>("button"),
    ];
    expect(controls.every((c) => c.disabled)).toBe(true);
    expect(panels.script.querySelector("#script-pane")!.textContent).toBe(scriptBefore);
  }, 30000);
});
