/** Page wiring: model loading form + live panels. */

import { GuidanceApi } from "./api.js";
import { render, Panels } from "./render.js";
import { Explorer } from "./viewmodel.js";

function serviceBase(): string {
  const override = new URLSearchParams(window.location.search).get("service");
  if (override) return override.replace(/\/$/, "");
  return window.location.origin;
}

export function bootstrap(root: HTMLElement): Explorer {
  const api = new GuidanceApi(serviceBase());

  const loader = document.createElement("div");
  loader.className = "loader";
  const fileInput = document.createElement("input");
  fileInput.type = "file";
  fileInput.id = "model-file";
  fileInput.accept = ".json,application/json";
  const loadFirst = document.createElement("button");
  loadFirst.id = "load-served";
  loadFirst.textContent = "Open served model";
  loader.append("Model JSON: ", fileInput, " or ", loadFirst);

  const panels: Panels = {
    banner: document.createElement("div"),
    graph: document.createElement("div"),
    suggestions: document.createElement("div"),
    script: document.createElement("div"),
    controls: document.createElement("div"),
  };
  panels.banner.id = "banner";
  panels.graph.id = "graph";
  panels.suggestions.id = "suggestions";
  panels.script.id = "script";
  panels.controls.id = "controls";

  const explorer = new Explorer(api, () => render(explorer, panels));
  root.append(loader, panels.banner, panels.controls, panels.graph,
              panels.suggestions, panels.script);

  fileInput.addEventListener("change", () => {
    const file = fileInput.files?.[0];
    if (!file) return;
    void file.text().then((text) => explorer.loadModel(text));
  });
  loadFirst.addEventListener("click", () => {
    // a model preloaded by `proofminer serve -m ...` is already in the
    // store; re-post is unnecessary, just open a session on the first one
    void (async () => {
      try {
        const listing = await api.listModels();
        const first = listing.models[0];
        if (!first) {
          panels.banner.textContent = "the service has no models loaded";
          return;
        }
        await explorer.loadExisting(first.modelId);
      } catch (err) {
        panels.banner.textContent = `service unreachable: ${String(err)}`;
      }
    })();
  });
  render(explorer, panels);
  return explorer;
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  bootstrap(document.getElementById("app")!);
}
