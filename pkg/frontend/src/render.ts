/** DOM rendering for the explorer: graph SVG, suggestion list with
 * parameter pick-lists and free-text override, script pane, undo. */

import { SuggestionDoc } from "./api.js";
import { layoutGraph } from "./layout.js";
import { Explorer } from "./viewmodel.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export interface Panels {
  banner: HTMLElement;
  graph: HTMLElement;
  suggestions: HTMLElement;
  script: HTMLElement;
  controls: HTMLElement;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function paramText(params: string[], combined: boolean): string {
  const body = params.join(" ");
  return combined ? `${body} ;`.trim() : body;
}

function renderBanner(explorer: Explorer, banner: HTMLElement): void {
  const vm = explorer.state;
  banner.textContent = "";
  banner.dataset.phase = vm.phase;
  if (vm.phase === "frozen") {
    banner.appendChild(
      el("div", "banner banner-frozen",
         `service unavailable: ${vm.error ?? "unknown error"} — controls frozen`),
    );
  } else if (vm.error) {
    banner.appendChild(el("div", "banner banner-error", vm.error));
  }
  for (const warning of vm.warnings) {
    banner.appendChild(el("div", "banner banner-warning", `advisory: ${warning}`));
  }
}

function renderGraph(explorer: Explorer, container: HTMLElement): void {
  const vm = explorer.state;
  container.textContent = "";
  if (!vm.graph) return;
  const layout = layoutGraph(vm.graph, vm.currentState);
  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("viewBox", `0 0 ${layout.width} ${layout.height}`);
  svg.setAttribute("width", String(layout.width));
  svg.setAttribute("height", String(layout.height));

  for (const edge of layout.edges) {
    const line = document.createElementNS(SVG_NS, "line");
    line.setAttribute("x1", String(edge.sx));
    line.setAttribute("y1", String(edge.sy));
    line.setAttribute("x2", String(edge.tx));
    line.setAttribute("y2", String(edge.ty));
    line.setAttribute("class", "edge");
    svg.appendChild(line);
    const text = document.createElementNS(SVG_NS, "text");
    text.setAttribute("x", String((edge.sx + edge.tx) / 2));
    text.setAttribute("y", String((edge.sy + edge.ty) / 2 - 4));
    text.setAttribute("class", "edge-label");
    text.textContent = edge.label;
    svg.appendChild(text);
  }
  for (const node of layout.nodes) {
    if (node.accepting) {
      const ring = document.createElementNS(SVG_NS, "circle");
      ring.setAttribute("cx", String(node.x));
      ring.setAttribute("cy", String(node.y));
      ring.setAttribute("r", "18");
      ring.setAttribute("class", "node-ring");
      svg.appendChild(ring);
    }
    const circle = document.createElementNS(SVG_NS, "circle");
    circle.setAttribute("cx", String(node.x));
    circle.setAttribute("cy", String(node.y));
    circle.setAttribute("r", "14");
    const classes = ["node"];
    if (node.id === vm.currentState) classes.push("node-current");
    if (node.initial) classes.push("node-initial");
    circle.setAttribute("class", classes.join(" "));
    circle.dataset.stateId = String(node.id);
    svg.appendChild(circle);
    const text = document.createElementNS(SVG_NS, "text");
    text.setAttribute("x", String(node.x));
    text.setAttribute("y", String(node.y + 4));
    text.setAttribute("class", "node-label");
    text.textContent = String(node.id);
    svg.appendChild(text);
  }
  container.appendChild(svg);
  if (layout.collapsed) {
    container.appendChild(
      el("div", "collapse-note",
         `showing the neighborhood of state ${vm.currentState}; ` +
         `${layout.hiddenStates} more states hidden`),
    );
  }
}

function suggestionRow(explorer: Explorer, suggestion: SuggestionDoc): HTMLElement {
  const row = el("div", "suggestion");
  const button = el("button", "step-button", suggestion.displayName);
  button.dataset.label = suggestion.label;
  button.disabled = !explorer.interactive;
  if (suggestion.leadsToAccepting) button.classList.add("leads-accepting");

  const picker = document.createElement("select");
  picker.className = "param-pick";
  picker.disabled = !explorer.interactive;
  for (const candidate of suggestion.parameterCandidates) {
    const option = document.createElement("option");
    option.value = JSON.stringify(candidate);
    option.textContent = paramText(candidate.params, candidate.combined) || "(no parameters)";
    picker.appendChild(option);
  }
  const free = document.createElement("input");
  free.type = "text";
  free.placeholder = "free-text parameters";
  free.className = "param-free";
  free.disabled = !explorer.interactive;
  const combineBox = document.createElement("input");
  combineBox.type = "checkbox";
  combineBox.className = "combine-box";
  combineBox.checked = suggestion.combinedHint;
  combineBox.disabled = !explorer.interactive;

  button.addEventListener("click", () => {
    let params: string[];
    let combined = combineBox.checked;
    if (free.value.trim()) {
      // free text is sent verbatim as one parameter; commas separate several
      params = free.value.split(",").map((p) => p.trim()).filter((p) => p.length > 0);
    } else if (picker.value) {
      const candidate = JSON.parse(picker.value) as { params: string[]; combined: boolean };
      params = candidate.params;
      combined = combineBox.checked || candidate.combined;
    } else {
      params = [];
    }
    void explorer.chooseStep(suggestion.label, params, combined);
  });

  row.appendChild(button);
  if (suggestion.parameterCandidates.some((c) => c.params.length > 0)) {
    row.appendChild(picker);
  }
  row.appendChild(free);
  const combineLabel = el("label", "combine-label", "combine (;)");
  combineLabel.prepend(combineBox);
  row.appendChild(combineLabel);
  return row;
}

function renderSuggestions(explorer: Explorer, container: HTMLElement): void {
  const vm = explorer.state;
  container.textContent = "";
  container.appendChild(el("h2", undefined, "Suggestions"));
  if (vm.canFinish) {
    const badge = el("div", "badge badge-accepting", "accepting state — the proof can finish here");
    badge.id = "accepting-badge";
    container.appendChild(badge);
  }
  if (vm.suggestions.length === 0 && vm.phase === "ready") {
    container.appendChild(el("p", "empty-note", "no options from this state"));
  }
  for (const suggestion of vm.suggestions) {
    container.appendChild(suggestionRow(explorer, suggestion));
  }
}

function renderScript(explorer: Explorer, container: HTMLElement): void {
  container.textContent = "";
  container.appendChild(el("h2", undefined, "Script"));
  const pane = el("pre", "script-pane", explorer.state.script);
  pane.id = "script-pane";
  container.appendChild(pane);
}

function renderControls(explorer: Explorer, container: HTMLElement): void {
  container.textContent = "";
  const undoButton = el("button", "undo-button", "Undo");
  undoButton.id = "undo-button";
  undoButton.disabled = !explorer.interactive || explorer.state.historyLength === 0;
  undoButton.addEventListener("click", () => void explorer.undo());
  container.appendChild(undoButton);
}

/** Re-render every panel from the current view model. */
export function render(explorer: Explorer, panels: Panels): void {
  renderBanner(explorer, panels.banner);
  renderGraph(explorer, panels.graph);
  renderSuggestions(explorer, panels.suggestions);
  renderScript(explorer, panels.script);
  renderControls(explorer, panels.controls);
}
