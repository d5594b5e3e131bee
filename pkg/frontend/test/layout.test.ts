import { describe, expect, it } from "vitest";

import { GraphDoc } from "../src/api.js";
import { layoutGraph, neighborhood, NEIGHBORHOOD_LIMIT } from "../src/layout.js";

function chainGraph(n: number): GraphDoc {
  return {
    states: Array.from({ length: n }, (_, id) => ({
      id,
      accepting: id === n - 1,
      initial: id === 0,
    })),
    edges: Array.from({ length: n - 1 }, (_, i) => ({
      source: i,
      target: i + 1,
      label: `step${i}`,
      witnesses: [],
    })),
  };
}

describe("layoutGraph", () => {
  it("places states in breadth-first layers from the initial state", () => {
    const layout = layoutGraph(chainGraph(4), null);
    expect(layout.nodes).toHaveLength(4);
    const xs = layout.nodes.sort((a, b) => a.id - b.id).map((n) => n.x);
    expect(new Set(xs).size).toBe(4); // one layer per chain position
    expect(xs[0]! < xs[1]! && xs[1]! < xs[2]! && xs[2]! < xs[3]!).toBe(true);
    expect(layout.collapsed).toBe(false);
    expect(layout.hiddenStates).toBe(0);
  });

  it("keeps every edge endpoint positioned", () => {
    const layout = layoutGraph(chainGraph(6), null);
    const ids = new Set(layout.nodes.map((n) => n.id));
    for (const edge of layout.edges) {
      expect(ids.has(edge.source)).toBe(true);
      expect(ids.has(edge.target)).toBe(true);
    }
  });

  it("collapses to the neighborhood of the current state past the limit", () => {
    const big = chainGraph(NEIGHBORHOOD_LIMIT + 50);
    const layout = layoutGraph(big, 100);
    expect(layout.collapsed).toBe(true);
    expect(layout.hiddenStates).toBeGreaterThan(0);
    const ids = new Set(layout.nodes.map((n) => n.id));
    expect(ids.has(100)).toBe(true);
    expect(ids.has(0)).toBe(false); // far from the cursor
    expect(layout.nodes.length).toBeLessThan(big.states.length);
  });

  it("neighborhood treats edges as undirected", () => {
    const graph = chainGraph(5);
    const around = neighborhood(graph, 2);
    expect([...around].sort((a, b) => a - b)).toEqual([0, 1, 2, 3, 4]);
  });
});
