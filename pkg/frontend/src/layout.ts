/** Client-side graph layout from the adjacency document.
 *
 * States sit in breadth-first layers from the initial state. Past
 * NEIGHBORHOOD_LIMIT states the view collapses to the neighborhood of the
 * current state so large models stay navigable.
 */

import { GraphDoc } from "./api.js";

export const NEIGHBORHOOD_LIMIT = 150;
export const NEIGHBORHOOD_RADIUS = 2;

const LAYER_WIDTH = 140;
const ROW_HEIGHT = 70;
const MARGIN = 60;

export interface LaidOutNode {
  id: number;
  x: number;
  y: number;
  accepting: boolean;
  initial: boolean;
}

export interface LaidOutEdge {
  source: number;
  target: number;
  label: string;
  sx: number;
  sy: number;
  tx: number;
  ty: number;
}

export interface Layout {
  nodes: LaidOutNode[];
  edges: LaidOutEdge[];
  width: number;
  height: number;
  collapsed: boolean;
  hiddenStates: number;
}

function bfsLayers(graph: GraphDoc, roots: number[], keep: Set<number>): Map<number, number> {
  const adjacency = new Map<number, number[]>();
  for (const edge of graph.edges) {
    if (!keep.has(edge.source) || !keep.has(edge.target)) continue;
    adjacency.get(edge.source)?.push(edge.target) ??
      adjacency.set(edge.source, [edge.target]);
  }
  const layer = new Map<number, number>();
  const queue: number[] = [];
  for (const root of roots) {
    if (keep.has(root) && !layer.has(root)) {
      layer.set(root, 0);
      queue.push(root);
    }
  }
  while (queue.length > 0) {
    const node = queue.shift()!;
    for (const next of adjacency.get(node) ?? []) {
      if (!layer.has(next)) {
        layer.set(next, layer.get(node)! + 1);
        queue.push(next);
      }
    }
  }
  // disconnected leftovers go to a final layer
  let deepest = 0;
  for (const depth of layer.values()) deepest = Math.max(deepest, depth);
  for (const id of keep) {
    if (!layer.has(id)) layer.set(id, deepest + 1);
  }
  return layer;
}

/** States within NEIGHBORHOOD_RADIUS of `center`, edges treated undirected. */
export function neighborhood(graph: GraphDoc, center: number): Set<number> {
  const adjacency = new Map<number, Set<number>>();
  const link = (a: number, b: number) => {
    if (!adjacency.has(a)) adjacency.set(a, new Set());
    adjacency.get(a)!.add(b);
  };
  for (const edge of graph.edges) {
    link(edge.source, edge.target);
    link(edge.target, edge.source);
  }
  const keep = new Set<number>([center]);
  let frontier = [center];
  for (let hop = 0; hop < NEIGHBORHOOD_RADIUS; hop += 1) {
    const next: number[] = [];
    for (const node of frontier) {
      for (const other of adjacency.get(node) ?? []) {
        if (!keep.has(other)) {
          keep.add(other);
          next.push(other);
        }
      }
    }
    frontier = next;
  }
  return keep;
}

export function layoutGraph(graph: GraphDoc, currentState: number | null): Layout {
  const total = graph.states.length;
  const collapsed = total > NEIGHBORHOOD_LIMIT;
  let keep: Set<number>;
  if (collapsed) {
    const initial = graph.states.find((s) => s.initial)?.id ?? 0;
    keep = neighborhood(graph, currentState ?? initial);
  } else {
    keep = new Set(graph.states.map((s) => s.id));
  }
  const roots = graph.states.filter((s) => s.initial).map((s) => s.id);
  if (currentState !== null && keep.has(currentState)) roots.unshift(currentState);
  const layers = bfsLayers(graph, roots, keep);

  const rows = new Map<number, number>();
  const nodes: LaidOutNode[] = [];
  const position = new Map<number, { x: number; y: number }>();
  const ordered = [...graph.states]
    .filter((s) => keep.has(s.id))
    .sort((a, b) => (layers.get(a.id)! - layers.get(b.id)!) || a.id - b.id);
  for (const state of ordered) {
    const depth = layers.get(state.id)!;
    const row = rows.get(depth) ?? 0;
    rows.set(depth, row + 1);
    const x = MARGIN + depth * LAYER_WIDTH;
    const y = MARGIN + row * ROW_HEIGHT;
    position.set(state.id, { x, y });
    nodes.push({ id: state.id, x, y, accepting: state.accepting, initial: state.initial });
  }

  const edges: LaidOutEdge[] = [];
  for (const edge of graph.edges) {
    const from = position.get(edge.source);
    const to = position.get(edge.target);
    if (!from || !to) continue;
    edges.push({
      source: edge.source,
      target: edge.target,
      label: edge.label,
      sx: from.x,
      sy: from.y,
      tx: to.x,
      ty: to.y,
    });
  }

  const width = MARGIN * 2 + LAYER_WIDTH * Math.max(0, ...layers.values());
  const height = MARGIN * 2 + ROW_HEIGHT * Math.max(0, ...[...rows.values()].map((n) => n - 1));
  return {
    nodes,
    edges,
    width: Math.max(width, 320),
    height: Math.max(height, 240),
    collapsed,
    hiddenStates: total - keep.size,
  };
}
