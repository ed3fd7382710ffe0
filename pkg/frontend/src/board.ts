// Pure view-model construction: from the service view JSON and a
// structure description to a drawable scene. No game rules live here;
// the only client-side filtering is the trivially-illegal kind (wrong
// turn, wrong reply target), everything else is the server's call.

import type { MoveRequest, SessionView, Side, StructureJson } from "./api.js";

export interface NodeSprite {
  element: number;
  x: number;
  y: number;
  label: string;
  pebbles: number[]; // pebble indices sitting on this element (round number for round games)
  clickable: boolean;
  hinted: boolean;
  pendingPick: boolean;
}

export interface EdgeSprite {
  from: number;
  to: number;
  directed: boolean;
}

export interface Scene {
  side: Side;
  width: number;
  height: number;
  nodes: NodeSprite[];
  edges: EdgeSprite[];
  orderedLine: boolean;
  constants: { name: string; element: number }[];
}

const NODE_GAP = 70;
const LINE_Y = 80;
const RADIUS = 90;

export function isOrderedLine(structure: StructureJson): boolean {
  return structure.vocab.relations.some(([name]) => name === "<");
}

/** Deterministic layout: ordered structures on a line, graphs on a circle. */
export function nodePositions(structure: StructureJson): { x: number; y: number }[] {
  const n = structure.size;
  if (isOrderedLine(structure)) {
    return Array.from({ length: n }, (_v, i) => ({
      x: 40 + i * NODE_GAP,
      y: LINE_Y,
    }));
  }
  const cx = 40 + RADIUS;
  const cy = 20 + RADIUS;
  return Array.from({ length: n }, (_v, i) => {
    const angle = (2 * Math.PI * i) / n - Math.PI / 2;
    return { x: cx + RADIUS * Math.cos(angle), y: cy + RADIUS * Math.sin(angle) };
  });
}

function unaryMarks(structure: StructureJson, element: number): string {
  const marks: string[] = [];
  for (const [name, arity] of structure.vocab.relations) {
    if (arity !== 1 || name === "<") continue;
    const rows = structure.relations[name] ?? [];
    if (rows.some((row) => row[0] === element)) marks.push(name);
  }
  return marks.join(",");
}

export type LegalTarget =
  | { role: "pick" } // picking side may choose either structure
  | { role: "reply"; side: Side; pebble: number | null }
  | null;

/** What the human may click right now; null when it is not their turn. */
export function legalTarget(view: SessionView): LegalTarget {
  if (view.status !== "ongoing" || view.toMove !== view.humanSide) return null;
  if (view.humanSide === "Duplicator") {
    if (!view.pending) return null;
    return {
      role: "reply",
      side: view.pending.structure === "left" ? "right" : "left",
      pebble: view.pending.pebble,
    };
  }
  return { role: "pick" };
}

/** Whether clicking an element of a structure is worth sending at all. */
export function clickAllowed(view: SessionView, side: Side): boolean {
  const target = legalTarget(view);
  if (target === null) return false;
  return target.role === "pick" || target.side === side;
}

export function moveForClick(
  view: SessionView,
  side: Side,
  element: number,
  spoilerPebble: number | null,
): MoveRequest | null {
  if (!clickAllowed(view, side)) return null;
  const move: MoveRequest = { structure: side, element };
  if (view.kind === "pebble") {
    if (view.humanSide === "Duplicator") {
      move.pebble = view.pending?.pebble ?? 0;
    } else {
      if (spoilerPebble === null) return null;
      move.pebble = spoilerPebble;
    }
  }
  return move;
}

export function buildScene(
  structure: StructureJson,
  side: Side,
  view: SessionView,
  hintedElement: number | null,
): Scene {
  const positions = nodePositions(structure);
  const placed = side === "left" ? view.pebbles.left : view.pebbles.right;
  const pending = view.pending;
  const clickable = clickAllowed(view, side);
  const nodes: NodeSprite[] = positions.map((pos, element) => {
    const pebbles: number[] = [];
    placed.forEach((value, index) => {
      if (value === element) pebbles.push(index);
    });
    const marks = unaryMarks(structure, element);
    return {
      element,
      x: pos.x,
      y: pos.y,
      label: marks ? `${element}:${marks}` : String(element),
      pebbles,
      clickable,
      hinted: hintedElement === element,
      pendingPick:
        pending !== null && pending.structure === side && pending.element === element,
    };
  });
  const edges: EdgeSprite[] = [];
  for (const [name, arity] of structure.vocab.relations) {
    if (arity !== 2 || name === "<") continue;
    const rows = structure.relations[name] ?? [];
    const seen = new Set<string>();
    for (const [from, to] of rows) {
      const undirectedKey = from < to ? `${from}-${to}` : `${to}-${from}`;
      const symmetric = rows.some(([a, b]) => a === to && b === from);
      if (symmetric && seen.has(undirectedKey)) continue;
      seen.add(undirectedKey);
      edges.push({ from, to, directed: !symmetric });
    }
  }
  const width = Math.max(...positions.map((p) => p.x)) + 40;
  const height = Math.max(...positions.map((p) => p.y)) + 40;
  return {
    side,
    width,
    height,
    nodes,
    edges,
    orderedLine: isOrderedLine(structure),
    constants: Object.entries(structure.constants ?? {}).map(([name, element]) => ({
      name,
      element,
    })),
  };
}

export function statusBanner(view: SessionView): string {
  if (view.status === "ongoing") {
    const turn = view.toMove === view.humanSide ? "your move" : "engine thinking";
    return `${view.movesLeft} move(s) left - ${turn}`;
  }
  const winner =
    view.status === "humanWon" ? `You (${view.humanSide}) win` : "The engine wins";
  if (view.failureReason) {
    return `${winner}: ${view.failureReason}`;
  }
  return `${winner}.`;
}
