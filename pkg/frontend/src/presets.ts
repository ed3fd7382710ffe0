// Built-in structure pairs with sensible game settings. Structures are
// produced client-side in the same JSON schema the service accepts.

import type { GameKind, StructureJson } from "./api.js";

export function linearOrder(n: number, minmax = false): StructureJson {
  const less: number[][] = [];
  for (let i = 0; i < n; i++) {
    for (let j = i + 1; j < n; j++) less.push([i, j]);
  }
  return {
    vocab: {
      relations: [["<", 2]],
      constants: minmax ? ["min", "max"] : [],
      builtins: false,
    },
    size: n,
    relations: { "<": less },
    constants: minmax ? { min: 0, max: n - 1 } : {},
  };
}

export function cycleGraph(l: number): StructureJson {
  const edges: number[][] = [];
  for (let i = 0; i < l; i++) {
    edges.push([i, i + 1], [i + 1, i]);
  }
  edges.push([0, l], [l, 0]);
  return {
    vocab: { relations: [["E", 2]], constants: [], builtins: false },
    size: l + 1,
    relations: { E: edges },
    constants: {},
  };
}

export function doubleCycle(l: number): StructureJson {
  const one = cycleGraph(l);
  const shift = one.size;
  const edges = [
    ...one.relations.E,
    ...one.relations.E.map(([a, b]) => [a + shift, b + shift]),
  ];
  return {
    vocab: one.vocab,
    size: 2 * one.size,
    relations: { E: edges },
    constants: {},
  };
}

export function onesWord(length: number): StructureJson {
  const base = linearOrder(length);
  return {
    vocab: { relations: [["<", 2], ["R", 1]], constants: [], builtins: false },
    size: length,
    relations: {
      "<": base.relations["<"],
      R: Array.from({ length }, (_v, i) => [i]),
    },
    constants: {},
  };
}

export interface Preset {
  id: string;
  label: string;
  kind: GameKind;
  m: number;
  s?: number;
  left: StructureJson;
  right: StructureJson;
}

export const PRESETS: Preset[] = [
  {
    id: "orders-2-3",
    label: "Orders of sizes 2 and 3, three rounds",
    kind: "ef",
    m: 3,
    left: linearOrder(2),
    right: linearOrder(3),
  },
  {
    id: "orders-2-3-pebble",
    label: "Orders of sizes 2 and 3, three pebbles, three moves",
    kind: "pebble",
    m: 3,
    s: 3,
    left: linearOrder(2),
    right: linearOrder(3),
  },
  {
    id: "marked-orders-6-7",
    label: "Marked orders of sizes 6 and 7, two rounds",
    kind: "ef",
    m: 2,
    left: linearOrder(6, true),
    right: linearOrder(7, true),
  },
  {
    id: "cycle-vs-double",
    label: "Five-cycle vs two five-cycles, two rounds",
    kind: "ef",
    m: 2,
    left: cycleGraph(4),
    right: doubleCycle(4),
  },
  {
    id: "ones-10-9",
    label: "All-ones words of lengths 10 and 9, three rounds",
    kind: "ef",
    m: 3,
    left: onesWord(10),
    right: onesWord(9),
  },
];

export function presetById(id: string): Preset | undefined {
  return PRESETS.find((preset) => preset.id === id);
}

export function parseStructureJson(text: string): StructureJson {
  let data: unknown;
  try {
    data = JSON.parse(text);
  } catch (err) {
    throw new Error(`not valid JSON: ${(err as Error).message}`);
  }
  const candidate = data as Partial<StructureJson>;
  if (
    typeof candidate !== "object" ||
    candidate === null ||
    typeof candidate.size !== "number" ||
    typeof candidate.vocab !== "object"
  ) {
    throw new Error("a structure needs a numeric size and a vocab block");
  }
  return candidate as StructureJson;
}
