// Page wiring: preset/upload selection, board rendering, click-to-move,
// hint pulsing, and the win/loss banner. The service is the single
// source of truth; every interaction re-renders from its view JSON.

import { ApiError, ArenaClient } from "./api.js";
import type { PlayerRole, SessionView, Side, StructureJson } from "./api.js";
import { buildScene, clickAllowed, moveForClick, statusBanner } from "./board.js";
import { PRESETS, parseStructureJson, presetById } from "./presets.js";

const SVG_NS = "http://www.w3.org/2000/svg";

interface PageState {
  client: ArenaClient;
  sessionId: string | null;
  view: SessionView | null;
  structures: { left: StructureJson; right: StructureJson } | null;
  hint: { side: Side; element: number } | null;
  spoilerPebble: number | null;
  busy: boolean;
}

const state: PageState = {
  client: new ArenaClient(""),
  sessionId: null,
  view: null,
  structures: null,
  hint: null,
  spoilerPebble: null,
  busy: false,
};

function el<K extends keyof HTMLElementTagNameMap>(id: string): HTMLElementTagNameMap[K] {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing element #${id}`);
  return found as HTMLElementTagNameMap[K];
}

function svgEl(id: string): SVGSVGElement {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing element #${id}`);
  return found as unknown as SVGSVGElement;
}

function setError(message: string | null): void {
  const box = el<"div">("error");
  box.textContent = message ?? "";
  box.style.display = message ? "block" : "none";
}

function toast(message: string): void {
  const box = el<"div">("toast");
  box.textContent = message;
  box.classList.add("visible");
  window.setTimeout(() => box.classList.remove("visible"), 1800);
}

function renderBoard(container: SVGSVGElement, structure: StructureJson, side: Side): void {
  const view = state.view;
  if (!view) return;
  const hinted = state.hint && state.hint.side === side ? state.hint.element : null;
  const scene = buildScene(structure, side, view, hinted);
  container.setAttribute("viewBox", `0 0 ${scene.width} ${scene.height}`);
  container.innerHTML = "";
  const positions = new Map(scene.nodes.map((node) => [node.element, node]));
  for (const edge of scene.edges) {
    const from = positions.get(edge.from);
    const to = positions.get(edge.to);
    if (!from || !to) continue;
    const line = document.createElementNS(SVG_NS, "line");
    line.setAttribute("x1", String(from.x));
    line.setAttribute("y1", String(from.y));
    line.setAttribute("x2", String(to.x));
    line.setAttribute("y2", String(to.y));
    line.setAttribute("class", edge.directed ? "edge directed" : "edge");
    container.appendChild(line);
  }
  if (scene.orderedLine && scene.nodes.length > 1) {
    const axis = document.createElementNS(SVG_NS, "line");
    axis.setAttribute("x1", String(scene.nodes[0].x));
    axis.setAttribute("y1", String(scene.nodes[0].y));
    axis.setAttribute("x2", String(scene.nodes[scene.nodes.length - 1].x));
    axis.setAttribute("y2", String(scene.nodes[0].y));
    axis.setAttribute("class", "axis");
    container.appendChild(axis);
  }
  for (const node of scene.nodes) {
    const group = document.createElementNS(SVG_NS, "g");
    const circle = document.createElementNS(SVG_NS, "circle");
    circle.setAttribute("cx", String(node.x));
    circle.setAttribute("cy", String(node.y));
    circle.setAttribute("r", "16");
    const classes = ["node"];
    if (node.clickable) classes.push("clickable");
    if (node.hinted) classes.push("hinted");
    if (node.pendingPick) classes.push("pending");
    circle.setAttribute("class", classes.join(" "));
    group.appendChild(circle);
    const label = document.createElementNS(SVG_NS, "text");
    label.setAttribute("x", String(node.x));
    label.setAttribute("y", String(node.y + 34));
    label.setAttribute("class", "label");
    label.textContent = node.label;
    group.appendChild(label);
    node.pebbles.forEach((pebbleIndex, offset) => {
      const pebble = document.createElementNS(SVG_NS, "circle");
      pebble.setAttribute("cx", String(node.x + (offset - 0.5) * 10));
      pebble.setAttribute("cy", String(node.y - 22));
      pebble.setAttribute("r", "7");
      pebble.setAttribute("class", "pebble placed");
      group.appendChild(pebble);
      const index = document.createElementNS(SVG_NS, "text");
      index.setAttribute("x", String(node.x + (offset - 0.5) * 10));
      index.setAttribute("y", String(node.y - 18));
      index.setAttribute("class", "pebble-index");
      index.textContent = String(pebbleIndex);
      group.appendChild(index);
    });
    group.addEventListener("click", () => {
      void handleClick(side, node.element);
    });
    container.appendChild(group);
  }
  const constantsLabel = scene.constants
    .map((c) => `${c.name}=${c.element}`)
    .join("  ");
  el<"div">(side === "left" ? "left-constants" : "right-constants").textContent =
    constantsLabel;
}

function renderHistory(view: SessionView): void {
  const list = el<"ol">("history");
  list.innerHTML = "";
  for (const move of view.history) {
    const item = document.createElement("li");
    const pebble = move.pebble !== undefined && move.pebble !== null ? ` (pebble ${move.pebble})` : "";
    item.textContent = `${move.by}: ${move.element} in ${move.structure}${pebble}`;
    list.appendChild(item);
  }
}

function render(): void {
  const view = state.view;
  const panel = el<"div">("game-panel");
  if (!view || !state.structures) {
    panel.style.display = "none";
    return;
  }
  panel.style.display = "block";
  renderBoard(svgEl("left-board"), state.structures.left, "left");
  renderBoard(svgEl("right-board"), state.structures.right, "right");
  renderHistory(view);
  const banner = el<"div">("banner");
  banner.textContent = statusBanner(view);
  banner.className = view.status === "ongoing" ? "banner" : `banner ${view.status}`;
  el<"div">("side-line").textContent =
    `You play ${view.humanSide}; ${view.kind === "pebble" ? `${view.s} pebbles, ` : ""}` +
    `${view.m} move(s) total.`;
  el<"button">("hint-button").disabled =
    view.status !== "ongoing" || view.toMove !== view.humanSide;
  const pebblePicker = el<"div">("pebble-picker");
  pebblePicker.style.display =
    view.kind === "pebble" && view.humanSide === "Spoiler" ? "block" : "none";
}

async function handleClick(side: Side, element: number): Promise<void> {
  const view = state.view;
  if (!view || !state.sessionId || state.busy) return;
  if (!clickAllowed(view, side)) return; // inert target
  const move = moveForClick(view, side, element, state.spoilerPebble);
  if (move === null) {
    toast("pick a pebble first");
    return;
  }
  state.busy = true;
  try {
    state.view = await state.client.playMove(state.sessionId, move);
    state.hint = null;
  } catch (err) {
    if (err instanceof ApiError) toast(err.message);
    else throw err;
  } finally {
    state.busy = false;
  }
  render();
}

async function startSession(): Promise<void> {
  setError(null);
  const presetChoice = el<"select">("preset").value;
  const humanSide = el<"select">("side").value as PlayerRole;
  let left: StructureJson;
  let right: StructureJson;
  let kind: "ef" | "pebble";
  let m: number;
  let s: number | undefined;
  if (presetChoice === "custom") {
    try {
      left = parseStructureJson(el<"textarea">("left-json").value);
      right = parseStructureJson(el<"textarea">("right-json").value);
    } catch (err) {
      setError(`upload rejected: ${(err as Error).message}`);
      return;
    }
    kind = el<"select">("kind").value as "ef" | "pebble";
    m = Number(el<"input">("moves").value);
    s = kind === "pebble" ? Number(el<"input">("pebbles").value) : undefined;
  } else {
    const preset = presetById(presetChoice);
    if (!preset) {
      setError("unknown preset");
      return;
    }
    ({ left, right, kind, m } = preset);
    s = preset.s;
  }
  try {
    const created = await state.client.createSession({
      kind,
      m,
      s,
      left,
      right,
      humanSide,
    });
    state.sessionId = created.id;
    state.view = created.view;
    state.structures = { left, right };
    state.hint = null;
    state.spoilerPebble = kind === "pebble" ? 0 : null;
    if (kind === "pebble") buildPebblePicker(s ?? 1);
  } catch (err) {
    setError(err instanceof ApiError ? err.message : String(err));
    return;
  }
  render();
}

function buildPebblePicker(s: number): void {
  const picker = el<"div">("pebble-picker");
  picker.innerHTML = "<span>pebble:</span>";
  for (let i = 0; i < s; i++) {
    const button = document.createElement("button");
    button.textContent = String(i);
    button.className = i === state.spoilerPebble ? "pebble-choice active" : "pebble-choice";
    button.addEventListener("click", () => {
      state.spoilerPebble = i;
      buildPebblePicker(s);
    });
    picker.appendChild(button);
  }
}

async function requestHint(): Promise<void> {
  if (!state.sessionId) return;
  try {
    const hint = await state.client.hint(state.sessionId);
    state.hint = { side: hint.move.structure, element: hint.move.element };
    if (hint.move.pebble !== null && state.view?.humanSide === "Spoiler") {
      state.spoilerPebble = hint.move.pebble;
      if (state.view?.kind === "pebble") buildPebblePicker(state.view.s ?? 1);
    }
    toast(hint.winning ? "a winning move pulses" : "no winning move; best effort pulses");
  } catch (err) {
    if (err instanceof ApiError) toast(err.message);
    else throw err;
  }
  render();
}

function populatePresets(): void {
  const select = el<"select">("preset");
  for (const preset of PRESETS) {
    const option = document.createElement("option");
    option.value = preset.id;
    option.textContent = preset.label;
    select.appendChild(option);
  }
  const custom = document.createElement("option");
  custom.value = "custom";
  custom.textContent = "Custom upload";
  select.appendChild(custom);
  select.addEventListener("change", () => {
    el<"div">("custom-form").style.display =
      select.value === "custom" ? "block" : "none";
  });
}

export function init(): void {
  populatePresets();
  el<"button">("start-button").addEventListener("click", () => void startSession());
  el<"button">("hint-button").addEventListener("click", () => void requestHint());
}

if (typeof document !== "undefined" && document.getElementById("start-button")) {
  init();
}
