// Typed client for the game-arena HTTP API. All rule evaluation happens
// server-side; this module only moves JSON around.

export type Side = "left" | "right";
export type PlayerRole = "Spoiler" | "Duplicator";
export type GameKind = "ef" | "pebble";
export type Status = "ongoing" | "humanWon" | "engineWon";

export interface StructureJson {
  vocab: {
    relations: [string, number][];
    constants: string[];
    builtins: boolean;
  };
  size: number;
  relations: Record<string, number[][]>;
  constants: Record<string, number>;
}

export interface MoveRecord {
  by: "human" | "engine";
  structure: Side;
  element: number;
  pebble?: number | null;
}

export interface PendingPick {
  structure: Side;
  element: number;
  pebble: number | null;
}

export interface SessionView {
  id: string;
  kind: GameKind;
  m: number;
  s: number | null;
  humanSide: PlayerRole;
  pebbles: { left: (number | null)[]; right: (number | null)[] };
  history: MoveRecord[];
  movesLeft: number;
  status: Status;
  toMove: PlayerRole | null;
  pending: PendingPick | null;
  lastEngineMove: MoveRecord | null;
  failureReason: string | null;
}

export interface SessionConfig {
  kind: GameKind;
  m: number;
  s?: number;
  left: StructureJson;
  right: StructureJson;
  humanSide: PlayerRole;
}

export interface MoveRequest {
  structure: Side;
  element: number;
  pebble?: number;
}

export interface Hint {
  move: { structure: Side; element: number; pebble: number | null };
  winning: boolean;
}

export class ApiError extends Error {
  constructor(readonly status: number, detail: string) {
    super(detail);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ArenaClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(this.base + path, init);
    const body = await response.json().catch(() => ({}));
    if (!response.ok) {
      const detail =
        typeof body === "object" && body !== null && "detail" in body
          ? String((body as { detail: unknown }).detail)
          : response.statusText;
      throw new ApiError(response.status, detail);
    }
    return body as T;
  }

  createSession(config: SessionConfig): Promise<{ id: string; view: SessionView }> {
    return this.request("/sessions", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(config),
    });
  }

  getView(id: string): Promise<SessionView> {
    return this.request(`/sessions/${id}`);
  }

  playMove(id: string, move: MoveRequest): Promise<SessionView> {
    return this.request(`/sessions/${id}/moves`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(move),
    });
  }

  hint(id: string): Promise<Hint> {
    return this.request(`/sessions/${id}/hint`);
  }
}
