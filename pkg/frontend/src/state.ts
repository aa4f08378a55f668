/** Console state and the single reducer that folds envelopes into it.
 *
 *  Invariants kept here:
 *  - per-channel lists are gap-free: a seq gap marks the state dirty and the
 *    offending envelope is NOT applied (the client resubscribes from the
 *    cursor instead);
 *  - duplicates (seq already seen) are dropped, so reconnects are idempotent;
 *  - chat is append-only in seq order, the UI never reorders it;
 *  - a sent message is echoed only once its server-assigned envelope arrives.
 */

import { Channel, CHANNELS, Envelope, isFrameGraph, Mr } from "./wire.js";

export type Cell = [number, number];

export interface ZoneInfo {
  id: string;
  label: string;
  type: string;
  cells: Cell[];
  waypoints: Cell[];
}

export interface Layout {
  scenario: string;
  seed: number;
  width: number;
  height: number;
  rows: string[];
  leader: string;
  zones: ZoneInfo[];
  robots: { id: string; class: string; base: Cell }[];
}

export interface RobotPose {
  id: string;
  at: Cell;
  carried: string | null;
  collision: boolean;
}

export type Connection = "idle" | "connecting" | "live" | "lost";

export interface ConsoleState {
  connection: Connection;
  participant: string;
  displayName: string;
  lastSeq: number;
  gap: boolean;
  byChannel: Record<Channel, Envelope[]>;
  layout: Layout | null;
  poses: Record<string, RobotPose>;
  mapTick: number;
  robots: string[];
  selectedRobot: string | null;
  thoughts: Record<string, Envelope[]>;
  latestTmr: Record<string, Envelope>;
  latestVmr: Record<string, Envelope>;
  latestAgenda: Record<string, Envelope>;
  pendingSends: string[];
}

export function initialState(
  participant = "danny",
  displayName = "Danny",
): ConsoleState {
  const byChannel = {} as Record<Channel, Envelope[]>;
  for (const channel of CHANNELS) {
    byChannel[channel] = [];
  }
  return {
    connection: "idle",
    participant,
    displayName,
    lastSeq: -1,
    gap: false,
    byChannel,
    layout: null,
    poses: {},
    mapTick: 0,
    robots: [],
    selectedRobot: null,
    thoughts: {},
    latestTmr: {},
    latestVmr: {},
    latestAgenda: {},
    pendingSends: [],
  };
}

function isLayout(mr: Mr): mr is Layout & Record<string, unknown> {
  return (
    mr !== null &&
    typeof mr === "object" &&
    Array.isArray((mr as { rows?: unknown }).rows) &&
    typeof (mr as { seed?: unknown }).seed === "number"
  );
}

interface PoseSnapshot {
  tick: number;
  robots: { id: string; at: Cell; carried: string | null; collision: boolean }[];
}

function isPoseSnapshot(mr: Mr): mr is PoseSnapshot & Record<string, unknown> {
  return (
    mr !== null &&
    typeof mr === "object" &&
    Array.isArray((mr as { robots?: unknown }).robots)
  );
}

/** Fold one envelope into the state. Returns what happened to it. */
export function applyEnvelope(
  state: ConsoleState,
  env: Envelope,
): "applied" | "duplicate" | "gap" {
  if (env.seq <= state.lastSeq) {
    return "duplicate";
  }
  if (state.lastSeq >= 0 && env.seq !== state.lastSeq + 1) {
    state.gap = true;
    return "gap";
  }
  state.lastSeq = env.seq;
  state.byChannel[env.channel].push(env);

  switch (env.channel) {
    case "map":
      if (isLayout(env.mr)) {
        state.layout = env.mr;
        state.robots = env.mr.robots.map((r) => r.id).sort();
        if (state.selectedRobot === null) {
          state.selectedRobot = env.mr.leader;
        }
      } else if (isPoseSnapshot(env.mr)) {
        state.mapTick = env.mr.tick;
        for (const pose of env.mr.robots) {
          state.poses[pose.id] = pose;
        }
      }
      break;
    case "thought": {
      const list = state.thoughts[env.sender] ?? [];
      list.push(env);
      state.thoughts[env.sender] = list;
      break;
    }
    case "tmr":
      state.latestTmr[env.sender] = env;
      break;
    case "vmr":
      state.latestVmr[env.sender] = env;
      break;
    case "agenda-update":
      state.latestAgenda[env.sender] = env;
      break;
    case "chat":
      if (env.sender === state.participant) {
        const at = state.pendingSends.indexOf(env.surface);
        if (at >= 0) {
          state.pendingSends.splice(at, 1);
        }
      }
      break;
  }
  return "applied";
}

export function applyAll(state: ConsoleState, envelopes: Envelope[]): void {
  for (const env of envelopes) {
    applyEnvelope(state, env);
  }
}

/** The send box accepts only non-blank text. */
export function sendAllowed(text: string): boolean {
  return text.trim().length > 0;
}

/** Record a POST-accepted message awaiting its server-assigned envelope. */
export function markSendQueued(state: ConsoleState, text: string): void {
  state.pendingSends.push(text);
}

/** Cursor for (re)subscribing without duplicates. */
export function resumeCursor(state: ConsoleState): number {
  return state.lastSeq + 1;
}

export function selectRobot(state: ConsoleState, robot: string): void {
  if (state.robots.includes(robot)) {
    state.selectedRobot = robot;
  }
}

/** Zone letter (grid cell content) to zone type, for map coloring. */
export function letterTypes(layout: Layout): Record<string, string> {
  const types: Record<string, string> = {};
  for (const zone of layout.zones) {
    const [cell] = zone.cells;
    if (!cell) {
      continue;
    }
    const [x, y] = cell;
    const letter = layout.rows[y]?.[x];
    if (letter) {
      types[letter] = zone.type;
    }
  }
  return types;
}

export { isFrameGraph };
