/** Transcript wire format: one envelope per line,
 *  `seq|tick|channel|sender|addressee|<json string surface>|<json mr>`.
 *  The console only decodes; every pane is derived from decoded envelopes
 *  and never computes meaning on its own.
 */

export const CHANNELS = [
  "chat",
  "thought",
  "agenda-update",
  "vmr",
  "tmr",
  "map",
] as const;

export type Channel = (typeof CHANNELS)[number];

export interface MrFrame {
  id: string;
  concept: string;
  props: Record<string, string[]>;
}

/** Attached meaning representation of a robot utterance or percept. */
export interface FrameGraph {
  frames: MrFrame[];
  root: string;
}

export type Mr = FrameGraph | Record<string, unknown> | null;

export interface Envelope {
  seq: number;
  tick: number;
  channel: Channel;
  sender: string;
  addressee: string;
  surface: string;
  mr: Mr;
}

export class WireError extends Error {}

function isChannel(value: string): value is Channel {
  return (CHANNELS as readonly string[]).includes(value);
}

/** Decode one transcript line. Throws WireError on any malformed field. */
export function decodeLine(line: string): Envelope {
  const parts = splitFields(line);
  if (parts.length !== 6) {
    throw new WireError(`expected 6 fields, got ${parts.length}`);
  }
  const [seqText, tickText, channel, sender, addressee, payload] = parts as [
    string, string, string, string, string, string];
  const seq = parseCount(seqText, "seq");
  const tick = parseCount(tickText, "tick");
  if (!isChannel(channel)) {
    throw new WireError(`unknown channel ${JSON.stringify(channel)}`);
  }
  const { surface, mr } = parsePayload(payload);
  return { seq, tick, channel, sender, addressee, surface, mr };
}

/** Split on the first five pipes; the payload may contain more. */
function splitFields(line: string): string[] {
  const parts: string[] = [];
  let rest = line;
  for (let i = 0; i < 5; i += 1) {
    const at = rest.indexOf("|");
    if (at < 0) {
      parts.push(rest);
      return parts;
    }
    parts.push(rest.slice(0, at));
    rest = rest.slice(at + 1);
  }
  parts.push(rest);
  return parts;
}

function parseCount(text: string, field: string): number {
  if (!/^\d+$/.test(text)) {
    throw new WireError(`${field} must be a non-negative integer, got ${JSON.stringify(text)}`);
  }
  return Number(text);
}

function parsePayload(payload: string): { surface: string; mr: Mr } {
  // the surface is a JSON string literal followed by "|" and the MR JSON
  let surface: unknown;
  let end = -1;
  for (let at = payload.indexOf('"', 1); at >= 0; at = payload.indexOf('"', at + 1)) {
    const candidate = payload.slice(0, at + 1);
    try {
      surface = JSON.parse(candidate);
    } catch {
      continue;
    }
    end = at + 1;
    break;
  }
  if (end < 0 || typeof surface !== "string") {
    throw new WireError("surface must be a JSON string");
  }
  if (payload[end] !== "|") {
    throw new WireError("surface must be followed by the MR field");
  }
  const mrText = payload.slice(end + 1);
  let mr: Mr;
  try {
    mr = JSON.parse(mrText);
  } catch {
    throw new WireError("MR field is not valid JSON");
  }
  return { surface, mr };
}

/** Decode a whole transcript file (blank trailing line tolerated). */
export function decodeTranscript(text: string): Envelope[] {
  return text
    .split("\n")
    .filter((line) => line.length > 0)
    .map(decodeLine);
}

export function isFrameGraph(mr: Mr): mr is FrameGraph {
  return (
    mr !== null &&
    typeof mr === "object" &&
    Array.isArray((mr as FrameGraph).frames) &&
    typeof (mr as FrameGraph).root === "string"
  );
}
