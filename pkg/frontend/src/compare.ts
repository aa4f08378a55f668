/** Transcript parity matcher.
 *
 *  Two recordings of the same dialogue count as equal when their chat
 *  channels carry the same messages in the same order with the same attached
 *  meaning representations. Arrival bookkeeping (seq numbers and the tick a
 *  message landed on) is excluded: a human typing the same texts live lands
 *  them on different ticks than a scripted run, which also shifts every
 *  derived envelope's seq.
 */

import { decodeTranscript, Envelope } from "./wire.js";

export interface MatchResult {
  equal: boolean;
  detail: string;
}

function chatKey(env: Envelope): string {
  return JSON.stringify([env.sender, env.addressee, env.surface, env.mr]);
}

export function chatProjection(transcript: string): string[] {
  return decodeTranscript(transcript)
    .filter((env) => env.channel === "chat")
    .map(chatKey);
}

export function matchTranscripts(
  left: string,
  right: string,
): MatchResult {
  const a = chatProjection(left);
  const b = chatProjection(right);
  const shared = Math.min(a.length, b.length);
  for (let i = 0; i < shared; i += 1) {
    if (a[i] !== b[i]) {
      return {
        equal: false,
        detail: `chat message ${i} differs: ${a[i]} vs ${b[i]}`,
      };
    }
  }
  if (a.length !== b.length) {
    return {
      equal: false,
      detail: `chat length differs: ${a.length} vs ${b.length}`,
    };
  }
  return { equal: true, detail: `${a.length} chat messages match` };
}
