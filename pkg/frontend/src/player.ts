/** Offline transcript player: load a recorded transcript file and fold it
 *  into console state, optionally up to a chosen position for scrubbing.
 */

import { applyEnvelope, ConsoleState, initialState } from "./state.js";
import { decodeTranscript, Envelope } from "./wire.js";

export interface Player {
  envelopes: Envelope[];
  position: number;
  state: ConsoleState;
}

export function loadTranscript(text: string, participant = "danny"): Player {
  const envelopes = decodeTranscript(text);
  const player: Player = {
    envelopes,
    position: 0,
    state: initialState(participant),
  };
  seek(player, envelopes.length);
  return player;
}

/** Move the playback position; rewinding rebuilds from the start so the
 *  gap-free reducer invariants keep holding. */
export function seek(player: Player, position: number): void {
  const target = Math.max(0, Math.min(position, player.envelopes.length));
  if (target < player.position) {
    player.state = initialState(player.state.participant,
      player.state.displayName);
    player.position = 0;
  }
  while (player.position < target) {
    const env = player.envelopes[player.position];
    if (env) {
      applyEnvelope(player.state, env);
    }
    player.position += 1;
  }
}
