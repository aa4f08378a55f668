/** Live session glue: subscribe to the event stream, post chat and control
 *  commands. Everything stateful lives in the reducer; this module only moves
 *  bytes and reports connection status.
 */

import {
  applyEnvelope,
  ConsoleState,
  markSendQueued,
  resumeCursor,
  sendAllowed,
} from "./state.js";
import { decodeLine } from "./wire.js";

export function eventsUrl(base: string, cursor: number): string {
  return `${base.replace(/\/$/, "")}/events?cursor=${cursor}`;
}

/** Retry backoff: 0.5s, 1s, 2s, capped at 5s. */
export function retryDelayMs(attempt: number): number {
  return Math.min(500 * 2 ** Math.max(0, attempt), 5000);
}

export interface LiveSession {
  stop(): void;
}

export interface ConnectOptions {
  base: string;
  state: ConsoleState;
  onChange(): void;
  makeSource?(url: string): EventSource;
}

/** Connect and keep the state fed; reconnects resume from the cursor, and a
 *  detected gap forces a resubscribe so the lists stay gap-free. */
export function connect(options: ConnectOptions): LiveSession {
  const { base, state, onChange } = options;
  const makeSource =
    options.makeSource ?? ((url: string) => new EventSource(url));
  let source: EventSource | null = null;
  let stopped = false;
  let attempt = 0;
  let retryTimer: ReturnType<typeof setTimeout> | null = null;

  const open = (): void => {
    if (stopped) {
      return;
    }
    state.connection = state.lastSeq < 0 ? "connecting" : "live";
    onChange();
    source = makeSource(eventsUrl(base, resumeCursor(state)));
    const handle = (event: MessageEvent): void => {
      let parsed;
      try {
        parsed = decodeLine(String(event.data));
      } catch {
        return;
      }
      const result = applyEnvelope(state, parsed);
      if (result === "gap") {
        resubscribe();
        return;
      }
      state.connection = "live";
      attempt = 0;
      onChange();
    };
    for (const channel of ["chat", "thought", "agenda-update", "vmr", "tmr", "map"]) {
      source.addEventListener(channel, handle as EventListener);
    }
    source.onerror = () => {
      if (stopped) {
        return;
      }
      state.connection = "lost";
      onChange();
      resubscribe();
    };
  };

  const resubscribe = (): void => {
    source?.close();
    source = null;
    if (stopped || retryTimer !== null) {
      return;
    }
    retryTimer = setTimeout(() => {
      retryTimer = null;
      attempt += 1;
      open();
    }, retryDelayMs(attempt));
  };

  open();
  return {
    stop(): void {
      stopped = true;
      if (retryTimer !== null) {
        clearTimeout(retryTimer);
      }
      source?.close();
    },
  };
}

async function postJson(
  base: string,
  path: string,
  body: unknown,
): Promise<Response> {
  return fetch(`${base.replace(/\/$/, "")}${path}`, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(body),
  });
}

/** Post a chat line. The local echo happens only when the server-assigned
 *  envelope comes back over the stream. */
export async function sendChat(
  base: string,
  state: ConsoleState,
  text: string,
  addressee = "team",
): Promise<boolean> {
  if (!sendAllowed(text)) {
    return false;
  }
  const response = await postJson(base, "/chat", {
    text,
    sender: state.participant,
    addressee,
  });
  if (!response.ok) {
    return false;
  }
  markSendQueued(state, text);
  return true;
}

export async function sendControl(
  base: string,
  action: "pause" | "resume" | "step",
): Promise<boolean> {
  const response = await postJson(base, "/control", { action });
  return response.ok;
}
