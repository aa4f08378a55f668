import { readFileSync } from "node:fs";
import { afterEach, describe, expect, it, vi } from "vitest";

import {
  connect,
  eventsUrl,
  retryDelayMs,
  sendChat,
} from "../src/client.js";
import { initialState } from "../src/state.js";

const canonical = readFileSync(
  new URL("./fixtures/canonical.transcript", import.meta.url),
  "utf8",
);
const lines = canonical.split("\n").filter((l) => l.length > 0);

type Listener = (event: MessageEvent) => void;

class FakeSource {
  static created: FakeSource[] = [];
  listeners = new Map<string, Listener>();
  closed = false;
  onerror: (() => void) | null = null;

  constructor(public url: string) {
    FakeSource.created.push(this);
  }

  addEventListener(channel: string, listener: Listener): void {
    this.listeners.set(channel, listener);
  }

  close(): void {
    this.closed = true;
  }

  emitLine(line: string): void {
    const channel = line.split("|")[2] ?? "";
    this.listeners.get(channel)?.({ data: line } as MessageEvent);
  }
}

afterEach(() => {
  FakeSource.created = [];
  vi.useRealTimers();
  vi.unstubAllGlobals();
});

describe("url and backoff helpers", () => {
  it("builds the subscribe url from a cursor", () => {
    expect(eventsUrl("http://h:1/", 7)).toBe("http://h:1/events?cursor=7");
  });

  it("backs off exponentially with a cap", () => {
    expect([0, 1, 2, 3, 9].map(retryDelayMs)).toEqual(
      [500, 1000, 2000, 4000, 5000],
    );
  });
});

describe("live session", () => {
  function start() {
    const state = initialState();
    const session = connect({
      base: "http://h:1",
      state,
      onChange: () => undefined,
      makeSource: (url) => new FakeSource(url) as unknown as EventSource,
    });
    const source = FakeSource.created.at(-1);
    if (!source) {
      throw new Error("no source created");
    }
    return { state, session, source };
  }

  it("subscribes from cursor 0 and applies streamed envelopes in order", () => {
    const { state, session, source } = start();
    expect(source.url).toContain("cursor=0");
    for (const line of lines) {
      source.emitLine(line);
    }
    expect(state.lastSeq).toBe(119);
    expect(state.connection).toBe("live");
    expect(state.byChannel.chat.length).toBe(10);
    session.stop();
    expect(source.closed).toBe(true);
  });

  it("reconnects from the resume cursor without duplicating messages", () => {
    vi.useFakeTimers();
    const { state, session, source } = start();
    for (const line of lines.slice(0, 30)) {
      source.emitLine(line);
    }
    expect(state.lastSeq).toBe(29);
    source.onerror?.();
    expect(state.connection).toBe("lost");
    vi.runAllTimers();
    const next = FakeSource.created.at(-1);
    expect(next).not.toBe(source);
    expect(next?.url).toContain("cursor=30");
    for (const line of lines.slice(25)) {
      next?.emitLine(line);
    }
    expect(state.lastSeq).toBe(119);
    expect(state.byChannel.chat.length).toBe(10);
    expect(state.gap).toBe(false);
    session.stop();
  });

  it("resubscribes when the stream skips a seq", () => {
    vi.useFakeTimers();
    const { state, session, source } = start();
    const [first] = lines;
    const tenth = lines[10];
    if (!first || !tenth) {
      throw new Error("fixture too short");
    }
    source.emitLine(first);
    source.emitLine(tenth);
    expect(state.gap).toBe(true);
    vi.runAllTimers();
    const next = FakeSource.created.at(-1);
    expect(next?.url).toContain("cursor=1");
    session.stop();
  });
});

describe("sendChat", () => {
  it("refuses blank text without touching the network", async () => {
    const fetchSpy = vi.fn();
    vi.stubGlobal("fetch", fetchSpy);
    const state = initialState();
    expect(await sendChat("http://h:1", state, "   ")).toBe(false);
    expect(fetchSpy).not.toHaveBeenCalled();
  });

  it("queues the text for echo only after the server accepts it", async () => {
    vi.stubGlobal(
      "fetch",
      vi.fn(async () => ({ ok: true }) as Response),
    );
    const state = initialState();
    expect(await sendChat("http://h:1", state, "hello", "team")).toBe(true);
    expect(state.pendingSends).toEqual(["hello"]);
    expect(state.byChannel.chat.length).toBe(0);
  });

  it("reports a rejected post and queues nothing", async () => {
    vi.stubGlobal(
      "fetch",
      vi.fn(async () => ({ ok: false }) as Response),
    );
    const state = initialState();
    expect(await sendChat("http://h:1", state, "hello")).toBe(false);
    expect(state.pendingSends).toEqual([]);
  });
});
