import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";

import { loadTranscript, seek } from "../src/player.js";

const canonical = readFileSync(
  new URL("./fixtures/canonical.transcript", import.meta.url),
  "utf8",
);

describe("offline transcript player", () => {
  it("loads a whole recording into console state", () => {
    const player = loadTranscript(canonical);
    expect(player.envelopes.length).toBe(120);
    expect(player.position).toBe(120);
    expect(player.state.lastSeq).toBe(119);
    expect(player.state.byChannel.chat.length).toBe(10);
    expect(player.state.layout?.scenario).toBe("apartment");
  });

  it("scrubs backward by rebuilding, keeping the gap-free invariant", () => {
    const player = loadTranscript(canonical);
    seek(player, 6);
    expect(player.position).toBe(6);
    expect(player.state.lastSeq).toBe(5);
    expect(player.state.gap).toBe(false);
    expect(player.state.byChannel.chat.length).toBe(1);
    expect(player.state.byChannel.chat[0]?.surface).toContain("I lost my keys");
  });

  it("scrubs forward incrementally and clamps at the end", () => {
    const player = loadTranscript(canonical);
    seek(player, 6);
    seek(player, 60);
    expect(player.state.lastSeq).toBe(59);
    seek(player, 9999);
    expect(player.position).toBe(120);
    expect(player.state.lastSeq).toBe(119);
  });
});
