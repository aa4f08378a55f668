import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";

import {
  el,
  findAll,
  renderConsole,
  renderFrameGraph,
  textOf,
  toHtml,
  VNode,
} from "../src/render.js";
import { applyAll, initialState } from "../src/state.js";
import { decodeTranscript, FrameGraph } from "../src/wire.js";

const canonical = readFileSync(
  new URL("./fixtures/canonical.transcript", import.meta.url),
  "utf8",
);

function fullState() {
  const state = initialState();
  applyAll(state, decodeTranscript(canonical));
  return state;
}

describe("console rendering", () => {
  const state = fullState();
  const tree = renderConsole(state);

  it("renders all seven labeled regions plus the map", () => {
    for (let id = 1; id <= 7; id += 1) {
      const hits = findAll(tree, (n) => n.attrs["id"] === `region-${id}`);
      expect(hits.length, `region-${id}`).toBe(1);
    }
    expect(findAll(tree, (n) => n.attrs["id"] === "map-pane").length).toBe(1);
  });

  it("renders chat rows in exactly the received seq order", () => {
    const rows = findAll(tree, (n) => n.attrs["class"] === "chat-row");
    const seqs = rows.map((row) => Number(row.attrs["data-seq"]));
    expect(seqs).toEqual(state.byChannel.chat.map((env) => env.seq));
    expect(seqs).toEqual([...seqs].sort((a, b) => a - b));
    const texts = rows.map(textOf).join("\n");
    expect(texts).toContain("Robots, I lost my keys somewhere in the apartment.");
    expect(texts).toContain("I found your keys by the sofa!");
  });

  it("shows the leader's agenda with the collaborative plan status", () => {
    const [agenda] = findAll(tree, (n) => n.attrs["id"] === "region-5");
    const text = agenda ? textOf(agenda) : "";
    expect(text).toContain("@COLLABORATIVE-ACTIVITY");
    expect(text).toMatch(/\[report\]|\[await-zone-reports\]|\[\w+\]/);
    const items = agenda
      ? findAll(agenda, (n) => (n.attrs["class"] ?? "").startsWith("agenda-item"))
      : [];
    expect(items.length).toBeGreaterThan(0);
  });

  it("renders detected-object features in the VMR inspector", () => {
    const panes = findAll(tree, (n) =>
      (n.attrs["class"] ?? "").includes("vmr"));
    const text = panes.map(textOf).join("\n");
    expect(text).toContain("keychain-color");
    expect(text).toContain("red");
  });

  it("renders per-robot thought transcripts", () => {
    const [paneA] = findAll(tree, (n) => n.attrs["id"] === "region-4");
    const [paneB] = findAll(tree, (n) => n.attrs["id"] === "region-7");
    expect(paneA && textOf(paneA)).toContain("tick");
    expect(paneB && textOf(paneB)).toContain("tick");
    const both = [paneA, paneB].map((p) => (p ? textOf(p) : "")).join("\n");
    expect(both).toContain("grounded to");
  });

  it("colors the map by zone type and marks robot poses", () => {
    const [map] = findAll(tree, (n) => n.attrs["id"] === "map-pane");
    expect(map).toBeDefined();
    if (!map) {
      return;
    }
    const cells = findAll(map, (n) => (n.attrs["class"] ?? "").startsWith("cell"));
    expect(cells.length).toBe(20 * 14);
    for (const type of ["type-a", "type-b", "type-c"]) {
      expect(cells.some((c) => (c.attrs["class"] ?? "").includes(type))).toBe(true);
    }
    const robots = cells.filter((c) => (c.attrs["class"] ?? "").includes("robot"));
    expect(robots.length).toBe(2);
  });
});

describe("frame graph widget", () => {
  const graph: FrameGraph = {
    frames: [
      {
        id: "INFORM-1",
        concept: "INFORM",
        props: { proposition: ["FOUND-1"], speaker: ["ugv"] },
      },
      {
        id: "FOUND-1",
        concept: "OBJECT-LOCATED",
        props: { object: ["KEY-1"], zone: ["under-sofa"] },
      },
    ],
    root: "INFORM-1",
  };

  it("nests referenced frames under the root, expandable", () => {
    const tree = renderFrameGraph(graph);
    const details = findAll(tree, (n) => n.tag === "details");
    expect(details.map((d) => d.attrs["data-frame"])).toEqual([
      "INFORM-1",
      "FOUND-1",
    ]);
    const [root] = details;
    expect(root && "open" in root.attrs).toBe(true);
    const nested = root
      ? findAll(root, (n) => n.attrs["data-frame"] === "FOUND-1")
      : [];
    expect(nested.length).toBe(1);
  });

  it("derives pane content only from the payload bytes", () => {
    const text = textOf(renderFrameGraph(graph));
    expect(text).toContain("OBJECT-LOCATED");
    expect(text).toContain("zone: under-sofa");
  });
});

describe("html serialization", () => {
  it("escapes markup in message text", () => {
    const html = toHtml(el("div", { title: 'a"b' }, "<script>alert(1)</script>"));
    expect(html).toBe(
      '<div title="a&quot;b">&lt;script&gt;alert(1)&lt;/script&gt;</div>',
    );
  });

  it("round-trips a small tree", () => {
    const node: VNode = el("ul", {}, el("li", {}, "one"), el("li", {}, "two"));
    expect(toHtml(node)).toBe("<ul><li>one</li><li>two</li></ul>");
  });
});
