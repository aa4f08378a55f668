/** Pure view layer: console state in, a renderable element tree out.
 *
 *  The tree is plain data so tests can assert structure and order without a
 *  browser; the entry point materializes it 1:1 into DOM nodes. Panes mirror
 *  a seven-region operator console: (1) chat, (2) TMR inspector, (3)/(6)
 *  per-robot VMR inspectors, (4)/(7) per-robot thought transcripts,
 *  (5) agenda, plus the live map.
 */

import {
  ConsoleState,
  Layout,
  letterTypes,
} from "./state.js";
import { Envelope, FrameGraph, isFrameGraph, MrFrame } from "./wire.js";

export type VChild = VNode | string;

export interface VNode {
  tag: string;
  attrs: Record<string, string>;
  children: VChild[];
}

export function el(
  tag: string,
  attrs: Record<string, string> = {},
  ...children: VChild[]
): VNode {
  return { tag, attrs, children };
}

const HTML_ESCAPES: Record<string, string> = {
  "&": "&amp;",
  "<": "&lt;",
  ">": "&gt;",
  '"': "&quot;",
};

function escapeHtml(text: string): string {
  return text.replace(/[&<>"]/g, (ch) => HTML_ESCAPES[ch] ?? ch);
}

export function toHtml(node: VChild): string {
  if (typeof node === "string") {
    return escapeHtml(node);
  }
  const attrs = Object.entries(node.attrs)
    .map(([key, value]) => ` ${key}="${escapeHtml(value)}"`)
    .join("");
  const inner = node.children.map(toHtml).join("");
  return `<${node.tag}${attrs}>${inner}</${node.tag}>`;
}

/** Depth-first search of a rendered tree, for tests and wiring. */
export function findAll(
  node: VChild,
  pred: (node: VNode) => boolean,
  acc: VNode[] = [],
): VNode[] {
  if (typeof node === "string") {
    return acc;
  }
  if (pred(node)) {
    acc.push(node);
  }
  for (const child of node.children) {
    findAll(child, pred, acc);
  }
  return acc;
}

export function textOf(node: VChild): string {
  if (typeof node === "string") {
    return node;
  }
  return node.children.map(textOf).join("");
}

// -- region builders ---------------------------------------------------------

function region(
  id: number,
  title: string,
  body: VChild[],
  extraClass = "",
): VNode {
  return el(
    "section",
    { id: `region-${id}`, class: `region ${extraClass}`.trim() },
    el("h2", {}, `${id}. ${title}`),
    ...body,
  );
}

function chatRow(env: Envelope): VNode {
  return el(
    "div",
    { class: "chat-row", "data-seq": String(env.seq) },
    el("span", { class: "chat-tick" }, `t${env.tick}`),
    el("span", { class: "chat-who" }, `${env.sender} → ${env.addressee}`),
    el("span", { class: "chat-text" }, env.surface),
  );
}

export function renderChat(state: ConsoleState): VNode {
  const rows = state.byChannel.chat.map(chatRow);
  const pending = state.pendingSends.length
    ? [el("div", { class: "chat-pending" },
        `sending ${state.pendingSends.length}…`)]
    : [];
  return region(1, "Chat transcript", [...rows, ...pending], "chat");
}

function frameNode(
  frame: MrFrame,
  byId: Map<string, MrFrame>,
  seen: Set<string>,
): VNode {
  const open: Record<string, string> =
    seen.size === 0 ? { open: "" } : {};
  seen.add(frame.id);
  const props: VChild[] = [];
  for (const [key, values] of Object.entries(frame.props)) {
    const items: VChild[] = [`${key}: ${values.join(", ")}`];
    for (const value of values) {
      const child = byId.get(value);
      if (child && !seen.has(child.id)) {
        items.push(frameNode(child, byId, seen));
      }
    }
    props.push(el("li", { class: "frame-prop" }, ...items));
  }
  return el(
    "details",
    { class: "frame", "data-frame": frame.id, ...open },
    el("summary", {}, `${frame.id} (${frame.concept})`),
    el("ul", {}, ...props),
  );
}

/** Expandable frame tree, byte-derived from an attached MR payload. */
export function renderFrameGraph(graph: FrameGraph): VNode {
  const byId = new Map(graph.frames.map((f) => [f.id, f]));
  const root = byId.get(graph.root);
  const seen = new Set<string>();
  const nodes: VChild[] = [];
  if (root) {
    nodes.push(frameNode(root, byId, seen));
  }
  for (const frame of graph.frames) {
    if (!seen.has(frame.id)) {
      nodes.push(frameNode(frame, byId, seen));
    }
  }
  return el("div", { class: "frame-graph" }, ...nodes);
}

function inspectorBody(env: Envelope | undefined): VChild[] {
  if (!env) {
    return [el("p", { class: "empty" }, "nothing yet")];
  }
  const head = el("p", { class: "inspector-surface" },
    `t${env.tick} ${env.surface}`);
  if (isFrameGraph(env.mr)) {
    return [head, renderFrameGraph(env.mr)];
  }
  return [head, el("pre", {}, JSON.stringify(env.mr, null, 1))];
}

export function renderTmrInspector(state: ConsoleState): VNode {
  const robot = state.selectedRobot ?? "";
  return region(2, `TMRs (${robot || "no robot"})`,
    inspectorBody(robot ? state.latestTmr[robot] : undefined), "tmr");
}

interface AgendaItem {
  pid: number;
  parent: number | null;
  priority: number;
  script: string;
  section: string;
  status: string;
}

function agendaItems(env: Envelope | undefined): AgendaItem[] {
  if (!env || env.mr === null || typeof env.mr !== "object") {
    return [];
  }
  const items = (env.mr as { items?: AgendaItem[] }).items;
  return Array.isArray(items) ? items : [];
}

export function renderAgenda(state: ConsoleState): VNode {
  const robot = state.selectedRobot ?? "";
  const rows = agendaItems(robot ? state.latestAgenda[robot] : undefined).map(
    (item) =>
      el(
        "li",
        { class: `agenda-item status-${item.status}`, "data-pid": String(item.pid) },
        `${item.script} [${item.section}] ${item.status} p${item.priority}`,
      ),
  );
  const body = rows.length
    ? [el("ol", { class: "agenda" }, ...rows)]
    : [el("p", { class: "empty" }, "nothing yet")];
  return region(5, `Agenda (${robot || "no robot"})`, body, "agenda");
}

function thoughtRows(state: ConsoleState, robot: string): VChild[] {
  const rows = (state.thoughts[robot] ?? []).map((env) =>
    el("div", { class: "thought-row", "data-seq": String(env.seq) },
      env.surface),
  );
  return rows.length ? rows : [el("p", { class: "empty" }, "nothing yet")];
}

export function renderMap(state: ConsoleState): VNode {
  const layout = state.layout;
  if (!layout) {
    return el("section", { id: "map-pane", class: "region map" },
      el("h2", {}, "Map"),
      el("p", { class: "empty" }, "waiting for layout"));
  }
  const types = letterTypes(layout);
  const at = new Map<string, string>();
  for (const pose of Object.values(state.poses)) {
    at.set(`${pose.at[0]},${pose.at[1]}`, pose.id);
  }
  for (const robot of layout.robots) {
    if (!Object.keys(state.poses).length) {
      at.set(`${robot.base[0]},${robot.base[1]}`, robot.id);
    }
  }
  const rows: VChild[] = [];
  for (let y = 0; y < layout.height; y += 1) {
    const cells: VChild[] = [];
    const row = layout.rows[y] ?? "";
    for (let x = 0; x < layout.width; x += 1) {
      const letter = row[x] ?? ".";
      let cls = "cell";
      if (letter === "#") {
        cls += " wall";
      } else if (letter !== ".") {
        cls += ` zone type-${types[letter] ?? "unknown"}`;
      }
      const robot = at.get(`${x},${y}`);
      const mark = robot ? robot[0]?.toUpperCase() ?? "" : "";
      if (robot) {
        cls += " robot";
      }
      cells.push(el("span", { class: cls, "data-xy": `${x},${y}` }, mark));
    }
    rows.push(el("div", { class: "map-row" }, ...cells));
  }
  const legend = layout.zones
    .map((z) => `${z.label} (${z.type})`)
    .join(" · ");
  return el("section", { id: "map-pane", class: "region map" },
    el("h2", {}, `Map t${state.mapTick}`),
    el("div", { class: "grid" }, ...rows),
    el("p", { class: "legend" }, legend));
}

export function renderBanner(state: ConsoleState): VNode {
  const classes: Record<string, string> = {
    idle: "banner idle",
    connecting: "banner connecting",
    live: "banner live",
    lost: "banner lost",
  };
  const text: Record<string, string> = {
    idle: "not connected",
    connecting: "connecting…",
    live: state.gap ? "resynchronizing…" : "live",
    lost: "connection lost, retrying…",
  };
  return el("div", { class: classes[state.connection] ?? "banner" },
    text[state.connection] ?? state.connection);
}

/** The whole console: banner, seven regions, map. */
export function renderConsole(state: ConsoleState): VNode {
  const [robotA, robotB] = [...state.robots];
  const vmrRegion = (id: number, robot: string | undefined): VNode =>
    region(id, `VMRs (${robot ?? "no robot"})`,
      inspectorBody(robot ? state.latestVmr[robot] : undefined), "vmr");
  const thoughtRegion = (id: number, robot: string | undefined): VNode =>
    region(id, `Thoughts (${robot ?? "no robot"})`,
      robot ? thoughtRows(state, robot) : [el("p", { class: "empty" }, "nothing yet")],
      "thoughts");
  return el(
    "div",
    { class: "console" },
    renderBanner(state),
    renderChat(state),
    renderTmrInspector(state),
    vmrRegion(3, robotA),
    thoughtRegion(4, robotA),
    renderAgenda(state),
    vmrRegion(6, robotB),
    thoughtRegion(7, robotB),
    renderMap(state),
  );
}
