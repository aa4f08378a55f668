/** Browser entry point: materializes the rendered tree into the page and
 *  wires the inputs (server address, send box, run controls, robot selector,
 *  offline transcript loader).
 */

import { connect, LiveSession, sendChat, sendControl } from "./client.js";
import { renderConsole, VChild } from "./render.js";
import {
  applyAll,
  ConsoleState,
  initialState,
  selectRobot,
  sendAllowed,
} from "./state.js";
import { decodeTranscript } from "./wire.js";

function materialize(node: VChild): Node {
  if (typeof node === "string") {
    return document.createTextNode(node);
  }
  const element = document.createElement(node.tag);
  for (const [key, value] of Object.entries(node.attrs)) {
    element.setAttribute(key, value);
  }
  for (const child of node.children) {
    element.appendChild(materialize(child));
  }
  return element;
}

let state: ConsoleState = initialState();
let session: LiveSession | null = null;
let base = "";

function redraw(): void {
  const mount = document.getElementById("console-mount");
  if (!mount) {
    return;
  }
  mount.replaceChildren(materialize(renderConsole(state)));
  const sendButton = document.getElementById("send") as HTMLButtonElement | null;
  const sendBox = document.getElementById("send-text") as HTMLInputElement | null;
  if (sendButton && sendBox) {
    sendButton.disabled = !sendAllowed(sendBox.value);
  }
  const picker = document.getElementById("robot-pick") as HTMLSelectElement | null;
  if (picker) {
    const options = state.robots
      .map((rid) => `<option${rid === state.selectedRobot ? " selected" : ""}>${rid}</option>`)
      .join("");
    if (picker.innerHTML !== options) {
      picker.innerHTML = options;
    }
  }
}

function goLive(): void {
  session?.stop();
  const box = document.getElementById("server") as HTMLInputElement | null;
  base = box?.value.trim() || window.location.origin;
  state = initialState();
  session = connect({ base, state, onChange: redraw });
  redraw();
}

function loadFile(file: File): void {
  session?.stop();
  session = null;
  void file.text().then((text) => {
    state = initialState();
    applyAll(state, decodeTranscript(text));
    state.connection = "idle";
    redraw();
  });
}

function wire(): void {
  document.getElementById("connect")?.addEventListener("click", goLive);
  document.getElementById("send")?.addEventListener("click", () => {
    const box = document.getElementById("send-text") as HTMLInputElement | null;
    const to = document.getElementById("send-to") as HTMLInputElement | null;
    if (!box || !sendAllowed(box.value) || !base) {
      return;
    }
    void sendChat(base, state, box.value, to?.value.trim() || "team").then(
      (ok) => {
        if (ok) {
          box.value = "";
        }
        redraw();
      },
    );
  });
  document.getElementById("send-text")?.addEventListener("input", redraw);
  for (const action of ["pause", "resume", "step"] as const) {
    document.getElementById(`ctl-${action}`)?.addEventListener("click", () => {
      if (base) {
        void sendControl(base, action);
      }
    });
  }
  document.getElementById("robot-pick")?.addEventListener("change", (ev) => {
    selectRobot(state, (ev.target as HTMLSelectElement).value);
    redraw();
  });
  document.getElementById("transcript-file")?.addEventListener("change", (ev) => {
    const input = ev.target as HTMLInputElement;
    const file = input.files?.[0];
    if (file) {
      loadFile(file);
    }
  });
  redraw();
}

if (typeof document !== "undefined") {
  wire();
}
