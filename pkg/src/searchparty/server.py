"""Live HTTP front door for one simulation run.

Endpoints (all JSON unless noted):

* ``GET  /events?cursor=N``  server-sent events; replays the transcript from
  seq N, then streams live. Each event carries ``id`` (seq), ``event``
  (channel), ``data`` (one transcript line). When a slow reader falls behind,
  stale map frames are dropped oldest-first; other channels are never dropped.
* ``POST /chat``     ``{"text": ..., "addressee": "team"?, "sender": ...?}``
  queues a human chat line for the next tick's input phase.
* ``POST /control``  ``{"action": "pause"|"resume"|"step"}``.
* ``GET  /state``    run status snapshot.
* ``GET  /``         minimal built-in console page.

The simulation itself advances on a single background thread; every touch of
the Simulation object happens under one lock.
"""

from __future__ import annotations

import json
import logging
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlparse

from .inputs import Trigger
from .scenario import Scenario
from .sim import Simulation

logger = logging.getLogger(__name__)

MAP_BACKLOG_LIMIT = 50  # keep at most this many queued map frames per reader

_PAGE = """<!doctype html>
<meta charset="utf-8">
<title>searchparty console</title>
<style>
 body { font-family: monospace; margin: 1rem; background: #111; color: #ddd; }
 #log { white-space: pre-wrap; max-height: 80vh; overflow-y: auto; }
 .chat { color: #9ecbff; } .thought { color: #8b949e; }
 form { margin-top: .5rem; } input[type=text] { width: 30rem; }
</style>
<h1>searchparty</h1>
<div id="log"></div>
<form id="f"><input type="text" id="t" placeholder="say something">
<button>send</button></form>
<script>
 const log = document.getElementById("log");
 const es = new EventSource("/events?cursor=0");
 for (const ch of ["chat", "thought", "agenda-update", "tmr", "vmr"]) {
   es.addEventListener(ch, (e) => {
     const p = e.data.split("|");
     const div = document.createElement("div");
     div.className = ch;
     div.textContent = `[${p[1]}] ${ch} ${p[3]}→${p[4]} ` +
       JSON.parse(p.slice(5).join("|").split("|")[0] || '""');
     log.appendChild(div);
     log.scrollTop = log.scrollHeight;
   });
 }
 document.getElementById("f").addEventListener("submit", async (e) => {
   e.preventDefault();
   const t = document.getElementById("t");
   await fetch("/chat", {method: "POST",
     headers: {"content-type": "application/json"},
     body: JSON.stringify({text: t.value})});
   t.value = "";
 });
</script>
"""


class SimServer:
    """Owns the simulation, its pacing thread, and the HTTP listener."""

    def __init__(self, scenario: Scenario, host: str = "127.0.0.1",
                 port: int = 8008, seed: int | None = None,
                 triggers: list[Trigger] | None = None,
                 out_dir: str | None = None, rate: float = 10.0,
                 open_ticks: int | None = None):
        self.scenario = scenario
        self.sim = Simulation(scenario, seed=seed, triggers=triggers)
        self.lock = threading.RLock()
        self.paused = False
        self.rate = max(rate, 0.1)
        self.out_dir = out_dir
        self.open_ticks = open_ticks
        self._artifacts_written = False
        self._stop = threading.Event()
        self.httpd = _HTTPServer((host, port), _Handler, app=self)
        self._ticker = threading.Thread(
            target=self._tick_loop, name="sim-ticker", daemon=True)
        self._serving = threading.Thread(
            target=self.httpd.serve_forever, name="http", daemon=True)

    @property
    def address(self) -> tuple[str, int]:
        return self.httpd.server_address[:2]

    def start(self) -> None:
        self._serving.start()
        self._ticker.start()

    def stop(self) -> None:
        self._stop.set()
        self.httpd.shutdown()
        self.httpd.server_close()

    def _tick_limit(self) -> int:
        limit = self.scenario.tick_limit
        if self.open_ticks is not None:
            limit = min(limit, self.open_ticks)
        return limit

    def _tick_loop(self) -> None:
        interval = 1.0 / self.rate
        while not self._stop.is_set():
            advanced = False
            with self.lock:
                if (not self.paused and not self.sim.finished
                        and self.sim.tick < self._tick_limit()):
                    self.sim.run_tick()
                    advanced = True
                if ((self.sim.finished
                     or self.sim.tick >= self._tick_limit())
                        and self.out_dir and not self._artifacts_written):
                    self._artifacts_written = True
                    self.sim.write_artifacts(self.out_dir)
            self._stop.wait(interval if advanced else 0.05)

    # -- shared state accessors (all take the lock) -------------------------

    def state(self) -> dict:
        with self.lock:
            report = self.sim.report() if self.sim.finished else None
            return {
                "scenario": self.scenario.name,
                "seed": self.sim.world.seed,
                "leader": self.sim.leader_id,
                "tick": self.sim.tick,
                "paused": self.paused,
                "finished": self.sim.finished,
                "envelopes": len(self.sim.bus.log),
                "outcome": report.outcome if report else None,
                "participants": sorted(self.sim.bus.participants),
            }

    def chat(self, sender: str | None, addressee: str, text: str) -> dict:
        humans = self.scenario.humans()
        sender = sender or (humans[0].id if humans else "")
        with self.lock:
            if sender not in self.sim.bus.participants:
                raise ValueError(f"unknown sender {sender!r}")
            self.sim.queue_chat(sender, addressee, text)
            return {"queued": True, "sender": sender, "addressee": addressee}

    def control(self, action: str) -> dict:
        with self.lock:
            if action == "pause":
                self.paused = True
            elif action == "resume":
                self.paused = False
            elif action == "step":
                if not self.sim.finished:
                    self.sim.run_tick()
            else:
                raise ValueError(f"unknown action {action!r}")
            return {"paused": self.paused, "tick": self.sim.tick}

    def lines_since(self, cursor: int) -> tuple[list[tuple[int, str, str]], int]:
        """(seq, channel, encoded line) triples after cursor, new cursor."""
        with self.lock:
            fresh = self.sim.bus.since(cursor)
            out = [(env.seq, env.channel, env.encode()) for env in fresh]
            return out, len(self.sim.bus.log)

    def done(self) -> bool:
        with self.lock:
            return self.sim.finished


class _HTTPServer(ThreadingHTTPServer):
    daemon_threads = True
    allow_reuse_address = True

    def __init__(self, addr, handler, app: SimServer):
        self.app = app
        super().__init__(addr, handler)


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server: _HTTPServer

    def log_message(self, fmt: str, *args) -> None:
        logger.debug("http: " + fmt, *args)

    def _json(self, payload: dict, status: int = 200) -> None:
        body = json.dumps(payload).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)

    def _read_json(self) -> dict:
        length = int(self.headers.get("Content-Length") or 0)
        if length <= 0:
            return {}
        raw = self.rfile.read(length)
        try:
            payload = json.loads(raw)
        except json.JSONDecodeError:
            raise ValueError("request body is not valid JSON") from None
        if not isinstance(payload, dict):
            raise ValueError("request body must be a JSON object")
        return payload

    # -- routes -------------------------------------------------------------

    def do_GET(self) -> None:  # noqa: N802 (http.server API)
        url = urlparse(self.path)
        if url.path == "/":
            body = _PAGE.encode()
            self.send_response(200)
            self.send_header("Content-Type", "text/html; charset=utf-8")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)
        elif url.path == "/state":
            self._json(self.server.app.state())
        elif url.path == "/events":
            self._stream_events(url)
        else:
            self._json({"error": "not found"}, status=404)

    def do_POST(self) -> None:  # noqa: N802
        url = urlparse(self.path)
        try:
            payload = self._read_json()
            if url.path == "/chat":
                text = str(payload.get("text", "")).strip()
                if not text:
                    raise ValueError("chat needs non-empty 'text'")
                result = self.server.app.chat(
                    payload.get("sender"),
                    str(payload.get("addressee", "team")), text)
                self._json(result)
            elif url.path == "/control":
                self._json(self.server.app.control(
                    str(payload.get("action", ""))))
            else:
                self._json({"error": "not found"}, status=404)
        except ValueError as exc:
            self._json({"error": str(exc)}, status=400)

    def _stream_events(self, url) -> None:
        query = parse_qs(url.query)
        try:
            cursor = int(query.get("cursor", ["0"])[0])
        except ValueError:
            self._json({"error": "cursor must be an integer"}, status=400)
            return
        app = self.server.app
        self.send_response(200)
        self.send_header("Content-Type", "text/event-stream")
        self.send_header("Cache-Control", "no-cache")
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        try:
            idle_rounds = 0
            while not app._stop.is_set():
                rows, cursor = app.lines_since(max(cursor, 0))
                rows = self._drop_stale_maps(rows)
                for seq, channel, line in rows:
                    chunk = (f"id: {seq}\nevent: {channel}\n"
                             f"data: {line}\n\n")
                    self.wfile.write(chunk.encode())
                if rows:
                    self.wfile.flush()
                    idle_rounds = 0
                else:
                    idle_rounds += 1
                    if idle_rounds % 40 == 0:  # keepalive roughly every 2s
                        self.wfile.write(b": keepalive\n\n")
                        self.wfile.flush()
                        if app.done():
                            break
                time.sleep(0.05)
        except (BrokenPipeError, ConnectionResetError):
            pass

    @staticmethod
    def _drop_stale_maps(rows: list[tuple[int, str, str]]):
        maps = [r for r in rows if r[1] == "map"]
        if len(maps) <= MAP_BACKLOG_LIMIT:
            return rows
        keep = set(id(r) for r in maps[-MAP_BACKLOG_LIMIT:])
        return [r for r in rows if r[1] != "map" or id(r) in keep]


def serve(scenario: Scenario, host: str = "127.0.0.1", port: int = 8008,
          seed: int | None = None, triggers: list[Trigger] | None = None,
          out_dir: str | None = None, rate: float = 10.0,
          open_ticks: int | None = None) -> int:
    srv = SimServer(scenario, host=host, port=port, seed=seed,
                    triggers=triggers, out_dir=out_dir, rate=rate,
                    open_ticks=open_ticks)
    srv.start()
    host_shown, port_shown = srv.address
    print(f"serving {scenario.name} on http://{host_shown}:{port_shown}/ "
          f"(leader {srv.sim.leader_id}, seed {srv.sim.world.seed})")
    try:
        while True:
            time.sleep(0.5)
    except KeyboardInterrupt:
        print("shutting down")
    finally:
        srv.stop()
    return 0
