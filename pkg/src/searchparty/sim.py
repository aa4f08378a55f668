"""Lockstep simulation: world, tactical layers, strategic agents, chat bus.

Tick order is fixed and is the backbone of determinism:

1. input phase: queued live chat, then at most one scripted trigger, post to
   the bus at this tick;
2. strategic cycles in robot id order, each fed only chat posted on EARLIER
   ticks and its own sensing frame from the previous tick; envelopes post at
   this tick (so peers read them next tick), action commands go straight to
   the robot's own tactical layer;
3. tactical layers ingest and tick their behavior trees, producing at most
   one actuation each;
4. the world applies all actuations at once (robot id order breaks move
   conflicts), then each robot senses and a fresh sensing frame is queued
   for next tick;
5. state digest and pose snapshot are recorded.

A run ends after two consecutive quiet ticks (no chat, no commands, script
exhausted, every plan settled, no tactical work pending) or at the tick limit.
"""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .agent import Briefing, StrategicAgent, ZoneBriefing
from .comms import MessageBus
from .inputs import InputDriver, Trigger
from .language import load_lexicon
from .scenario import Scenario, build_world
from .scripts import load_library
from .tactical import SensingFrame, TacticalLayer

logger = logging.getLogger(__name__)

WORLD_SENDER = "world"

OUTCOME_EXIT = {"found": 0, "exhausted": 10, "timeout": 11}


@dataclass
class RunReport:
    scenario: str
    seed: int
    leader: str
    outcome: str
    exit_code: int
    ticks: int
    envelopes: int
    chat_messages: int
    found_by: str | None
    object_location: str | None
    zone_outcomes: dict[str, str]
    rng_draws: int
    world_digest: str
    out_dir: str | None = None


@dataclass
class _TraceRows:
    bt: list[str] = field(default_factory=list)
    tactical: list[str] = field(default_factory=list)
    digests: list[str] = field(default_factory=list)


class Simulation:
    def __init__(self, scenario: Scenario, seed: int | None = None,
                 triggers: list[Trigger] | None = None):
        self.scenario = scenario
        self.world = build_world(scenario, seed)
        self.leader_id = self.world.leader_id
        library = load_library(scenario.scripts_path)
        lexicon = load_lexicon(scenario.lexicon_path)

        humans = [(p.id, p.display) for p in scenario.humans()]
        robots = sorted((r.id, r.rclass) for r in scenario.robots)
        briefing = Briefing(
            robots=robots,
            humans=humans,
            leader_id=self.leader_id,
            location_id=scenario.location_id,
            zones=[ZoneBriefing(id=z.id, label=z.label, locative=z.locative,
                                ztype=z.ztype, waypoint_count=len(z.waypoints))
                   for z in scenario.zones],
            ontology=[(c.name, c.parents, c.props) for c in scenario.ontology],
            seeds=[(s.space, s.id, s.concept, s.props) for s in scenario.seeds],
            feature_keys=scenario.feature_keys,
        )

        participants = [pid for pid, _ in humans] + [rid for rid, _ in robots]
        self.bus = MessageBus(participants + [WORLD_SENDER])
        self.agents = {rid: StrategicAgent(rid, briefing, library, lexicon)
                       for rid, _ in robots}
        self.tactical = {rid: TacticalLayer(self.world, rid)
                         for rid, _ in robots}
        self.driver = None
        if triggers is not None:
            if not humans:
                raise ValueError("scripted input needs a human participant")
            self.driver = InputDriver(triggers, humans[0][0])

        self.tick = 0
        self.finished = False
        self._quiet = 0
        self._cursors = {rid: 0 for rid in self.agents}
        self._frames: dict[str, SensingFrame | None] = {
            rid: None for rid in self.agents}
        self._pending_chat: list[tuple[str, str, str]] = []
        self.trace = _TraceRows()

        layout = dict(self.world.layout_snapshot())
        layout.update(scenario=scenario.name, seed=self.world.seed,
                      leader=self.leader_id)
        self.bus.post(0, "map", WORLD_SENDER, "",
                      f"layout {layout['width']}x{layout['height']} "
                      f"zones={len(layout['zones'])} leader={self.leader_id}",
                      layout)
        for rid in sorted(self.agents):
            for env in self.agents[rid].bootstrap_output.envelopes:
                self.bus.post(0, env.channel, rid, env.addressee,
                              env.surface, env.attached_mr)

    # ------------------------------------------------------------------

    def queue_chat(self, sender: str, addressee: str, text: str) -> None:
        """Live chat injection; delivered at the next input phase."""
        self._pending_chat.append((sender, addressee, text))

    def run_tick(self) -> None:
        if self.finished:
            return
        self.tick += 1
        k = self.tick
        delivery_horizon = len(self.bus.log)

        pending, self._pending_chat = self._pending_chat, []
        for sender, addressee, text in pending:
            self.bus.post(k, "chat", sender, addressee, text)
        if self.driver is not None:
            fire = self.driver.step(k, self.bus.log)
            if fire is not None:
                self.bus.post(k, "chat", self.driver.sender, fire[0], fire[1])

        commands: dict[str, list] = {}
        for rid in sorted(self.agents):
            inbox, self._cursors[rid] = self.bus.chat_inbox(
                rid, self._cursors[rid], upto=delivery_horizon)
            frame, self._frames[rid] = self._frames[rid], None
            out = self.agents[rid].cycle(k, inbox, frame)
            for env in out.envelopes:
                self.bus.post(k, env.channel, rid, env.addressee,
                              env.surface, env.attached_mr)
            commands[rid] = out.commands

        actuations = {}
        for rid in sorted(self.tactical):
            layer = self.tactical[rid]
            layer.ingest(commands.get(rid, []))
            act = layer.step()
            if act is not None:
                actuations[rid] = act
            for visit in layer.last_visits:
                self.trace.bt.append(
                    f"{k},{rid},{visit.leaf},{visit.kind},{visit.status.value}")

        self.world.apply(actuations)

        for rid in sorted(self.tactical):
            layer = self.tactical[rid]
            dets = self.world.sense(rid)
            self._frames[rid] = layer.emit_frame(dets)
            body = self.world.robots[rid]
            act = actuations.get(rid)
            self.trace.tactical.append(
                f"{k},{rid},{body.pose[0]},{body.pose[1]},"
                f"{act.label if act else 'idle'},"
                f"{int(layer.has_pending())}")

        self.trace.digests.append(f"{k},{self.world.digest()}")
        self.bus.post(k, "map", WORLD_SENDER, "", f"poses tick {k}",
                      self.world.pose_snapshot())

        chat_now = any(env.channel == "chat"
                       for env in self.bus.log[delivery_horizon:])
        cmds_now = any(commands.values())
        settled = all(a.settled() for a in self.agents.values())
        idle = not any(t.has_pending() for t in self.tactical.values())
        script_done = self.driver is None or self.driver.exhausted
        # undelivered statuses still drive agendas next tick; detections do
        # not (agents are edge-triggered and a parked robot re-sees forever)
        frames_quiet = all(
            f is None or not f.statuses for f in self._frames.values())
        if (not chat_now and not cmds_now and settled and idle
                and script_done and frames_quiet and not self._pending_chat):
            self._quiet += 1
        else:
            self._quiet = 0
        if self._quiet >= 2:
            self.finished = True

    def run(self) -> RunReport:
        while self.tick < self.scenario.tick_limit and not self.finished:
            self.run_tick()
        return self.report()

    # ------------------------------------------------------------------

    def _classify(self) -> tuple[str, str | None, str | None]:
        outcome = "timeout"
        found_by: str | None = None
        location: str | None = None
        for env in self.bus.log:
            if env.channel != "chat" or not env.attached_mr:
                continue
            frames = {f["id"]: f
                      for f in env.attached_mr.get("frames", [])}
            root = frames.get(env.attached_mr.get("root"))
            if root is None:
                continue
            prop_ids = root.get("props", {}).get("proposition", [])
            prop = frames.get(prop_ids[0]) if prop_ids else None
            if prop is None:
                continue
            if prop["concept"] == "OBJECT-LOCATED":
                zones = prop.get("props", {}).get("zone", [])
                return "found", env.sender, zones[0] if zones else None
            if prop["concept"] == "SEARCH-EXHAUSTED":
                outcome = "exhausted"
        return outcome, found_by, location

    def report(self) -> RunReport:
        outcome, found_by, location = self._classify()
        if not self.finished and outcome == "exhausted":
            outcome = "timeout"  # the final report never made it out cleanly
        leader_store = self.agents[self.leader_id].store
        zone_outcomes = {}
        for z in self.scenario.zones:
            frame = leader_store.get(z.id)
            zone_outcomes[z.id] = frame.first("search-outcome", "unknown")
        return RunReport(
            scenario=self.scenario.name,
            seed=self.world.seed,
            leader=self.leader_id,
            outcome=outcome,
            exit_code=OUTCOME_EXIT[outcome],
            ticks=self.tick,
            envelopes=len(self.bus.log),
            chat_messages=sum(1 for e in self.bus.log if e.channel == "chat"),
            found_by=found_by,
            object_location=location,
            zone_outcomes=zone_outcomes,
            rng_draws=self.world.rng_draws,
            world_digest=self.world.digest(),
        )

    def write_artifacts(self, out_dir: str | Path) -> RunReport:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "transcript.log").write_text(
            "\n".join(self.bus.encode_all()) + "\n")
        (out / "digests.csv").write_text(
            "tick,digest\n" + "\n".join(self.trace.digests) + "\n")
        (out / "bt_trace.csv").write_text(
            "tick,robot,leaf,kind,status\n" + "\n".join(self.trace.bt) + "\n")
        (out / "tactical_trace.csv").write_text(
            "tick,robot,x,y,action,pending\n"
            + "\n".join(self.trace.tactical) + "\n")
        for rid in sorted(self.agents):
            (out / f"knowledge-{rid}.txt").write_text(
                "\n".join(self.agents[rid].store.dump_lines()) + "\n")
        report = self.report()
        report.out_dir = str(out)
        (out / "report.json").write_text(
            json.dumps(asdict(report), indent=2, sort_keys=True) + "\n")
        return report


def run_scripted(scenario: Scenario, triggers: list[Trigger],
                 seed: int | None = None,
                 out_dir: str | Path | None = None) -> RunReport:
    sim = Simulation(scenario, seed=seed, triggers=triggers)
    report = sim.run()
    if out_dir is not None:
        report = sim.write_artifacts(out_dir)
    return report


def transcript_seed(lines: list[str]) -> int:
    """Recover the run seed from a transcript's layout envelope."""
    from .comms import decode_line
    for line in lines:
        env = decode_line(line)
        if env.channel == "map" and env.attached_mr \
                and "seed" in env.attached_mr:
            return int(env.attached_mr["seed"])
    raise ValueError("transcript has no layout envelope with a seed")


def triggers_from_transcript(lines: list[str],
                             human_ids: set[str]) -> list[Trigger]:
    """Rebuild a tick-exact input script from a recorded transcript."""
    from .comms import decode_line
    triggers = []
    for line in lines:
        env = decode_line(line)
        if env.channel == "chat" and env.sender in human_ids:
            triggers.append(Trigger(
                kind="tick", addressee=env.addressee, text=env.surface,
                line=len(triggers) + 1, at_tick=env.tick))
    return triggers


def replay(scenario: Scenario, transcript_path: str | Path) -> tuple[RunReport, list[str], list[str]]:
    """Re-run a recorded transcript's inputs under the recorded seed.

    Returns (report, original lines, replayed lines); byte-equality of the
    two line lists is the determinism check.
    """
    original = Path(transcript_path).read_text().splitlines()
    seed = transcript_seed(original)
    human_ids = {p.id for p in scenario.humans()}
    triggers = triggers_from_transcript(original, human_ids)
    sim = Simulation(scenario, seed=seed, triggers=triggers)
    report = sim.run()
    return report, original, sim.bus.encode_all()
