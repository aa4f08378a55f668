"""The strategic layer: one cognitive agent per robot.

Each cycle interprets the inbox (chat becomes TMR frames, sensing frames
become VMR frames and command status updates), releases satisfied AWAITs,
fires INTERRUPT WHEN clauses on pending asynchronous steps, then lets the
prioritizer advance exactly one agenda item. Primitives called by the
interpreter emit chat envelopes (register chosen by the addressee), thought
lines, and tactical action commands.

The agent never touches world geometry. Everything it knows about the place
it is searching arrives as briefing frames at construction time or as
messages and sensing frames afterwards.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from . import knowledge, language, plans
from .knowledge import Frame, FrameStore, QueryPattern, natural_id_key
from .language import Analyzer, Generator, render_thought
from .plans import Agenda, Interpreter, PlanInstance, PrimResult
from .scripts import ConditionExpr, ScriptLibrary, Step
from .tactical import ActionCommand, SensingFrame

logger = logging.getLogger(__name__)

LEADER = "leader"
SUBORDINATE = "subordinate"

ACTIVITY_SCRIPT = "COLLABORATIVE-ACTIVITY"

# question topics a *ask-question step may name
TOPICS = {
    "features": ("OBJECT-FEATURES", True),
    "last-seen": ("LAST-SEEN-AT", True),
    "scope": ("LOCATION-CONSTRAINED", False),
    "object-type": ("OBJECT-TYPE", False),
}


class AgentError(Exception):
    pass


@dataclass
class OutEnvelope:
    channel: str
    addressee: str
    surface: str
    attached_mr: dict | None = None


@dataclass
class CycleOutput:
    envelopes: list[OutEnvelope] = field(default_factory=list)
    commands: list[ActionCommand] = field(default_factory=list)


@dataclass
class ZoneBriefing:
    id: str
    label: str
    locative: str
    ztype: str
    waypoint_count: int


@dataclass
class Briefing:
    """Everything an agent is told before the run starts."""

    robots: list[tuple[str, str]]        # (id, class), sorted by id
    humans: list[tuple[str, str]]        # (id, display name)
    leader_id: str
    location_id: str
    zones: list[ZoneBriefing]            # declaration order
    ontology: list[tuple[str, tuple[str, ...], dict[str, str]]]
    seeds: list[tuple[str, str, str, dict[str, str]]]
    feature_keys: tuple[str, ...]


def _multi(value: str) -> list[str]:
    return [v.strip() for v in value.split(",") if v.strip()]


class StrategicAgent:
    def __init__(self, robot_id: str, briefing: Briefing,
                 library: ScriptLibrary, lexicon: language.Lexicon):
        self.id = robot_id
        self.briefing = briefing
        self.role = LEADER if robot_id == briefing.leader_id else SUBORDINATE
        self.library = library
        self.store = FrameStore(feature_keys=briefing.feature_keys)
        self.agenda = Agenda()
        self.interp = Interpreter(self)
        self.tick = 0
        self.pending_question: tuple[str, str | None] | None = None
        self._cmd_seq = 0
        self._prev_detections: set[tuple[str, str]] = set()
        self._reported_found = False
        self._last_agenda: list[dict] | None = None
        self._out = CycleOutput()

        self._bootstrap_store()
        self.analyzer = Analyzer(self.store, lexicon)
        self.generator = Generator(self.store, lexicon)
        self._primitives = {
            "identify-team-members": self._p_identify_team_members,
            "identify-candidate-plans": self._p_identify_candidate_plans,
            "select-plan": self._p_select_plan,
            "resolve-preconditions": self._p_resolve_preconditions,
            "ask-question": self._p_ask_question,
            "allocate-zones": self._p_allocate_zones,
            "send-plan-proposal": self._p_send_plan_proposal,
            "adopt-proposed-plan": self._p_adopt_proposed_plan,
            "search": self._p_search,
            "consider-reporting": self._p_consider_reporting,
            "report-final": self._p_report_final,
        }
        self._adopt_activity()
        self._post_agenda_update()
        self.bootstrap_output, self._out = self._out, CycleOutput()

    # ------------------------------------------------------------------
    # bootstrap

    def _bootstrap_store(self) -> None:
        b = self.briefing
        for name, parents, props in b.ontology:
            self.store.define_concept(
                name, parents=parents or (knowledge.ROOT_CONCEPT,),
                properties={k: _multi(v) for k, v in props.items()})

        for pid, display in b.humans:
            self.store.assert_frame(Frame(
                id=f"{pid}-1", concept="HUMAN", properties={
                    "participant-id": [pid], "display": [display],
                    "role": ["team-leader"]}), knowledge.SITUATION)
        for rid, rclass in b.robots:
            concept = rid if self.store.concept_exists(rid) else "ROBOT"
            self.store.assert_frame(Frame(
                id=f"{rid}-1", concept=concept, properties={
                    "participant-id": [rid], "robot-class": [rclass]}),
                knowledge.SITUATION)

        self.team_id = "TEAM-1"
        self.store.assert_frame(Frame(
            id=self.team_id, concept="TEAM", properties={
                "members": [rid for rid, _ in b.robots],
                "leader": [b.leader_id],
                "human-leader": [b.humans[0][0]] if b.humans else [],
            }), knowledge.SITUATION)

        self.location_id = b.location_id
        self.store.assert_frame(Frame(
            id=self.location_id, concept="LOCATION", properties={
                "searchable-zone": [z.id for z in b.zones]}),
            knowledge.SITUATION)
        for z in b.zones:
            self.store.assert_frame(Frame(
                id=z.id, concept="SEARCHABLE-ZONE", properties={
                    "label": [z.label], "locative": [z.locative],
                    "zone-type": [z.ztype], "part-of": [self.location_id],
                    "waypoint-count": [str(z.waypoint_count)]}),
                knowledge.SITUATION)

        for script in self.library.all():
            self.store.assert_frame(Frame(
                id=f"SCRIPT-{script.key}", concept="PLAN-SCRIPT", properties={
                    "script-name": [script.name],
                    "variant": [script.variant or ""]}),
                knowledge.SEMANTIC_LT)

        for space, fid, concept, props in b.seeds:
            self.store.assert_frame(Frame(
                id=fid, concept=concept,
                properties={k: _multi(v) for k, v in props.items()}), space)

    def _adopt_activity(self) -> None:
        script = self.library.get(ACTIVITY_SCRIPT, self.role)
        bindings = {"#TEAM-1": self.team_id}
        if self.role == LEADER:
            bindings["#LOCATION-1"] = self.location_id
        plan = PlanInstance(pid=self.agenda.new_pid(), script=script,
                            bindings=bindings, priority=script.priority,
                            created_at=self.tick)
        self.agenda.add(plan)
        self._thought("adopted", script=script.name, role=self.role)

    # ------------------------------------------------------------------
    # host protocol for the interpreter

    def eval_condition(self, cond: ConditionExpr, bindings: dict) -> bool:
        for clause in cond.clauses:
            if clause.kind == "known":
                fid = bindings.get(clause.var)
                if fid is None or not self.store.exists(fid):
                    continue
                prop = clause.prop
                if prop == "OBJECT-TYPE":
                    return True  # the binding itself carries the concept
                if prop == knowledge.FEATURES_PSEUDO_PROP:
                    if self.store.has_any_feature(fid):
                        return True
                    continue
                if self.store.get(fid).has(prop.lower()):
                    return True
            elif clause.kind == "exists":
                if self.store.query(QueryPattern(
                        concept=clause.concept,
                        spaces=[knowledge.SITUATION])):
                    return True
            elif clause.kind == "all-known":
                fid = bindings.get(clause.var)
                if fid is None or not self.store.exists(fid):
                    continue
                members = self.store.get(fid).values(clause.prop.lower())
                if members and all(
                        self.store.exists(m)
                        and self.store.get(m).has(clause.item_prop.lower())
                        for m in members):
                    return True
        return False

    def resolve_set(self, var: str, prop: str, bindings: dict) -> list[str] | None:
        fid = bindings.get(var)
        if fid is None or not self.store.exists(fid):
            return None
        return list(self.store.get(fid).values(prop.lower()))

    def call_primitive(self, name: str, plan: PlanInstance,
                       step: Step) -> PrimResult:
        handler = self._primitives.get(name)
        if handler is None:
            return PrimResult(fail=f"unknown primitive *{name}")
        return handler(plan, step)

    def spawn_child(self, parent: PlanInstance, target: str) -> PlanInstance:
        script = self.library.get(target)
        child = PlanInstance(pid=self.agenda.new_pid(), script=script,
                             bindings=parent.bindings,  # shared namespace
                             priority=parent.priority + 1,
                             created_at=self.tick, parent=parent)
        self.agenda.add(child)
        self._thought("adopted", script=script.name, role=self.role)
        return child

    def on_plan_event(self, plan: PlanInstance, event: str,
                      detail: str = "") -> None:
        if event == "done":
            self._thought("plan-done", script=plan.script.name)
        elif event == "failed":
            self._thought("plan-failed", script=plan.script.name,
                          detail=detail)
        elif event == "interrupted":
            obj = plan.bindings.get("#OBJECT-1", "?")
            self._thought("interrupted", obj=obj)

    # ------------------------------------------------------------------
    # the cognitive cycle

    def cycle(self, tick: int, chat: list, frame: SensingFrame | None) -> CycleOutput:
        self.tick = tick
        self._out = CycleOutput()

        for env in chat:
            self._interpret_chat(env)
        if frame is not None:
            self._interpret_frame(frame)

        for plan in self.agenda.awaiting_condition():
            self.interp.recheck_await(plan)

        for plan in self.agenda.pending_async():
            step = plan.async_step
            if step is None or step.interrupt is None:
                continue
            if self.eval_condition(step.interrupt, plan.bindings):
                cmd_id = self.interp.fire_interrupt(plan)
                obj = plan.bindings.get("#OBJECT-1", "?")
                self._thought("interrupted", obj=obj)
                if cmd_id is not None:
                    self._command("STOP", {})

        plan = self.agenda.pick()
        if plan is not None:
            self.interp.advance(plan)

        self._post_agenda_update()
        out, self._out = self._out, CycleOutput()
        return out

    def settled(self) -> bool:
        return self.agenda.all_settled()

    # ------------------------------------------------------------------
    # inbox interpretation

    def _interpret_chat(self, env) -> None:
        tmr = self.analyzer.analyze(env.surface, env.sender, env.addressee)
        self._out.envelopes.append(OutEnvelope(
            channel="tmr", addressee="",
            surface=f"analyzed {tmr.speech_act} {tmr.concept} "
                    f"from {env.sender}",
            attached_mr=self.store.export_graph(tmr.root)))
        if tmr.unresolved:
            self._thought("warning",
                          detail=f"could not fully interpret {env.surface!r}")
            if tmr.concept == language.UNRESOLVED_CONCEPT:
                return
        self._apply_tmr(tmr, env)

    def _current_goal(self) -> Frame | None:
        goals = self.store.query(QueryPattern(
            concept="GOAL", spaces=[knowledge.SITUATION]))
        return goals[-1] if goals else None

    def _apply_tmr(self, tmr: language.TMR, env) -> None:
        prop = self.store.get(tmr.proposition)
        key = (tmr.speech_act, tmr.concept)

        if key == ("REQUEST-ACTION", "SEARCH-FOR-LOST-OBJECT"):
            goal = self._current_goal()
            if goal is None:
                props = {"goal-type": [tmr.concept],
                         "requested-by": [env.sender]}
                if prop.has("object"):
                    props["object"] = [prop.first("object")]
                if prop.has("location-constrained"):
                    props["location-constrained"] = [
                        prop.first("location-constrained")]
                self.store.instantiate("GOAL", properties=props)
            return

        if key == ("REQUEST-ACTION", "PLAN-PROPOSAL"):
            prop.set("proposed-by", env.sender)
            return

        if tmr.speech_act != "INFORM":
            return

        if tmr.concept == "OBJECT-FEATURES":
            obj_id = prop.first("object")
            if obj_id and self.store.exists(obj_id):
                obj = self.store.get(obj_id)
                for k, v in self.store.feature_props(prop).items():
                    obj.set(k, v)
                self._thought("answer-applied", topic="features", obj=obj_id)
            self._clear_pending(tmr.concept)
        elif tmr.concept == "LAST-SEEN-AT":
            obj_id, zone = prop.first("object"), prop.first("zone")
            if obj_id and zone and self.store.exists(obj_id):
                self.store.get(obj_id).set("last-seen-at", zone)
                self._thought("answer-applied", topic="last-seen-at",
                              obj=obj_id)
            self._clear_pending(tmr.concept)
        elif tmr.concept == "POLARITY":
            if self.pending_question is None:
                return
            topic, _obj = self.pending_question
            answer = prop.first("polarity", "no")
            goal = self._current_goal()
            if topic == "LOCATION-CONSTRAINED" and goal is not None:
                goal.set("location-constrained", answer)
                self._thought("answer-applied", topic="location-constrained",
                              obj=goal.id)
            self.pending_question = None
        elif tmr.concept == "OBJECT-TYPE":
            concept = prop.first("object-type")
            goal = self._current_goal()
            if concept and self.store.concept_exists(concept) \
                    and goal is not None:
                obj = self._reuse_or_create(concept)
                goal.set("object", obj.id)
                for item in self.agenda.items:
                    item.bindings.setdefault("#OBJECT-1", obj.id)
                self._thought("answer-applied", topic="object-type",
                              obj=obj.id)
            self._clear_pending(tmr.concept)
        elif tmr.concept == "ZONE-SEARCH-OUTCOME":
            zone, outcome = prop.first("zone"), prop.first("outcome")
            if zone and outcome and self.store.exists(zone):
                self.store.get(zone).set("search-outcome", outcome)
        elif tmr.concept == "OBJECT-LOCATED":
            obj_id, zone = prop.first("object"), prop.first("zone")
            if obj_id and zone and self.store.exists(obj_id):
                obj = self.store.get(obj_id)
                obj.set("location", zone)
                obj.set("found-by", env.sender)
                if self.store.exists(zone):
                    self.store.get(zone).set("search-outcome", "object-found")
                self._thought("answer-applied", topic="location", obj=obj_id)

    def _clear_pending(self, concept: str) -> None:
        if self.pending_question and self.pending_question[0] == concept:
            self.pending_question = None

    def _reuse_or_create(self, concept: str) -> Frame:
        existing = self.store.query(QueryPattern(
            concept=concept,
            spaces=[knowledge.EPISODIC_LT, knowledge.SITUATION]))
        if existing:
            return sorted(existing, key=lambda f: natural_id_key(f.id))[0]
        return self.store.instantiate(concept)

    def _interpret_frame(self, frame: SensingFrame) -> None:
        for status in frame.statuses:
            if status.state not in ("done", "failed"):
                continue
            for plan in self.agenda.pending_async():
                if plan.async_cmd == status.id:
                    self.interp.complete_async(
                        plan, ok=(status.state == "done"),
                        detail=status.detail)
                    break

        current = {(d.object_id, f"{d.cell[0]},{d.cell[1]}")
                   for d in frame.detections}
        fresh = [d for d in frame.detections
                 if (d.object_id, f"{d.cell[0]},{d.cell[1]}")
                 not in self._prev_detections]
        self._prev_detections = current
        for det in fresh:
            self._ingest_detection(det)

    def _sought(self) -> Frame | None:
        for plan in self.agenda.items:
            fid = plan.bindings.get("#OBJECT-1")
            if fid and self.store.exists(fid):
                return self.store.get(fid)
        return None

    def _ingest_detection(self, det) -> None:
        vmr_id, _percept = language.build_vmr(
            self.store, self.id, self.tick, det.concept, det.features,
            det.cell, det.zone_id or None)
        self._out.envelopes.append(OutEnvelope(
            channel="vmr", addressee="",
            surface=language.vmr_summary(self.store, vmr_id),
            attached_mr=self.store.export_graph(vmr_id)))

        sought = self._sought()
        if sought is None or sought.has("location"):
            return
        result = self.store.ground_percept(vmr_id, sought.concept)
        if result.matched == sought.id:
            zone = det.zone_id or f"{det.cell[0]},{det.cell[1]}"
            sought.set("location", zone)
            sought.set("location-cell", f"{det.cell[0]},{det.cell[1]}")
            sought.set("found-by", self.id)
            if det.zone_id and self.store.exists(det.zone_id):
                self.store.get(det.zone_id).set(
                    "search-outcome", "object-found")
            self._thought("vmr-match", vmr=vmr_id, sought=sought.id,
                          zone=zone)
        else:
            self._thought("vmr-mismatch", vmr=vmr_id, sought=sought.id)

    # ------------------------------------------------------------------
    # emission helpers

    def _human_leader(self) -> str | None:
        team = self.store.get(self.team_id)
        return team.first("human-leader")

    def _is_human(self, participant: str) -> bool:
        return any(pid == participant for pid, _ in self.briefing.humans)

    def _say(self, addressee: str, speech_act: str, concept: str,
             slots: dict, prop_props: dict[str, list[str]] | None = None,
             prop_frame: Frame | None = None) -> Frame:
        register = "human" if self._is_human(addressee) else "robot"
        surface = self.generator.generate(speech_act, concept, slots, register)
        if prop_frame is None:
            prop_frame = self.store.instantiate(
                concept, properties=prop_props or {})
        sa = self.store.instantiate(speech_act, properties={
            "proposition": [prop_frame.id], "speaker": [self.id],
            "addressee": [addressee]})
        self._out.envelopes.append(OutEnvelope(
            channel="chat", addressee=addressee, surface=surface,
            attached_mr=self.store.export_graph(sa.id)))
        if "object" in slots:
            self.analyzer.focus = str(slots["object"])
        return prop_frame

    def _thought(self, kind: str, **fields) -> None:
        self._out.envelopes.append(OutEnvelope(
            channel="thought", addressee="",
            surface=render_thought(kind, self.tick, **fields)))

    def _command(self, verb: str, args: dict) -> ActionCommand:
        self._cmd_seq += 1
        cmd = ActionCommand(id=self._cmd_seq, verb=verb, args=args,
                            issued_tick=self.tick)
        self._out.commands.append(cmd)
        return cmd

    def _post_agenda_update(self) -> None:
        snap = self.agenda.snapshot()
        if snap == self._last_agenda:
            return
        self._last_agenda = snap
        parts = [f"{r['pid']}:@{r['script'].lstrip('@')} "
                 f"[{r['section']}] {r['status']} p{r['priority']}"
                 for r in snap]
        self._out.envelopes.append(OutEnvelope(
            channel="agenda-update", addressee="",
            surface="; ".join(parts) or "agenda empty",
            attached_mr={"items": snap}))

    # ------------------------------------------------------------------
    # primitives

    def _p_identify_team_members(self, plan: PlanInstance,
                                 step: Step) -> PrimResult:
        team = self.store.get(plan.bindings["#TEAM-1"])
        leader = team.first("leader")
        for rid in team.values("members"):
            frame_id = f"{rid}-1"
            if self.store.exists(frame_id):
                self.store.get(frame_id).set(
                    "role", LEADER if rid == leader else SUBORDINATE)
        return PrimResult()

    def _p_identify_candidate_plans(self, plan: PlanInstance,
                                    step: Step) -> PrimResult:
        goal = self._current_goal()
        if goal is None:
            return PrimResult(fail="no goal to plan for")
        plan.bindings["#GOAL-1"] = goal.id
        if goal.has("object"):
            plan.bindings["#OBJECT-1"] = goal.first("object")
        goal_type = goal.first("goal-type")
        candidates = [
            f for f in self.store.query(QueryPattern(
                concept="PLAN-SCRIPT", spaces=[knowledge.SEMANTIC_LT]))
            if f.first("script-name") == goal_type and not f.first("variant")
        ]
        if not candidates:
            return PrimResult(fail=f"no plan script for {goal_type}")
        goal.set("candidate-plan",
                 *[f.first("script-name") for f in candidates])
        return PrimResult()

    def _p_select_plan(self, plan: PlanInstance, step: Step) -> PrimResult:
        goal = self.store.get(plan.bindings["#GOAL-1"])
        name = goal.values("candidate-plan")[0]
        goal.set("selected-plan", name)
        plan.bindings["$SELECTED-PLAN"] = name
        self._thought("plan-selected", script=name, goal=goal.id)
        return PrimResult()

    def _p_resolve_preconditions(self, plan: PlanInstance,
                                 step: Step) -> PrimResult:
        name = plan.bindings.get("$SELECTED-PLAN")
        if name is None:
            return PrimResult(fail="no plan selected")
        script = self.library.get(name)
        for pre in script.preconditions:
            if pre.guard is not None and self.eval_condition(
                    pre.guard, plan.bindings):
                continue
            clause = pre.guard.clauses[0] if pre.guard else None
            self._thought(
                "precondition-open",
                slot=(clause.prop.lower() if clause else pre.target),
                obj=plan.bindings.get(clause.var, clause.var)
                if clause else name)
            return PrimResult(done=False, spawn=pre.target[1:], repeat=True)
        self._thought("preconditions-done", script=name)
        return PrimResult()

    def _p_ask_question(self, plan: PlanInstance, step: Step) -> PrimResult:
        if not step.prim_args:
            return PrimResult(fail="*ask-question needs a topic")
        topic = step.prim_args[0]
        if topic not in TOPICS:
            return PrimResult(fail=f"unknown question topic {topic!r}")
        concept, needs_object = TOPICS[topic]
        addressee = self._human_leader()
        if addressee is None:
            return PrimResult(fail="no human leader to ask")
        slots: dict = {}
        props: dict[str, list[str]] = {}
        obj = plan.bindings.get("#OBJECT-1")
        if needs_object:
            if obj is None:
                return PrimResult(fail=f"topic {topic} needs a bound object")
            slots["object"] = obj
            props["object"] = [obj]
        self._say(addressee, "REQUEST-INFO", concept, slots, props)
        self.pending_question = (concept, obj)
        self._thought("question-asked", who=addressee, topic=topic)
        return PrimResult(emitted=True)

    def _robot_class(self, rid: str) -> str:
        frame = self.store.get(f"{rid}-1")
        return frame.first("robot-class", "")

    def _zone_accessible(self, ztype: str, rclass: str) -> bool:
        if ztype == "a":
            return True
        if ztype == "b":
            return rclass == "drone"
        return rclass == "ugv"

    def _p_allocate_zones(self, plan: PlanInstance, step: Step) -> PrimResult:
        goal = self.store.get(plan.bindings["#GOAL-1"])
        obj = self.store.get(plan.bindings["#OBJECT-1"])
        location = self.store.get(plan.bindings["#LOCATION-1"])
        team = self.store.get(plan.bindings["#TEAM-1"])
        robots = sorted(team.values("members"))
        prioritized = obj.first("last-seen-at")

        decl_order = list(location.values("searchable-zone"))
        zone_meta = {zid: self.store.get(zid) for zid in decl_order}
        assigned: dict[str, list[str]] = {r: [] for r in robots}
        load: dict[str, int] = {r: 0 for r in robots}

        def weight(zid: str) -> int:
            return int(zone_meta[zid].first("waypoint-count", "1"))

        def give(zid: str, rid: str) -> None:
            assigned[rid].append(zid)
            load[rid] += weight(zid)

        leftover = []
        for zid in decl_order:
            ztype = zone_meta[zid].first("zone-type", "a")
            cands = [r for r in robots
                     if self._zone_accessible(ztype, self._robot_class(r))]
            if not cands:
                continue
            if len(cands) < len(robots):
                # class-restricted zones go straight to whoever can enter
                give(zid, min(cands, key=lambda r: (load[r], r)))
            elif zid == prioritized and self.id in cands:
                give(zid, self.id)  # the leader takes the best lead itself
            else:
                leftover.append(zid)
        for zid in leftover:
            give(zid, min(robots, key=lambda r: (load[r], r)))

        def ordered(rid: str) -> list[str]:
            mine = assigned[rid]
            return sorted(mine, key=lambda z: (
                0 if z == prioritized else 1, decl_order.index(z)))

        allocation = {}
        for rid in robots:
            if not assigned[rid]:
                continue
            zones = ordered(rid)
            allocation[rid] = zones
            area = self.store.instantiate("SEARCH-AREA", properties={
                "assignee": [rid], "searchable-zone": list(zones)})
            if rid == self.id:
                plan.bindings["#AREA-1"] = area.id
        goal.set("allocation",
                 *[f"{rid}:{','.join(zs)}" for rid, zs in allocation.items()])
        self._thought("zones-allocated", alloc="; ".join(
            f"{rid}: {', '.join(zs)}" for rid, zs in allocation.items()))
        return PrimResult()

    def _p_send_plan_proposal(self, plan: PlanInstance,
                              step: Step) -> PrimResult:
        goal = self.store.get(plan.bindings["#GOAL-1"])
        obj = self.store.get(plan.bindings["#OBJECT-1"])
        name = plan.bindings["$SELECTED-PLAN"]
        features = sorted(self.store.feature_props(obj).items())
        emitted = False
        for entry in goal.values("allocation"):
            rid, zones_text = entry.split(":", 1)
            if rid == self.id:
                continue
            zones = zones_text.split(",")
            props: dict[str, list[str]] = {
                "plan": [name], "object-type": [obj.concept],
                "zones": list(zones)}
            for k, v in features:
                props[k] = [str(v)]
            self._say(rid, "REQUEST-ACTION", "PLAN-PROPOSAL", {
                "type": obj.concept, "features": features, "zones": zones,
            }, props)
            emitted = True
        return PrimResult(emitted=emitted)

    def _p_adopt_proposed_plan(self, plan: PlanInstance,
                               step: Step) -> PrimResult:
        proposals = self.store.query(QueryPattern(
            concept="PLAN-PROPOSAL", spaces=[knowledge.SITUATION]))
        if not proposals:
            return PrimResult(fail="no plan proposal to adopt")
        prop = proposals[-1]
        name = prop.first("plan")
        if name is None or not self.library.has(name):
            return PrimResult(fail=f"proposal names unknown plan {name!r}")
        concept = prop.first("object-type")
        if concept is None or not self.store.concept_exists(concept):
            return PrimResult(fail="proposal lacks a known object type")

        obj = self._reuse_or_create(concept)
        for k, v in self.store.feature_props(prop).items():
            obj.set(k, v)

        goal = self._current_goal()
        if goal is None:
            goal = self.store.instantiate("GOAL", properties={
                "goal-type": [name]})
        goal.set("object", obj.id)
        goal.set("selected-plan", name)

        area = self.store.instantiate("SEARCH-AREA", properties={
            "assignee": [self.id],
            "searchable-zone": list(prop.values("zones"))})

        plan.bindings.update({
            "#GOAL-1": goal.id, "#OBJECT-1": obj.id, "#AREA-1": area.id,
            "$SELECTED-PLAN": name})
        leader = prop.first("proposed-by") or self.store.get(
            self.team_id).first("leader")
        self._say(leader, "ACK", "ACKNOWLEDGMENT", {}, {})
        self._thought("plan-adopted-from", who=leader)
        return PrimResult(emitted=True)

    def _p_search(self, plan: PlanInstance, step: Step) -> PrimResult:
        zone = plan.bindings.get("#ZONE-1")
        if zone is None:
            return PrimResult(fail="*search outside a zone loop")
        cmd = self._command("SEARCH-ZONE", {"zone": zone})
        self._thought("search-started", zone=zone)
        return PrimResult(async_cmd=cmd.id, emitted=True)

    def _p_consider_reporting(self, plan: PlanInstance,
                              step: Step) -> PrimResult:
        zone_id = plan.bindings.get("#ZONE-1")
        obj = self.store.get(plan.bindings["#OBJECT-1"])
        zone = self.store.get(zone_id) if zone_id and self.store.exists(
            zone_id) else None
        outcome = plan.notes.get("zone-outcome", "done")
        location = obj.first("location")
        found_by_me = obj.first("found-by") == self.id

        if location is not None and found_by_me and not self._reported_found:
            self._reported_found = True
            if zone is not None and location == zone_id:
                zone.set("search-outcome", "object-found")
            elif zone is not None:
                zone.set("search-outcome", "abandoned")
            slots = {"object": obj.id, "zone": location}
            props = {"object": [obj.id], "zone": [location]}
            shared = self._say("team", "INFORM", "OBJECT-LOCATED",
                               slots, props)
            self._thought("report-sent", what="object location", who="team")
            human = self._human_leader()
            if human is not None:
                self._say(human, "INFORM", "OBJECT-LOCATED", slots,
                          prop_frame=shared)
                self._thought("report-sent", what="object location",
                              who=human)
            return PrimResult(emitted=True)

        if outcome == "interrupted":
            if zone is not None and not zone.has("search-outcome"):
                zone.set("search-outcome", "abandoned")
            self._thought("zone-outcome", zone=zone_id, outcome="abandoned")
            return PrimResult()

        if outcome == "failed":
            detail = plan.notes.get("outcome-detail", "unreachable")
            if zone is not None:
                zone.set("search-outcome", "failed")
            self._say("team", "INFORM", "ZONE-SEARCH-OUTCOME",
                      {"zone": zone_id, "outcome": "failed"},
                      {"zone": [zone_id], "outcome": ["failed"],
                       "detail": [detail]})
            self._thought("zone-outcome", zone=zone_id, outcome="failed")
            return PrimResult(emitted=True)

        if zone is not None:
            zone.set("search-outcome", "searched-empty")
        self._say("team", "INFORM", "ZONE-SEARCH-OUTCOME",
                  {"zone": zone_id, "outcome": "searched-empty"},
                  {"zone": [zone_id], "object": [obj.id],
                   "outcome": ["searched-empty"]})
        self._thought("zone-outcome", zone=zone_id, outcome="searched-empty")
        return PrimResult(emitted=True)

    def _p_report_final(self, plan: PlanInstance, step: Step) -> PrimResult:
        obj = self.store.get(plan.bindings["#OBJECT-1"])
        if obj.has("location"):
            # whoever grounded the object already told the team and the human
            return PrimResult()
        human = self._human_leader()
        if human is None:
            return PrimResult()
        self._say(human, "INFORM", "SEARCH-EXHAUSTED",
                  {"object": obj.id}, {"object": [obj.id]})
        self._thought("report-sent", what="search exhausted", who=human)
        return PrimResult(emitted=True)
