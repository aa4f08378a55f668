"""Tactical robot control: command ingestion, blackboard state, BT handlers.

One :class:`TacticalLayer` per robot. The strategic layer sends
:class:`ActionCommand` items down; every tick the layer ticks its behavior
tree, produces at most one atomic actuation, and after the world applies moves
it emits one :class:`SensingFrame` back up. Commands never skip the
done/failed terminal report.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from . import bt
from .world import Actuation, Cell, Detection, STEP_NAMES, World

logger = logging.getLogger(__name__)

VERBS = ("GOTO", "SEARCH-ZONE", "SCAN", "PICK", "STOP")


@dataclass
class ActionCommand:
    id: int
    verb: str
    args: dict
    issued_tick: int = 0


@dataclass
class CommandStatus:
    id: int
    state: str  # accepted | running | done | failed
    detail: str = ""


@dataclass
class SensingFrame:
    tick: int
    robot_id: str
    pose: Cell
    detections: list[Detection]
    statuses: list[CommandStatus]
    collision: bool
    confidence: float = 1.0


def _verb_key(verb: str) -> str:
    return verb.lower()


class TacticalLayer:
    """State manager + behavior tree for one robot body."""

    def __init__(self, world: World, robot_id: str, trace=None) -> None:
        self.world = world
        self.robot_id = robot_id
        body = world.robots[robot_id]
        self.rclass = body.rclass
        self.supported = tuple(v for v in VERBS if v != "STOP"
                               and _verb_key(v) in body.commands)
        self.bb = bt.Blackboard()
        self._status_events: list[CommandStatus] = []
        self._running_reported: set[int] = set()
        self._actuation: Actuation | None = None
        self.last_visits: list[bt.LeafVisit] = []
        handlers = {
            "sidestep": self._h_sidestep,
            "return-to-base": self._h_return_to_base,
            "wait-at-base": self._h_wait,
            "random-walk": self._h_random_walk,
        }
        for verb in self.supported:
            handlers[f"do-{verb.lower()}"] = self._make_command_handler(verb)
        self.tree = bt.build_template(
            verbs=list(self.supported),
            handlers=handlers,
            idle=body.idle,
        )
        problems = bt.validate(self.tree)
        if problems:
            raise bt.BTValidationError(problems)

    # -- command intake ------------------------------------------------------

    def ingest(self, commands: list[ActionCommand]) -> None:
        """Admit commands; newest per verb wins, STOP clears everything."""
        for cmd in commands:
            if cmd.verb == "STOP":
                self._cancel_all("stopped")
                self._status_events.append(CommandStatus(cmd.id, "done"))
                continue
            if cmd.verb not in self.supported:
                self._status_events.append(
                    CommandStatus(cmd.id, "failed", "unsupported"))
                continue
            key = _verb_key(cmd.verb)
            prior = self.bb.get(f"cmd-{key}")
            if prior is not None and self.bb.get(bt.pending_key(cmd.verb)):
                self._status_events.append(
                    CommandStatus(int(prior), "failed", "preempted"))
            self.bb.set(bt.pending_key(cmd.verb), True)
            self.bb.set(f"cmd-{key}", cmd.id)
            self.bb.set(f"arg-{key}", dict(cmd.args))
            self.bb.delete(f"state-{key}")
            self._status_events.append(CommandStatus(cmd.id, "accepted"))

    def _cancel_all(self, detail: str) -> None:
        for verb in self.supported:
            key = _verb_key(verb)
            if self.bb.get(bt.pending_key(verb)):
                cmd_id = self.bb.get(f"cmd-{key}")
                if cmd_id is not None:
                    self._status_events.append(
                        CommandStatus(int(cmd_id), "failed", detail))
            self.bb.set(bt.pending_key(verb), False)
            self.bb.delete(f"state-{key}")
        self._clear_nav()

    def has_pending(self) -> bool:
        return any(self.bb.get(bt.pending_key(v)) for v in self.supported)

    # -- tick ------------------------------------------------------------------

    def step(self) -> Actuation | None:
        """Refresh derived blackboard state and tick the tree once."""
        body = self.world.robots[self.robot_id]
        others = {r.pose for rid, r in self.world.robots.items() if rid != self.robot_id}
        nxt = self.bb.get("nav-next")
        imminent = bool(body.collision_flag) or (
            nxt is not None and tuple(nxt) in others)
        self.bb.set(bt.COLLISION_KEY, imminent)
        self.bb.set("pose", body.pose)

        self._actuation = None
        result = bt.tick(self.tree, self.bb)
        self.last_visits = result.visits
        self._actuation = result.actuation
        return result.actuation

    def emit_frame(self, detections: list[Detection]) -> SensingFrame:
        body = self.world.robots[self.robot_id]
        statuses, self._status_events = self._status_events, []
        return SensingFrame(
            tick=self.world.tick,
            robot_id=self.robot_id,
            pose=body.pose,
            detections=detections,
            statuses=statuses,
            collision=body.collision_flag,
        )

    # -- navigation helpers -------------------------------------------------------

    def _clear_nav(self) -> None:
        self.bb.delete("nav-next")
        self.bb.delete("nav-target")

    def _step_towards(self, goal: Cell) -> Actuation | None:
        """One BFS step toward goal, or None when already there/unreachable."""
        body = self.world.robots[self.robot_id]
        if body.pose == goal:
            self._clear_nav()
            return None
        path = self.world.bfs_path(body.pose, goal, self.rclass)
        if not path:
            self._clear_nav()
            return None
        target = path[0]
        self.bb.set("nav-target", goal)
        self.bb.set("nav-next", path[1] if len(path) > 1 else None)
        dx, dy = target[0] - body.pose[0], target[1] - body.pose[1]
        return Actuation(kind="move", target=target,
                         label=f"move:{STEP_NAMES[(dx, dy)]}")

    def _mark_running(self, cmd_id: int) -> None:
        if cmd_id not in self._running_reported:
            self._running_reported.add(cmd_id)
            self._status_events.append(CommandStatus(cmd_id, "running"))

    def _finish(self, verb: str, state: str, detail: str = "") -> None:
        key = _verb_key(verb)
        cmd_id = self.bb.get(f"cmd-{key}")
        self.bb.set(bt.pending_key(verb), False)
        self.bb.delete(f"state-{key}")
        if cmd_id is not None:
            self._status_events.append(CommandStatus(int(cmd_id), state, detail))

    # -- handlers ---------------------------------------------------------------

    def _h_sidestep(self, bb: bt.Blackboard):
        body = self.world.robots[self.robot_id]
        others = {r.pose for rid, r in self.world.robots.items() if rid != self.robot_id}
        self._clear_nav()
        for cell in self.world.neighbors(body.pose):
            if cell not in others and self.world.passable(cell, self.rclass):
                return bt.TickStatus.SUCCESS, Actuation(
                    kind="move", target=cell, label="sidestep")
        return bt.TickStatus.SUCCESS, Actuation(kind="none", label="wait")

    def _h_return_to_base(self, bb: bt.Blackboard):
        body = self.world.robots[self.robot_id]
        act = self._step_towards(body.base)
        if act is None:
            return bt.TickStatus.SUCCESS, Actuation(kind="none", label="wait")
        return bt.TickStatus.RUNNING, act

    def _h_wait(self, bb: bt.Blackboard):
        return bt.TickStatus.SUCCESS, Actuation(kind="none", label="wait")

    def _h_random_walk(self, bb: bt.Blackboard):
        body = self.world.robots[self.robot_id]
        options = [c for c in self.world.neighbors(body.pose)
                   if self.world.passable(c, self.rclass)]
        if not options:
            return bt.TickStatus.SUCCESS, Actuation(kind="none", label="wait")
        cell = self.world.rand_choice(options)
        return bt.TickStatus.SUCCESS, Actuation(kind="move", target=cell,
                                                label="wander")

    def _make_command_handler(self, verb: str):
        fn = {
            "GOTO": self._run_goto,
            "SEARCH-ZONE": self._run_search,
            "SCAN": self._run_scan,
            "PICK": self._run_pick,
        }[verb]

        def handler(bb: bt.Blackboard):
            key = _verb_key(verb)
            cmd_id = bb.get(f"cmd-{key}")
            if cmd_id is not None:
                self._mark_running(int(cmd_id))
            return fn(bb)

        return handler

    def _run_goto(self, bb: bt.Blackboard):
        args = bb.get("arg-goto") or {}
        target = tuple(args.get("target", ()))
        body = self.world.robots[self.robot_id]
        if len(target) != 2 or not self.world.passable(target, self.rclass):
            self._finish("GOTO", "failed", "impassable")
            return bt.TickStatus.FAILURE, None
        if body.pose == target:
            self._finish("GOTO", "done")
            return bt.TickStatus.SUCCESS, Actuation(kind="none", label="arrived")
        act = self._step_towards(target)
        if act is None:
            self._finish("GOTO", "failed", "unreachable")
            return bt.TickStatus.FAILURE, None
        return bt.TickStatus.RUNNING, act

    def _run_search(self, bb: bt.Blackboard):
        """Visit the zone's waypoints in order, one dwell tick at each."""
        args = bb.get("arg-search-zone") or {}
        zone = self.world.zones.get(str(args.get("zone", "")))
        if zone is None:
            self._finish("SEARCH-ZONE", "failed", "unknown-zone")
            return bt.TickStatus.FAILURE, None
        if not zone.accessible_to(self.rclass):
            self._finish("SEARCH-ZONE", "failed", "inaccessible")
            return bt.TickStatus.FAILURE, None
        state = bb.get("state-search-zone") or {"wpi": 0}
        wpi = int(state["wpi"])
        if wpi >= len(zone.waypoints):
            self._finish("SEARCH-ZONE", "done")
            return bt.TickStatus.SUCCESS, Actuation(kind="none", label="scan")
        body = self.world.robots[self.robot_id]
        goal = zone.waypoints[wpi]
        if body.pose == goal:
            # arrival tick doubles as the scan dwell
            state["wpi"] = wpi + 1
            bb.set("state-search-zone", state)
            if state["wpi"] >= len(zone.waypoints):
                self._finish("SEARCH-ZONE", "done")
                return bt.TickStatus.SUCCESS, Actuation(kind="none", label="dwell")
            return bt.TickStatus.RUNNING, Actuation(kind="none", label="dwell")
        act = self._step_towards(goal)
        if act is None:
            self._finish("SEARCH-ZONE", "failed", "unreachable")
            return bt.TickStatus.FAILURE, None
        bb.set("state-search-zone", state)
        return bt.TickStatus.RUNNING, act

    def _run_scan(self, bb: bt.Blackboard):
        self._finish("SCAN", "done")
        return bt.TickStatus.SUCCESS, Actuation(kind="none", label="scan")

    def _run_pick(self, bb: bt.Blackboard):
        args = bb.get("arg-pick") or {}
        oid = str(args.get("object", ""))
        obj = self.world.objects.get(oid)
        if obj is None or not obj.graspable:
            self._finish("PICK", "failed", "no-such-object")
            return bt.TickStatus.FAILURE, None
        body = self.world.robots[self.robot_id]
        near = [body.pose] + self.world.neighbors(body.pose)
        if obj.cell in near:
            self._finish("PICK", "done")
            return bt.TickStatus.SUCCESS, Actuation(
                kind="grasp", object_id=oid, label="grasp")
        act = self._step_towards(obj.cell)
        if act is None:
            # object cell itself may be class-impassable; try adjacent cells
            for alt in self.world.neighbors(obj.cell):
                act = self._step_towards(alt)
                if act is not None:
                    return bt.TickStatus.RUNNING, act
            self._finish("PICK", "failed", "unreachable")
            return bt.TickStatus.FAILURE, None
        return bt.TickStatus.RUNNING, act
