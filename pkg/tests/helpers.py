"""Shared builders for unit tests: tiny worlds, scripted plan hosts."""

from __future__ import annotations

from searchparty.plans import Agenda, PlanInstance, PrimResult
from searchparty.world import RobotBody, World, WorldObject, Zone

ALL_COMMANDS = ("goto", "search-zone", "scan", "pick")


def zone_from_grid(rows, zid, letter, ztype, waypoints, label=None,
                   locative=None):
    cells = {(x, y)
             for y, row in enumerate(rows)
             for x, ch in enumerate(row) if ch == letter}
    return Zone(id=zid, letter=letter, ztype=ztype, label=label or zid,
                locative=locative or zid, waypoints=list(waypoints),
                cells=cells)


def grid_world(rows, zones=(), objects=(), robots=(), seed=0):
    return World(rows=list(rows), zones=list(zones), objects=list(objects),
                 robots=list(robots), seed=seed)


def robot(rid, rclass, pose, commands=ALL_COMMANDS, idle="wait"):
    return RobotBody(id=rid, rclass=rclass, pose=tuple(pose),
                     base=tuple(pose), commands=tuple(commands), idle=idle)


def obj(oid, concept, cell, features=None, graspable=False):
    return WorldObject(id=oid, concept=concept, cell=tuple(cell),
                       features=dict(features or {}), graspable=graspable)


def clause_sig(clause):
    if clause.kind == "exists":
        return f"exists {clause.concept}"
    if clause.kind == "all-known":
        return f"all {clause.var}.{clause.prop} {clause.item_prop}"
    return f"known {clause.var}.{clause.prop}"


class ScriptedHost:
    """Interpreter host with canned primitive results and condition flags.

    ``prims`` maps a primitive name to a PrimResult (reused) or a list of
    them (consumed per call). ``conditions`` maps clause signatures (see
    ``clause_sig``) to booleans and may be flipped mid-test. ``sets`` maps
    ``(var, prop)`` to the list a FOR step iterates.
    """

    def __init__(self, library, prims=None, conditions=None, sets=None):
        self.library = library
        self.prims = dict(prims or {})
        self.conditions = dict(conditions or {})
        self.sets = dict(sets or {})
        self.agenda = Agenda()
        self.calls = []
        self.events = []

    def eval_condition(self, cond, bindings):
        return any(self.conditions.get(clause_sig(c)) for c in cond.clauses)

    def resolve_set(self, var, prop, bindings):
        return self.sets.get((var, prop))

    def call_primitive(self, name, plan, step):
        self.calls.append(name)
        spec = self.prims.get(name)
        if spec is None:
            return PrimResult()
        if isinstance(spec, list):
            return spec.pop(0)
        return spec

    def spawn_child(self, parent, target):
        child = PlanInstance(pid=self.agenda.new_pid(),
                             script=self.library.get(target),
                             bindings=parent.bindings,
                             priority=parent.priority + 1,
                             created_at=0, parent=parent)
        self.agenda.add(child)
        return child

    def on_plan_event(self, plan, event, detail=""):
        self.events.append((plan.pid, event, detail))


def start_plan(host, name, variant=None, bindings=None, priority=50):
    plan = PlanInstance(pid=host.agenda.new_pid(),
                        script=host.library.get(name, variant),
                        bindings=bindings if bindings is not None else {},
                        priority=priority, created_at=0)
    host.agenda.add(plan)
    return plan
