"""Reactive behavior-tree engine for the tactical layer.

Trees are rebuilt-descended from the root every tick (no memory decorators),
so a condition flipping anywhere preempts whatever ran last tick. The safety
template puts collision handling leftmost, then needs, then one gated subtree
per supported action command, then an idle leaf.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable

COLLISION_KEY = "collision-imminent"
BATTERY_KEY = "battery-low"
TICK_COUNT_KEY = "bt-tick-count"


class TickStatus(enum.Enum):
    SUCCESS = "success"
    FAILURE = "failure"
    RUNNING = "running"


class BTValidationError(Exception):
    def __init__(self, problems: list[str]):
        super().__init__("; ".join(problems))
        self.problems = problems


class Blackboard:
    """Key-value store with a per-key write version, shared state-manager side."""

    def __init__(self) -> None:
        self._data: dict[str, object] = {}
        self._versions: dict[str, int] = {}

    def get(self, key: str, default=None):
        return self._data.get(key, default)

    def set(self, key: str, value) -> int:
        self._data[key] = value
        self._versions[key] = self._versions.get(key, 0) + 1
        return self._versions[key]

    def delete(self, key: str) -> None:
        self._data.pop(key, None)

    def version(self, key: str) -> int:
        return self._versions.get(key, 0)

    def keys(self) -> list[str]:
        return list(self._data)

    def snapshot(self) -> dict[str, object]:
        return dict(self._data)


# An action handler returns (status, actuation-or-None). Actuation payloads are
# opaque to the engine; the tactical layer interprets them.
ActionFn = Callable[[Blackboard], tuple[TickStatus, object | None]]
ConditionFn = Callable[[Blackboard], bool]


@dataclass
class Condition:
    name: str
    fn: ConditionFn
    kind: str = field(default="condition", init=False)


@dataclass
class Action:
    name: str
    fn: ActionFn
    kind: str = field(default="action", init=False)


@dataclass
class Sequence:
    name: str
    children: list
    kind: str = field(default="sequence", init=False)


@dataclass
class Fallback:
    name: str
    children: list
    kind: str = field(default="fallback", init=False)


Node = Condition | Action | Sequence | Fallback


@dataclass
class LeafVisit:
    leaf: str
    kind: str  # "condition" | "action"
    status: TickStatus


@dataclass
class TickResult:
    status: TickStatus
    actuation: object | None
    visits: list[LeafVisit]


def tick(root: Node, bb: Blackboard) -> TickResult:
    """Tick the tree once, left to right, re-descending from the root."""
    visits: list[LeafVisit] = []
    actuation_box: list[object] = []

    def walk(node: Node) -> TickStatus:
        if node.kind == "condition":
            status = TickStatus.SUCCESS if node.fn(bb) else TickStatus.FAILURE
            visits.append(LeafVisit(node.name, "condition", status))
            return status
        if node.kind == "action":
            status, actuation = node.fn(bb)
            visits.append(LeafVisit(node.name, "action", status))
            if actuation is not None:
                actuation_box.append(actuation)
            return status
        if node.kind == "sequence":
            for child in node.children:
                status = walk(child)
                if status is not TickStatus.SUCCESS:
                    return status
            return TickStatus.SUCCESS
        if node.kind == "fallback":
            for child in node.children:
                status = walk(child)
                if status is not TickStatus.FAILURE:
                    return status
            return TickStatus.FAILURE
        raise TypeError(f"unknown node kind: {node.kind!r}")

    status = walk(root)
    bb.set(TICK_COUNT_KEY, int(bb.get(TICK_COUNT_KEY) or 0) + 1)
    actuation = actuation_box[0] if actuation_box else None
    return TickResult(status=status, actuation=actuation, visits=visits)


def pending_key(verb: str) -> str:
    return f"pending-{verb.lower()}"


def build_template(
    verbs: list[str],
    handlers: dict[str, ActionFn],
    idle: str = "wait",
    needs_enabled: bool = False,
) -> Fallback:
    """Assemble the standard robot tree.

    Order is fixed: collision avoidance leftmost, battery-return need (inert
    unless enabled), one ``pending-<verb>`` gated subtree per supported command
    in the given order, then the idle leaf. ``handlers`` must provide
    ``sidestep``, ``return-to-base``, ``do-<verb>`` for each verb, and the idle
    handler (``wait`` or ``random-walk``).
    """
    def need(name: str) -> ActionFn:
        if name not in handlers:
            raise BTValidationError([f"missing handler: {name}"])
        return handlers[name]

    children: list[Node] = [
        Sequence("avoid-collision", [
            Condition("collision-imminent?", lambda bb: bool(bb.get(COLLISION_KEY))),
            Action("sidestep", need("sidestep")),
        ]),
        Sequence("need-battery", [
            Condition(
                "battery-low?",
                (lambda bb: bool(bb.get(BATTERY_KEY))) if needs_enabled
                else (lambda bb: False),
            ),
            Action("return-to-base", need("return-to-base")),
        ]),
    ]
    for verb in verbs:
        key = pending_key(verb)
        children.append(Sequence(f"cmd-{verb.lower()}", [
            Condition(f"{key}?", (lambda bb, k=key: bool(bb.get(k)))),
            Action(f"do-{verb.lower()}", need(f"do-{verb.lower()}")),
        ]))
    idle_name = "wait-at-base" if idle == "wait" else "random-walk"
    children.append(Action(idle_name, need(idle_name)))
    return Fallback("root", children)


def iter_leaves(node: Node):
    if node.kind in ("condition", "action"):
        yield node
        return
    for child in node.children:
        yield from iter_leaves(child)


def validate(root: Node) -> list[str]:
    """Structural checks on a robot tree; returns a list of problems."""
    problems: list[str] = []
    if root.kind != "fallback":
        problems.append("root must be a fallback")
        return problems
    if not root.children:
        problems.append("root has no children")
        return problems

    first = root.children[0]
    if first.kind != "sequence" or not first.children \
            or first.children[0].kind != "condition" \
            or "collision" not in first.children[0].name:
        problems.append("avoidance subtree must be leftmost, gated on a collision condition")

    names = [leaf.name for leaf in iter_leaves(root)]
    dupes = sorted({n for n in names if names.count(n) > 1})
    if dupes:
        problems.append(f"duplicate leaf names: {', '.join(dupes)}")

    last = root.children[-1]
    if last.kind != "action":
        problems.append("idle leaf must be the last root child")

    for child in root.children[1:-1]:
        if child.kind != "sequence":
            problems.append(f"{getattr(child, 'name', '?')}: command subtree must be a sequence")
            continue
        if not child.children or child.children[0].kind != "condition":
            problems.append(f"{child.name}: first child must be a gating condition")
        actions = [n for n in child.children if n.kind == "action"]
        if len(actions) != 1:
            problems.append(f"{child.name}: expected exactly one action leaf")
    return problems


def subtree_leaf_names(root: Node, subtree_name: str) -> set[str]:
    """Leaf names under the named direct child of the root (for trace checks)."""
    for child in root.children:
        if getattr(child, "name", None) == subtree_name:
            return {leaf.name for leaf in iter_leaves(child)}
    return set()
