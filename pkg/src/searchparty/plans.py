"""Plan instances, the agenda, and the script interpreter.

A ``PlanInstance`` is one adopted script with its own bindings and a cursor
(a stack of frames over section steps; FOR bodies push a frame). The
``Interpreter`` advances one instance until it blocks, completes, or finishes
the first step that emitted an externally visible effect. Everything that
touches the knowledge store or the outside world goes through a host object
(the strategic agent) so the interpreter stays a pure control structure.

Host protocol (duck-typed):

    eval_condition(cond, bindings) -> bool
    resolve_set(var, prop, bindings) -> list[str] | None
    call_primitive(name, plan, step) -> PrimResult
    spawn_child(parent, target_name) -> PlanInstance
    on_plan_event(plan, event, detail="") -> None
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .scripts import ScriptDef, Step

logger = logging.getLogger(__name__)

DEFAULT_GOAL_PRIORITY = 50

# plan lifecycle states
ACTIVE = "active"
WAITING_CHILD = "waiting-child"
AWAITING_CONDITION = "awaiting-condition"
AWAITING_ASYNC = "awaiting-async"
DONE = "done"
FAILED = "failed"

BLOCKED_STATES = (WAITING_CHILD, AWAITING_CONDITION, AWAITING_ASYNC)
TERMINAL_STATES = (DONE, FAILED)


@dataclass
class PrimResult:
    """What a primitive handler reports back to the interpreter."""

    done: bool = True            # False leaves the cursor on this step
    emitted: bool = False        # an envelope or command went out
    repeat: bool = False         # re-run this step after the spawned child ends
    spawn: str | None = None     # script name to run as a blocking child
    async_cmd: int | None = None  # command id the step must wait on
    fail: str | None = None      # abort the plan with this detail


@dataclass
class _Frame:
    steps: list[Step]
    idx: int = 0
    # set when this frame is a FOR body
    loop_step: Step | None = None
    items: list[str] = field(default_factory=list)
    item_idx: int = 0
    interrupted: bool = False


@dataclass
class PlanInstance:
    pid: int
    script: ScriptDef
    bindings: dict[str, str]
    priority: int
    created_at: int
    parent: "PlanInstance | None" = None
    status: str = ACTIVE
    section_idx: int = -1
    frames: list[_Frame] = field(default_factory=list)
    waiting_child: int | None = None
    resume_repeats: bool = False     # child end re-runs the current step
    await_cond = None                # ConditionExpr while awaiting-condition
    async_cmd: int | None = None
    async_step: Step | None = None
    notes: dict[str, str] = field(default_factory=dict)
    detail: str = ""

    @property
    def section_name(self) -> str:
        if self.status in TERMINAL_STATES:
            return self.status
        if 0 <= self.section_idx < len(self.script.sections):
            return self.script.sections[self.section_idx].name
        return "pending"

    def loop_frame(self) -> _Frame | None:
        for frame in reversed(self.frames):
            if frame.loop_step is not None:
                return frame
        return None


class Agenda:
    """All plan instances of one agent, top-level goals and children alike."""

    def __init__(self):
        self.items: list[PlanInstance] = []
        self._next_pid = 1

    def new_pid(self) -> int:
        pid = self._next_pid
        self._next_pid += 1
        return pid

    def add(self, plan: PlanInstance) -> None:
        self.items.append(plan)

    def get(self, pid: int) -> PlanInstance:
        for plan in self.items:
            if plan.pid == pid:
                return plan
        raise KeyError(pid)

    def runnable(self) -> list[PlanInstance]:
        return [p for p in self.items if p.status == ACTIVE]

    def pick(self) -> PlanInstance | None:
        """Highest priority wins; ties go to the earlier, then lower pid."""
        best = None
        for plan in self.runnable():
            key = (-plan.priority, plan.created_at, plan.pid)
            if best is None or key < best[0]:
                best = (key, plan)
        return best[1] if best else None

    def all_settled(self) -> bool:
        return all(p.status in TERMINAL_STATES for p in self.items)

    def pending_async(self) -> list[PlanInstance]:
        return [p for p in self.items if p.status == AWAITING_ASYNC]

    def awaiting_condition(self) -> list[PlanInstance]:
        return [p for p in self.items if p.status == AWAITING_CONDITION]

    def snapshot(self) -> list[dict]:
        rows = []
        for plan in self.items:
            rows.append({
                "pid": plan.pid,
                "script": plan.script.display,
                "section": plan.section_name,
                "status": plan.status,
                "priority": plan.priority,
                "parent": plan.parent.pid if plan.parent else None,
            })
        return rows


@dataclass
class AdvanceResult:
    reason: str  # "blocked" | "emitted" | "done" | "failed"
    detail: str = ""


class Interpreter:
    def __init__(self, host):
        self.host = host

    # -- plan completion / failure ------------------------------------

    def _complete(self, plan: PlanInstance) -> AdvanceResult:
        plan.status = DONE
        self.host.on_plan_event(plan, "done")
        self._resume_parent(plan)
        return AdvanceResult("done")

    def _fail(self, plan: PlanInstance, detail: str) -> AdvanceResult:
        plan.status = FAILED
        plan.detail = detail
        self.host.on_plan_event(plan, "failed", detail)
        parent = plan.parent
        if parent is not None and parent.waiting_child == plan.pid:
            # child failure takes the parent down with it
            self._fail(parent, f"child @{plan.script.name} failed: {detail}")
        return AdvanceResult("failed", detail)

    def _resume_parent(self, plan: PlanInstance) -> None:
        parent = plan.parent
        if parent is None or parent.waiting_child != plan.pid:
            return
        parent.waiting_child = None
        if parent.status == WAITING_CHILD:
            parent.status = ACTIVE

    # -- cursor helpers ------------------------------------------------

    def _enter_next_section(self, plan: PlanInstance) -> bool:
        while plan.section_idx + 1 < len(plan.script.sections):
            plan.section_idx += 1
            section = plan.script.sections[plan.section_idx]
            if section.steps:
                plan.frames = [_Frame(steps=section.steps)]
                return True
        return False

    def _current_step(self, plan: PlanInstance) -> Step | None:
        if not plan.frames:
            return None
        top = plan.frames[-1]
        if top.idx < len(top.steps):
            return top.steps[top.idx]
        return None

    def _step_done(self, plan: PlanInstance) -> None:
        plan.frames[-1].idx += 1

    def _close_exhausted_frames(self, plan: PlanInstance) -> bool:
        """Pop finished frames; returns False when the plan ran out of steps."""
        while plan.frames:
            top = plan.frames[-1]
            if top.idx < len(top.steps):
                return True
            if top.loop_step is not None:
                if not top.interrupted and top.item_idx + 1 < len(top.items):
                    top.item_idx += 1
                    top.idx = 0
                    plan.bindings[top.loop_step.loop_var] = top.items[top.item_idx]
                    continue
                interrupted = top.interrupted
                plan.frames.pop()
                self._step_done(plan)  # past the FOR step itself
                if interrupted:
                    self.host.on_plan_event(plan, "loop-terminated")
                continue
            plan.frames.pop()
        return self._enter_next_section(plan)

    # -- external wake-ups ---------------------------------------------

    def recheck_await(self, plan: PlanInstance) -> bool:
        """Release an AWAIT whose condition now holds. True if released."""
        if plan.status != AWAITING_CONDITION or plan.await_cond is None:
            return False
        if not self.host.eval_condition(plan.await_cond, plan.bindings):
            return False
        plan.await_cond = None
        plan.status = ACTIVE
        self._step_done(plan)
        return True

    def complete_async(self, plan: PlanInstance, ok: bool, detail: str = "") -> None:
        """The tactical layer settled the command this plan was waiting on."""
        if plan.status != AWAITING_ASYNC:
            return
        plan.notes["zone-outcome"] = "done" if ok else "failed"
        if detail:
            plan.notes["outcome-detail"] = detail
        plan.async_cmd = None
        plan.async_step = None
        plan.status = ACTIVE
        self._step_done(plan)

    def fire_interrupt(self, plan: PlanInstance) -> int | None:
        """INTERRUPT WHEN held: cancel the pending command, finish the current
        iteration, and mark the loop so it terminates afterwards. Returns the
        command id to cancel, if one was in flight."""
        cmd = plan.async_cmd
        plan.async_cmd = None
        plan.async_step = None
        plan.notes["zone-outcome"] = "interrupted"
        frame = plan.loop_frame()
        if frame is not None:
            frame.interrupted = True
        if plan.status == AWAITING_ASYNC:
            plan.status = ACTIVE
            self._step_done(plan)
        return cmd

    # -- main advance loop ----------------------------------------------

    def advance(self, plan: PlanInstance) -> AdvanceResult:
        if plan.status != ACTIVE:
            return AdvanceResult("blocked", plan.status)
        if plan.section_idx < 0 and not plan.frames:
            if not self._enter_next_section(plan):
                return self._complete(plan)

        while True:
            if not self._close_exhausted_frames(plan):
                return self._complete(plan)
            step = self._current_step(plan)

            if step.guard is not None and self.host.eval_condition(
                    step.guard, plan.bindings):
                self._step_done(plan)
                continue

            if step.kind == "run":
                result = self.host.call_primitive(step.primitive, plan, step)
                if result.fail is not None:
                    return self._fail(plan, result.fail)
                if result.spawn is not None:
                    child = self.host.spawn_child(plan, result.spawn)
                    plan.waiting_child = child.pid
                    plan.resume_repeats = result.repeat
                    if not result.repeat:
                        self._step_done(plan)
                    plan.status = WAITING_CHILD
                    return AdvanceResult("blocked", "waiting-child")
                if result.done:
                    self._step_done(plan)
                if result.emitted:
                    return AdvanceResult("emitted", step.primitive)
                if not result.done:
                    # primitive wants another cycle; stay runnable, yield now
                    return AdvanceResult("blocked", "retry")
                continue

            if step.kind == "run-new":
                target = step.target
                if target.startswith("$"):
                    target = plan.bindings.get(step.target)
                    if target is None:
                        return self._fail(
                            plan, f"unbound plan variable {step.target}")
                else:
                    target = target[1:]
                child = self.host.spawn_child(plan, target)
                plan.waiting_child = child.pid
                plan.resume_repeats = False
                self._step_done(plan)
                plan.status = WAITING_CHILD
                return AdvanceResult("blocked", "waiting-child")

            if step.kind == "run-async-await":
                if step.interrupt is not None and self.host.eval_condition(
                        step.interrupt, plan.bindings):
                    # condition already holds: never issue the command
                    plan.notes["zone-outcome"] = "interrupted"
                    frame = plan.loop_frame()
                    if frame is not None:
                        frame.interrupted = True
                    self.host.on_plan_event(plan, "interrupted", "pre-issue")
                    self._step_done(plan)
                    continue
                result = self.host.call_primitive(step.primitive, plan, step)
                if result.fail is not None:
                    return self._fail(plan, result.fail)
                plan.async_cmd = result.async_cmd
                plan.async_step = step
                plan.notes.pop("zone-outcome", None)
                plan.notes.pop("outcome-detail", None)
                plan.status = AWAITING_ASYNC
                return AdvanceResult("blocked", "awaiting-async")

            if step.kind == "await":
                if self.host.eval_condition(step.condition, plan.bindings):
                    self._step_done(plan)
                    continue
                plan.await_cond = step.condition
                plan.status = AWAITING_CONDITION
                return AdvanceResult("blocked", "awaiting-condition")

            if step.kind == "for-each":
                items = self.host.resolve_set(
                    step.set_var, step.set_prop, plan.bindings)
                if items is None:
                    return self._fail(
                        plan, f"cannot resolve {step.set_var}.{step.set_prop}")
                if not items:
                    self._step_done(plan)
                    continue
                frame = _Frame(steps=step.body, loop_step=step,
                               items=list(items))
                plan.bindings[step.loop_var] = frame.items[0]
                plan.frames.append(frame)
                continue

            return self._fail(plan, f"unknown step kind {step.kind!r}")
