"""Plan-script DSL: bracketed sections of RUN / AWAIT / FOR steps.

A script file holds named scripts (``@NAME``, optionally ``@NAME (variant)``)
made of ``[SECTION]`` blocks. Step forms:

    RUN *primitive [args...]
    RUN NEW @SCRIPT            (or ``RUN NEW $VAR`` resolved from bindings)
    RUN ASYNC AWAIT *primitive [args...]
    AWAIT <condition>
    FOR #VAR IN #VAR.PROP      (indented body follows)
    INTERRUPT WHEN <condition> (attaches to the preceding RUN ASYNC AWAIT)

Any step may carry a trailing ``UNLESS <condition>`` guard. ``PRECONDITION``
lines before the first section declare guarded request steps that a meta-plan
splices in after plan selection. Conditions:

    KNOWN #VAR.PROP
    EXISTS CONCEPT
    ALL #VAR.PROP PROP KNOWN
    <clause> OR <clause>

Comments run from ``//`` to end of line (``#`` is taken by variables).
Parse errors carry the source line number.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path


class ScriptError(Exception):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


@dataclass
class Clause:
    kind: str  # "known" | "exists" | "all-known"
    var: str | None = None       # "#OBJECT-1"
    prop: str | None = None      # "LOCATION"
    concept: str | None = None   # EXISTS target
    item_prop: str | None = None  # ALL: property each member must have


@dataclass
class ConditionExpr:
    clauses: list[Clause]  # OR-joined

    def variables(self) -> list[str]:
        return [c.var for c in self.clauses if c.var]


@dataclass
class Step:
    kind: str  # run | run-new | run-async-await | await | for-each
    line: int
    primitive: str | None = None
    prim_args: tuple[str, ...] = ()
    target: str | None = None            # "@NAME" | "$VAR"
    condition: ConditionExpr | None = None
    guard: ConditionExpr | None = None   # UNLESS
    interrupt: ConditionExpr | None = None  # run-async-await only
    loop_var: str | None = None
    set_var: str | None = None
    set_prop: str | None = None
    body: list["Step"] = field(default_factory=list)


@dataclass
class Section:
    name: str
    steps: list[Step]
    line: int


@dataclass
class ScriptDef:
    name: str                    # without the leading @
    variant: str | None
    params: tuple[str, ...]
    preconditions: list[Step]
    sections: list[Section]
    line: int
    priority: int = 50

    @property
    def key(self) -> str:
        return f"{self.name}/{self.variant}" if self.variant else self.name

    @property
    def display(self) -> str:
        return f"@{self.name}" + (f" ({self.variant})" if self.variant else "")


class ScriptLibrary:
    def __init__(self, scripts: list[ScriptDef]):
        self._by_key: dict[str, ScriptDef] = {}
        for s in scripts:
            if s.key in self._by_key:
                raise ScriptError(f"duplicate script {s.display}", s.line)
            self._by_key[s.key] = s

    def get(self, name: str, variant: str | None = None) -> ScriptDef:
        key = f"{name}/{variant}" if variant else name
        if key not in self._by_key:
            raise ScriptError(f"no script named @{key}")
        return self._by_key[key]

    def has(self, name: str, variant: str | None = None) -> bool:
        key = f"{name}/{variant}" if variant else name
        return key in self._by_key

    def names(self) -> list[str]:
        return sorted({s.name for s in self._by_key.values()})

    def all(self) -> list[ScriptDef]:
        return list(self._by_key.values())

    def __len__(self) -> int:
        return len(self._by_key)


_VAR_RE = re.compile(r"^#[A-Z0-9\-]+$")
_HEADER_RE = re.compile(r"^@([A-Z0-9\-]+)(?:\s+\(([a-z\-]+)\))?$")


def parse_condition(text: str, line: int) -> ConditionExpr:
    clauses = []
    for part in re.split(r"\s+OR\s+", text.strip()):
        tokens = part.split()
        if not tokens:
            raise ScriptError("empty condition clause", line)
        head = tokens[0]
        if head == "KNOWN":
            if len(tokens) != 2 or "." not in tokens[1]:
                raise ScriptError(f"KNOWN needs #VAR.PROP, got {part!r}", line)
            var, prop = tokens[1].split(".", 1)
            if not _VAR_RE.match(var):
                raise ScriptError(f"bad variable {var!r}", line)
            clauses.append(Clause(kind="known", var=var, prop=prop))
        elif head == "EXISTS":
            if len(tokens) != 2:
                raise ScriptError(f"EXISTS needs a concept, got {part!r}", line)
            clauses.append(Clause(kind="exists", concept=tokens[1]))
        elif head == "ALL":
            # ALL #VAR.PROP ITEM-PROP KNOWN
            if len(tokens) != 4 or tokens[3] != "KNOWN" or "." not in tokens[1]:
                raise ScriptError(
                    f"ALL needs '#VAR.PROP ITEM-PROP KNOWN', got {part!r}", line)
            var, prop = tokens[1].split(".", 1)
            if not _VAR_RE.match(var):
                raise ScriptError(f"bad variable {var!r}", line)
            clauses.append(Clause(kind="all-known", var=var, prop=prop,
                                  item_prop=tokens[2]))
        else:
            raise ScriptError(f"unknown condition form {part!r}", line)
    return ConditionExpr(clauses=clauses)


def _split_guard(text: str, line: int) -> tuple[str, ConditionExpr | None]:
    if " UNLESS " in text:
        head, guard_text = text.split(" UNLESS ", 1)
        return head.strip(), parse_condition(guard_text, line)
    return text.strip(), None


def parse_step(text: str, line: int) -> Step:
    text, guard = _split_guard(text, line)
    tokens = text.split()
    if tokens[:3] == ["RUN", "ASYNC", "AWAIT"]:
        rest = tokens[3:]
        if not rest or not rest[0].startswith("*"):
            raise ScriptError("RUN ASYNC AWAIT needs a *primitive", line)
        return Step(kind="run-async-await", line=line, primitive=rest[0][1:],
                    prim_args=tuple(rest[1:]), guard=guard)
    if tokens[:2] == ["RUN", "NEW"]:
        if len(tokens) != 3 or not (tokens[2].startswith("@") or tokens[2].startswith("$")):
            raise ScriptError("RUN NEW needs @SCRIPT or $VAR", line)
        return Step(kind="run-new", line=line, target=tokens[2], guard=guard)
    if tokens[:1] == ["RUN"]:
        if len(tokens) < 2 or not tokens[1].startswith("*"):
            raise ScriptError("RUN needs a *primitive", line)
        return Step(kind="run", line=line, primitive=tokens[1][1:],
                    prim_args=tuple(tokens[2:]), guard=guard)
    if tokens[:1] == ["AWAIT"]:
        return Step(kind="await", line=line,
                    condition=parse_condition(text[len("AWAIT"):], line),
                    guard=guard)
    if tokens[:1] == ["FOR"]:
        m = re.match(r"^FOR\s+(#[A-Z0-9\-]+)\s+IN\s+(#[A-Z0-9\-]+)\.([A-Z0-9\-]+)$",
                     text)
        if not m:
            raise ScriptError("FOR needs '#VAR IN #VAR.PROP'", line)
        return Step(kind="for-each", line=line, loop_var=m.group(1),
                    set_var=m.group(2), set_prop=m.group(3), guard=guard)
    raise ScriptError(f"unrecognized step {text!r}", line)


def _indent(raw: str) -> int:
    return len(raw) - len(raw.lstrip())


def parse_script_text(text: str, source: str = "<string>") -> ScriptLibrary:
    scripts: list[ScriptDef] = []
    current: ScriptDef | None = None
    section: Section | None = None
    # step stack holds (indent, steps-list) for FOR bodies
    stack: list[tuple[int, list[Step]]] = []

    def close_script():
        nonlocal current, section
        if current is not None:
            scripts.append(current)
        current, section = None, None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        if "//" in raw:
            raw = raw.split("//", 1)[0]
        line = raw.strip()
        if not line:
            continue
        if line.startswith("@"):
            m = _HEADER_RE.match(line)
            if not m:
                raise ScriptError(f"bad script header {line!r}", lineno)
            close_script()
            current = ScriptDef(name=m.group(1), variant=m.group(2), params=(),
                                preconditions=[], sections=[], line=lineno)
            stack = []
            continue
        if current is None:
            raise ScriptError(f"content before any @SCRIPT header: {line!r}", lineno)
        if line.startswith("PARAMS"):
            params = tuple(line.split()[1:])
            for p in params:
                if not _VAR_RE.match(p):
                    raise ScriptError(f"bad parameter {p!r}", lineno)
            current.params = params
            continue
        if line.startswith("PRIORITY"):
            try:
                current.priority = int(line.split()[1])
            except (IndexError, ValueError):
                raise ScriptError("PRIORITY needs an integer", lineno) from None
            continue
        if line.startswith("PRECONDITION "):
            step = parse_step(line[len("PRECONDITION "):], lineno)
            if step.kind != "run-new":
                raise ScriptError("PRECONDITION must wrap a RUN NEW step", lineno)
            current.preconditions.append(step)
            continue
        if line.startswith("[") and line.endswith("]"):
            section = Section(name=line[1:-1].strip(), steps=[], line=lineno)
            current.sections.append(section)
            stack = []
            continue
        if section is None:
            raise ScriptError(f"step outside any [SECTION]: {line!r}", lineno)

        indent = _indent(raw)
        while stack and indent <= stack[-1][0]:
            stack.pop()
        steps = stack[-1][1] if stack else section.steps

        if line.startswith("INTERRUPT WHEN "):
            cond = parse_condition(line[len("INTERRUPT WHEN "):], lineno)
            prev = steps[-1] if steps else None
            if prev is None or prev.kind != "run-async-await":
                raise ScriptError(
                    "INTERRUPT WHEN must follow a RUN ASYNC AWAIT step", lineno)
            if prev.interrupt is not None:
                raise ScriptError("step already has an interrupt", lineno)
            prev.interrupt = cond
            continue

        step = parse_step(line, lineno)
        steps.append(step)
        if step.kind == "for-each":
            stack.append((indent, step.body))

    close_script()
    lib = ScriptLibrary(scripts)
    _validate_library(lib)
    return lib


def load_library(path: str | Path) -> ScriptLibrary:
    path = Path(path)
    if not path.exists():
        raise ScriptError(f"no such script file: {path}")
    return parse_script_text(path.read_text(), source=str(path))


def _iter_steps(steps: list[Step]):
    for step in steps:
        yield step
        yield from _iter_steps(step.body)


def _validate_library(lib: ScriptLibrary) -> None:
    for script in lib.all():
        declared = set(script.params)
        all_steps = list(_iter_steps(
            [s for sec in script.sections for s in sec.steps] + script.preconditions))
        loop_vars = {s.loop_var for s in all_steps if s.kind == "for-each"}
        known_vars = declared | loop_vars
        for step in all_steps:
            if step.kind == "run-new" and step.target and step.target.startswith("@"):
                if not lib.has(step.target[1:]):
                    raise ScriptError(
                        f"{script.display}: RUN NEW names unknown script "
                        f"{step.target}", step.line)
            for cond in (step.condition, step.guard, step.interrupt):
                if cond is None:
                    continue
                for var in cond.variables():
                    if var not in known_vars:
                        raise ScriptError(
                            f"{script.display}: condition uses undeclared "
                            f"variable {var}", step.line)
            if step.kind == "for-each" and step.set_var not in known_vars:
                raise ScriptError(
                    f"{script.display}: FOR iterates undeclared variable "
                    f"{step.set_var}", step.line)
