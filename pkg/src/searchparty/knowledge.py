"""Frame-based knowledge store: memory spaces, inheritance-aware queries, grounding.

Each agent owns one :class:`FrameStore` holding an ontology space plus a
situation model, long-term semantic and episodic spaces, and a scratch space
for transient percept frames. All mutation goes through the store so that
instance numbering and iteration order stay deterministic.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field

logger = logging.getLogger(__name__)

Value = str | int | float

ONTOLOGY = "ontology"
SITUATION = "situation-model"
SEMANTIC_LT = "semantic-lt"
EPISODIC_LT = "episodic-lt"
SCRATCH = "scratch"

DEFAULT_SPACES = (ONTOLOGY, SITUATION, SEMANTIC_LT, EPISODIC_LT, SCRATCH)

# Pseudo-property understood by condition checks: "any perceptual feature set".
FEATURES_PSEUDO_PROP = "FEATURES"

ROOT_CONCEPT = "ALL"


class KnowledgeError(Exception):
    """Base error for store misuse."""


class DuplicateFrameId(KnowledgeError):
    pass


class UnknownSpace(KnowledgeError):
    pass


class UnknownConcept(KnowledgeError):
    pass


class UnknownFrame(KnowledgeError):
    pass


@dataclass
class Frame:
    """A concept or instance frame.

    ``properties`` maps a property symbol to an ordered list of values; values
    are plain scalars, and frame references are stored as frame-id strings.
    """

    id: str
    concept: str
    kind: str = "instance"  # "concept" | "instance"
    properties: dict[str, list[Value]] = field(default_factory=dict)
    space: str = ""

    def first(self, prop: str, default: Value | None = None) -> Value | None:
        vals = self.properties.get(prop)
        return vals[0] if vals else default

    def values(self, prop: str) -> list[Value]:
        return list(self.properties.get(prop, ()))

    def set(self, prop: str, *values: Value) -> None:
        self.properties[prop] = list(values)

    def add(self, prop: str, value: Value) -> None:
        self.properties.setdefault(prop, []).append(value)

    def has(self, prop: str) -> bool:
        return bool(self.properties.get(prop))


@dataclass
class QueryPattern:
    """Declarative frame query.

    ``constraints`` entries are ``(prop, predicate, value)`` with predicate one
    of ``equals`` / ``exists`` / ``member-of`` (``exists`` ignores ``value``).
    ``concept=None`` matches any concept. With ``transitive`` the concept test
    accepts instances of subconcepts.
    """

    concept: str | None = None
    constraints: list[tuple[str, str, Value | None]] = field(default_factory=list)
    spaces: list[str] = field(default_factory=lambda: [SITUATION])
    transitive: bool = True
    kind: str | None = "instance"


@dataclass
class GroundResult:
    matched: str | None
    score: float
    against: str | None = None


def natural_id_key(frame_id: str) -> tuple[str, int]:
    """Order KEY-2 before KEY-10: split a trailing integer suffix."""
    m = re.match(r"^(.*?)-(\d+)$", frame_id)
    if m:
        return (m.group(1), int(m.group(2)))
    return (frame_id, -1)


class FrameStore:
    """Per-agent frame memory across named spaces."""

    def __init__(self, feature_keys: tuple[str, ...] = ()) -> None:
        self._spaces: list[str] = []
        self._frames: dict[str, dict[str, Frame]] = {}
        self._counters: dict[str, int] = {}
        self.feature_keys: tuple[str, ...] = tuple(feature_keys)
        for space in DEFAULT_SPACES:
            self.add_space(space)
        self.define_concept(ROOT_CONCEPT, parents=())

    # -- spaces ------------------------------------------------------------

    def add_space(self, space_id: str) -> None:
        if space_id in self._frames:
            raise DuplicateFrameId(f"space already exists: {space_id}")
        self._spaces.append(space_id)
        self._frames[space_id] = {}

    @property
    def spaces(self) -> list[str]:
        return list(self._spaces)

    def _space(self, space_id: str) -> dict[str, Frame]:
        try:
            return self._frames[space_id]
        except KeyError:
            raise UnknownSpace(f"unknown space: {space_id}") from None

    # -- assertion ---------------------------------------------------------

    def assert_frame(self, frame: Frame, space: str) -> Frame:
        """Insert ``frame`` into ``space``.

        The id must be unused in that space and the concept must be declared
        (instances only; concept frames introduce their own symbol).
        """
        frames = self._space(space)
        if frame.id in frames:
            raise DuplicateFrameId(f"frame id already used in {space}: {frame.id}")
        if frame.kind == "instance" and not self.concept_exists(frame.concept):
            raise UnknownConcept(f"undeclared concept: {frame.concept}")
        frame.space = space
        frames[frame.id] = frame
        return frame

    def define_concept(
        self,
        name: str,
        parents: tuple[str, ...] = (ROOT_CONCEPT,),
        properties: dict[str, list[Value]] | None = None,
    ) -> Frame:
        for p in parents:
            if not self.concept_exists(p):
                raise UnknownConcept(f"undeclared parent concept: {p}")
        frame = Frame(id=name, concept=name, kind="concept",
                      properties=dict(properties or {}))
        if parents:
            frame.properties.setdefault("is-a", list(parents))
        return self.assert_frame(frame, ONTOLOGY)

    def concept_exists(self, name: str) -> bool:
        return name in self._frames[ONTOLOGY]

    def instantiate(self, concept: str, space: str = SITUATION,
                    properties: dict[str, list[Value]] | None = None) -> Frame:
        """Create CONCEPT-n with the next per-concept counter (from 1).

        Ids already taken by hand-asserted frames are skipped so a seeded
        KEY-1 never collides with a minted percept in another space.
        """
        if not self.concept_exists(concept):
            raise UnknownConcept(f"undeclared concept: {concept}")
        n = self._counters.get(concept, 0) + 1
        while any(f"{concept}-{n}" in self._frames[s] for s in self._spaces):
            n += 1
        self._counters[concept] = n
        frame = Frame(id=f"{concept}-{n}", concept=concept, kind="instance",
                      properties=dict(properties or {}))
        return self.assert_frame(frame, space)

    # -- retrieval ---------------------------------------------------------

    def get(self, frame_id: str, space: str | None = None) -> Frame:
        if space is not None:
            frames = self._space(space)
            if frame_id not in frames:
                raise UnknownFrame(f"no frame {frame_id} in {space}")
            return frames[frame_id]
        for space_id in self._spaces:
            if frame_id in self._frames[space_id]:
                return self._frames[space_id][frame_id]
        raise UnknownFrame(f"no frame: {frame_id}")

    def exists(self, frame_id: str) -> bool:
        return any(frame_id in self._frames[s] for s in self._spaces)

    def ancestors(self, concept: str) -> list[str]:
        """Transitive is-a chain, nearest first, without the concept itself."""
        if not self.concept_exists(concept):
            raise UnknownConcept(f"undeclared concept: {concept}")
        out: list[str] = []
        frontier = [concept]
        seen = {concept}
        while frontier:
            current = frontier.pop(0)
            for parent in self._frames[ONTOLOGY][current].values("is-a"):
                parent = str(parent)
                if parent not in seen:
                    seen.add(parent)
                    out.append(parent)
                    frontier.append(parent)
        return out

    def isa(self, concept: str, ancestor: str) -> bool:
        return concept == ancestor or ancestor in self.ancestors(concept)

    def query(self, pattern: QueryPattern) -> list[Frame]:
        """Frames matching the pattern, ordered by (space order, insertion)."""
        out: list[Frame] = []
        for space_id in pattern.spaces:
            for frame in self._space(space_id).values():
                if pattern.kind is not None and frame.kind != pattern.kind:
                    continue
                if pattern.concept is not None:
                    if pattern.transitive:
                        if not self.isa(frame.concept, pattern.concept):
                            continue
                    elif frame.concept != pattern.concept:
                        continue
                if all(self._check(frame, c) for c in pattern.constraints):
                    out.append(frame)
        return out

    @staticmethod
    def _check(frame: Frame, constraint: tuple[str, str, Value | None]) -> bool:
        prop, predicate, value = constraint
        vals = frame.properties.get(prop, [])
        if predicate == "exists":
            return bool(vals)
        if predicate == "equals":
            return bool(vals) and vals[0] == value
        if predicate == "member-of":
            return value in vals
        raise KnowledgeError(f"unknown predicate: {predicate}")

    # -- features / grounding ----------------------------------------------

    def feature_props(self, frame: Frame) -> dict[str, Value]:
        return {k: frame.first(k) for k in self.feature_keys if frame.has(k)}

    def has_any_feature(self, frame_id: str) -> bool:
        return bool(self.feature_props(self.get(frame_id)))

    def ground_percept(self, vmr_id: str, target_concept: str) -> GroundResult:
        """Match a percept frame against known instances of ``target_concept``.

        A candidate matches only when every feature property set on it appears
        in the VMR with an equal value; candidates with no features match
        vacuously. Ties go to the lowest instance id. Non-matching calls return
        the best partial score seen.
        """
        vmr = self.get(vmr_id)
        detected_type = str(vmr.first("object-type", ""))
        if not self.concept_exists(target_concept):
            raise UnknownConcept(f"undeclared concept: {target_concept}")
        if not detected_type or not self.concept_exists(detected_type) \
                or not self.isa(detected_type, target_concept):
            return GroundResult(matched=None, score=0.0)

        candidates = self.query(QueryPattern(
            concept=target_concept,
            spaces=[EPISODIC_LT, SITUATION],
            transitive=True,
        ))
        candidates.sort(key=lambda f: natural_id_key(f.id))

        best_score = 0.0
        best_id: str | None = None
        for cand in candidates:
            required = self.feature_props(cand)
            if not required:
                return GroundResult(matched=cand.id, score=1.0, against=cand.id)
            hits = sum(1 for k, v in required.items() if vmr.first(k) == v)
            score = hits / len(required)
            if score == 1.0:
                return GroundResult(matched=cand.id, score=1.0, against=cand.id)
            if score > best_score or best_id is None:
                best_score = score
                best_id = cand.id
        return GroundResult(matched=None, score=best_score, against=best_id)

    # -- export ------------------------------------------------------------

    def dump_lines(self, spaces: list[str] | None = None) -> list[str]:
        """One frame per line: ``space | id | concept | prop=value;...``."""
        out = []
        for space_id in spaces or self._spaces:
            for frame in self._space(space_id).values():
                props = ";".join(
                    f"{k}={','.join(str(v) for v in vs)}"
                    for k, vs in frame.properties.items()
                )
                out.append(f"{space_id} | {frame.id} | {frame.concept} | {props}")
        return out

    def export_graph(self, root_id: str) -> dict:
        """Compact frame-graph export rooted at ``root_id`` (for envelopes)."""
        order: list[str] = []
        seen: set[str] = set()
        frontier = [root_id]
        while frontier:
            fid = frontier.pop(0)
            if fid in seen or not self.exists(fid):
                continue
            seen.add(fid)
            order.append(fid)
            frame = self.get(fid)
            for vals in frame.properties.values():
                for v in vals:
                    if isinstance(v, str) and self.exists(v) and v not in seen:
                        if self.get(v).kind == "instance":
                            frontier.append(v)
        frames = []
        for fid in order:
            f = self.get(fid)
            frames.append({
                "id": f.id,
                "concept": f.concept,
                "props": {k: [str(v) for v in vs] for k, vs in sorted(f.properties.items())},
            })
        return {"root": root_id, "frames": frames}
