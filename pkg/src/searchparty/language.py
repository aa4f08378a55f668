"""Template lexicon, utterance analysis, and register-aware generation.

The lexicon file holds entries of the form::

    [entry search-request]
    match: robots, please find my {object:owned}.
    match: task: find {object:ref}.
    mr: REQUEST-ACTION SEARCH-FOR-LOST-OBJECT object={object} location-constrained=no
    human: Robots, please find my {object:plural}.
    robot: task: find {object:id}.

``match`` templates are lowercase patterns with typed capture slots, used for
analysis. ``mr`` names the speech act, the proposition concept, and slot
assignments (``key={slot}``, ``key=$focus`` for the discourse focus, or a
literal). ``human``/``robot`` are generation templates, one per register;
every entry must provide both and they must differ.

Slot kinds (analysis): owned, noun, ref, loc, label, labels, word, flist.
Render kinds (generation): plural, noun, id, loc, label, labels, flist, or a
bare ``{name}`` for the raw slot value.

``analyze`` is total: any string yields a meaning representation, degraded to
concept UNRESOLVED-UTTERANCE with ``unresolved=True`` when nothing matches.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from pathlib import Path

from . import knowledge
from .knowledge import FrameStore, Frame, QueryPattern, natural_id_key

logger = logging.getLogger(__name__)

UNRESOLVED_CONCEPT = "UNRESOLVED-UTTERANCE"
VMR_CONCEPT = "VMR"

_SLOT_RE = re.compile(r"\{([a-z][a-z0-9_\-]*)(?::([a-z\-]+))?\}")

_KIND_PATTERNS = {
    "owned": r"[a-z][a-z\- ]*?",
    "noun": r"[a-z][a-z\- ]*?",
    "concept": r"[a-z][a-z\- ]*?",
    "ref": r"[a-z0-9\-]+",
    "loc": r".+?",
    "label": r"[a-z0-9\- ]+?",
    "labels": r".+?",
    "word": r"[a-z0-9\-]+",
    "flist": r".+?",
}


class LanguageError(Exception):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


@dataclass
class MatchTemplate:
    text: str
    regex: re.Pattern
    slots: dict[str, str]      # name -> kind
    literal_len: int
    line: int


@dataclass
class MrSpec:
    speech_act: str
    concept: str
    assigns: list[tuple[str, str]]  # (prop, "{slot}" | "$focus" | literal)


@dataclass
class LexEntry:
    name: str
    matches: list[MatchTemplate]
    mr: MrSpec
    gen: dict[str, str]        # register -> template
    line: int

    @property
    def key(self) -> tuple[str, str]:
        return (self.mr.speech_act, self.mr.concept)


def normalize(surface: str) -> str:
    return re.sub(r"\s+", " ", surface.strip()).lower()


def _compile_match(template: str, line: int) -> MatchTemplate:
    pattern, slots, literal = [], {}, 0
    pos = 0
    for m in _SLOT_RE.finditer(template):
        lit = template[pos:m.start()]
        literal += len(lit)
        pattern.append(re.escape(lit))
        name, kind = m.group(1), m.group(2) or "word"
        if kind not in _KIND_PATTERNS:
            raise LanguageError(f"unknown slot kind {kind!r}", line)
        if name in slots:
            raise LanguageError(f"duplicate slot {name!r}", line)
        slots[name] = kind
        pattern.append(f"(?P<{name.replace('-', '_')}>{_KIND_PATTERNS[kind]})")
        pos = m.end()
    tail = template[pos:]
    literal += len(tail)
    pattern.append(re.escape(tail))
    return MatchTemplate(text=template, regex=re.compile("".join(pattern)),
                         slots=slots, literal_len=literal, line=line)


def _parse_mr(text: str, line: int) -> MrSpec:
    tokens = text.split()
    if len(tokens) < 2:
        raise LanguageError("mr needs 'SPEECH-ACT CONCEPT [k=v ...]'", line)
    assigns = []
    for tok in tokens[2:]:
        if "=" not in tok:
            raise LanguageError(f"bad mr assignment {tok!r}", line)
        prop, value = tok.split("=", 1)
        assigns.append((prop.lower(), value))
    return MrSpec(speech_act=tokens[0], concept=tokens[1], assigns=assigns)


class Lexicon:
    def __init__(self, entries: list[LexEntry]):
        self.entries = entries
        # analysis order: most literal text first, then file order
        self._ordered: list[tuple[LexEntry, MatchTemplate]] = []
        for idx, entry in enumerate(entries):
            for tidx, tmpl in enumerate(entry.matches):
                self._ordered.append((entry, tmpl))
        self._ordered.sort(key=lambda pair: (
            -pair[1].literal_len, entries.index(pair[0]), pair[1].line))
        self._gen_index: dict[tuple[str, str], LexEntry] = {}
        for entry in entries:
            self._gen_index.setdefault(entry.key, entry)

    def candidates(self):
        return list(self._ordered)

    def entry_for(self, speech_act: str, concept: str) -> LexEntry | None:
        return self._gen_index.get((speech_act, concept))

    def generation_keys(self) -> list[tuple[str, str]]:
        return sorted(self._gen_index)


def parse_lexicon_text(text: str) -> Lexicon:
    entries: list[LexEntry] = []
    name, line0 = None, 0
    matches: list[MatchTemplate] = []
    mr: MrSpec | None = None
    gen: dict[str, str] = {}

    def close(lineno):
        nonlocal name, matches, mr, gen
        if name is None:
            return
        if not matches:
            raise LanguageError(f"entry {name!r} has no match templates", line0)
        if mr is None:
            raise LanguageError(f"entry {name!r} has no mr line", line0)
        for register in ("human", "robot"):
            if register not in gen:
                raise LanguageError(
                    f"entry {name!r} missing {register!r} template", line0)
        if normalize(gen["human"]) == normalize(gen["robot"]):
            raise LanguageError(
                f"entry {name!r}: register templates must differ", line0)
        entries.append(LexEntry(name=name, matches=matches, mr=mr,
                                gen=dict(gen), line=line0))
        name, matches, mr, gen = None, [], None, {}

    lineno = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[entry ") and line.endswith("]"):
            close(lineno)
            name, line0 = line[len("[entry "):-1].strip(), lineno
            continue
        if name is None:
            raise LanguageError(f"content before any [entry ...]: {line!r}",
                                lineno)
        if ":" not in line:
            raise LanguageError(f"expected 'key: value', got {line!r}", lineno)
        key, value = line.split(":", 1)
        key, value = key.strip(), value.strip()
        if key == "match":
            if value != normalize(value):
                raise LanguageError("match templates must be normalized "
                                    "lowercase", lineno)
            matches.append(_compile_match(value, lineno))
        elif key == "mr":
            if mr is not None:
                raise LanguageError("entry has two mr lines", lineno)
            mr = _parse_mr(value, lineno)
        elif key in ("human", "robot"):
            gen[key] = value
        else:
            raise LanguageError(f"unknown entry key {key!r}", lineno)
    close(lineno)
    if not entries:
        raise LanguageError("lexicon has no entries")
    return Lexicon(entries)


def load_lexicon(path: str | Path) -> Lexicon:
    path = Path(path)
    if not path.exists():
        raise LanguageError(f"no such lexicon file: {path}")
    return parse_lexicon_text(path.read_text())


@dataclass
class TMR:
    """A text meaning representation anchored in the situation model."""

    root: str
    proposition: str
    speech_act: str
    concept: str
    speaker: str
    addressee: str
    surface: str
    slots: dict[str, object] = field(default_factory=dict)
    entry: str | None = None
    unresolved: bool = False


class Resolver:
    """Reference resolution against one agent's knowledge store."""

    def __init__(self, store: FrameStore):
        self.store = store

    def participant_frame(self, participant_id: str) -> Frame | None:
        hits = self.store.query(QueryPattern(
            constraints=[("participant-id", "equals", participant_id)],
            spaces=[knowledge.SITUATION]))
        return hits[0] if hits else None

    def noun_to_concept(self, word: str) -> str | None:
        word = word.strip()
        concepts = self.store.query(QueryPattern(
            concept=None, spaces=[knowledge.ONTOLOGY], kind="concept"))
        for frame in concepts:
            if word in frame.values("noun") or word in frame.values("noun-plural"):
                return frame.id
        return None

    def concept_noun(self, concept: str, plural: bool = False) -> str:
        try:
            frame = self.store.get(concept, space=knowledge.ONTOLOGY)
        except knowledge.KnowledgeError:
            return concept.lower()
        if plural:
            return frame.first("noun-plural") or frame.first("noun") or concept.lower()
        return frame.first("noun") or concept.lower()

    def instance_of(self, concept: str, owner: str | None = None) -> str | None:
        spaces = [knowledge.SITUATION, knowledge.EPISODIC_LT]
        hits = self.store.query(QueryPattern(concept=concept, spaces=spaces))
        if owner is not None:
            owned = [f for f in hits if owner in f.values("owned-by")]
            hits = owned or hits
        if not hits:
            return None
        return sorted(hits, key=lambda f: natural_id_key(f.id))[0].id

    def by_ref(self, text: str) -> str | None:
        ident = text.strip().upper()
        if self.store.exists(ident):
            return ident
        concept = self.noun_to_concept(text)
        if concept:
            return self.instance_of(concept)
        return None

    def zones(self) -> list[Frame]:
        return self.store.query(QueryPattern(
            concept="SEARCHABLE-ZONE", spaces=[knowledge.SITUATION]))

    def zone_by_text(self, text: str) -> str | None:
        text = normalize(text)
        for frame in self.zones():
            if normalize(frame.first("label") or "") == text:
                return frame.id
            if normalize(frame.first("locative") or "") == text:
                return frame.id
        return None

    def zone_display(self, zone_id: str, kind: str) -> str:
        try:
            frame = self.store.get(zone_id)
        except knowledge.KnowledgeError:
            return zone_id
        if kind == "loc":
            return frame.first("locative") or frame.first("label") or zone_id
        return frame.first("label") or zone_id


def _parse_flist(text: str) -> list[tuple[str, str]]:
    pairs = []
    for item in text.split(","):
        tokens = item.split()
        if len(tokens) >= 2:
            pairs.append((tokens[0], " ".join(tokens[1:])))
    return pairs


class Analyzer:
    """Turns chat surfaces into TMR frames inside the agent's store."""

    def __init__(self, store: FrameStore, lexicon: Lexicon):
        self.store = store
        self.lexicon = lexicon
        self.resolver = Resolver(store)
        self.focus: str | None = None  # most recently mentioned object

    def _resolve_slot(self, kind: str, raw: str, speaker: str):
        res = self.resolver
        if kind == "owned":
            concept = res.noun_to_concept(raw)
            if concept is None:
                return None
            owner_frame = res.participant_frame(speaker)
            owner = owner_frame.id if owner_frame else None
            return res.instance_of(concept, owner=owner)
        if kind == "noun":
            concept = res.noun_to_concept(raw)
            return res.instance_of(concept) if concept else None
        if kind == "concept":
            return res.noun_to_concept(raw)
        if kind == "ref":
            return res.by_ref(raw)
        if kind in ("loc", "label"):
            return res.zone_by_text(raw)
        if kind == "labels":
            zones = [res.zone_by_text(part) for part in raw.split(",")]
            return None if any(z is None for z in zones) else zones
        if kind == "flist":
            return _parse_flist(raw) or None
        return raw.strip()

    def analyze(self, surface: str, speaker: str, addressee: str) -> TMR:
        text = normalize(surface)
        entry, match, groups = None, None, None
        for cand_entry, tmpl in self.lexicon.candidates():
            m = tmpl.regex.fullmatch(text)
            if m:
                entry, match, groups = cand_entry, tmpl, m.groupdict()
                break

        if entry is None:
            prop = self.store.instantiate(UNRESOLVED_CONCEPT)
            root = self.store.instantiate("INFORM", properties={
                "proposition": [prop.id], "speaker": [speaker],
                "addressee": [addressee]})
            return TMR(root=root.id, proposition=prop.id, speech_act="INFORM",
                       concept=UNRESOLVED_CONCEPT, speaker=speaker,
                       addressee=addressee, surface=surface, unresolved=True)

        unresolved = False
        slots: dict[str, object] = {}
        for name, kind in match.slots.items():
            raw = groups[name.replace("-", "_")]
            value = self._resolve_slot(kind, raw, speaker)
            if value is None:
                unresolved = True
                logger.debug("unresolved slot %s=%r in %r", name, raw, surface)
            else:
                slots[name] = value

        props: dict[str, list[str]] = {}
        for prop, spec in entry.mr.assigns:
            if spec == "$focus":
                if self.focus is None:
                    unresolved = True
                    continue
                props[prop] = [self.focus]
            elif spec.startswith("{") and spec.endswith("}"):
                value = slots.get(spec[1:-1])
                if value is None:
                    unresolved = True
                    continue
                if isinstance(value, list) and value and isinstance(value[0], tuple):
                    for k, v in value:  # feature pairs become direct props
                        props.setdefault(k.lower(), []).append(v)
                elif isinstance(value, list):
                    props[prop] = [str(v) for v in value]
                else:
                    props[prop] = [str(value)]
            else:
                props[prop] = [spec]

        prop_frame = self.store.instantiate(entry.mr.concept, properties=props)
        root = self.store.instantiate(entry.mr.speech_act, properties={
            "proposition": [prop_frame.id], "speaker": [speaker],
            "addressee": [addressee]})
        obj = props.get("object")
        if obj:
            self.focus = obj[0]
        return TMR(root=root.id, proposition=prop_frame.id,
                   speech_act=entry.mr.speech_act, concept=entry.mr.concept,
                   speaker=speaker, addressee=addressee, surface=surface,
                   slots=slots, entry=entry.name, unresolved=unresolved)


class Generator:
    """Renders meaning into one of the two surface registers."""

    def __init__(self, store: FrameStore, lexicon: Lexicon):
        self.store = store
        self.lexicon = lexicon
        self.resolver = Resolver(store)

    def _render(self, name: str, kind: str | None, slots: dict) -> str:
        if name not in slots:
            raise LanguageError(f"generation slot {name!r} missing")
        value = slots[name]
        res = self.resolver
        if kind is None:
            return str(value)
        if kind == "id":
            return str(value)
        if kind in ("plural", "noun"):
            concept = str(value)
            if not self.store.concept_exists(concept):
                # an instance id was passed; speak about its concept
                try:
                    concept = self.store.get(concept).concept
                except knowledge.KnowledgeError:
                    pass
            return res.concept_noun(concept, plural=(kind == "plural"))
        if kind in ("loc", "label"):
            return res.zone_display(str(value), kind)
        if kind == "labels":
            return ", ".join(res.zone_display(str(z), "label") for z in value)
        if kind == "flist":
            return ", ".join(f"{k} {v}" for k, v in value)
        raise LanguageError(f"unknown render kind {kind!r}")

    def generate(self, speech_act: str, concept: str, slots: dict,
                 register: str) -> str:
        entry = self.lexicon.entry_for(speech_act, concept)
        if entry is None:
            raise LanguageError(
                f"no lexicon entry for ({speech_act}, {concept})")
        if register not in entry.gen:
            raise LanguageError(f"entry {entry.name!r} lacks register "
                                f"{register!r}")
        template = entry.gen[register]
        out, pos = [], 0
        for m in _SLOT_RE.finditer(template):
            out.append(template[pos:m.start()])
            out.append(self._render(m.group(1), m.group(2), slots))
            pos = m.end()
        out.append(template[pos:])
        return "".join(out)


def build_vmr(store: FrameStore, observer: str, tick: int, concept: str,
              features: dict[str, str], cell: tuple[int, int],
              zone_id: str | None) -> tuple[str, str]:
    """Instantiate a visual percept plus its wrapper in scratch space.

    Returns (vmr frame id, percept frame id). Scratch keeps the percept out
    of grounding's own candidate pool."""
    props = {k.lower(): [v] for k, v in sorted(features.items())}
    props["location-cell"] = [f"{cell[0]},{cell[1]}"]
    if zone_id:
        props["zone"] = [zone_id]
    percept = store.instantiate(concept, space=knowledge.SCRATCH,
                                properties=props)
    vprops = dict(props)
    vprops.update({
        "object-type": [concept],
        "percept": [percept.id],
        "observer": [observer],
        "tick": [str(tick)],
    })
    vmr = store.instantiate(VMR_CONCEPT, space=knowledge.SCRATCH,
                            properties=vprops)
    return vmr.id, percept.id


def vmr_summary(store: FrameStore, vmr_id: str) -> str:
    frame = store.get(vmr_id)
    concept = frame.first("object-type") or "?"
    cell = frame.first("location-cell") or "?"
    zone = frame.first("zone") or "open-floor"
    feats = ", ".join(f"{k}={frame.first(k)}"
                      for k in sorted(store.feature_props(frame)))
    text = f"percept {concept} at {zone} ({cell})"
    return f"{text}: {feats}" if feats else text


_THOUGHT_FORMATS = {
    "adopted": "tick {tick}: adopted @{script} ({role})",
    "interrupted": "tick {tick}: SEARCH interrupted — {obj} location known",
    "vmr-mismatch": "tick {tick}: VMR {vmr} does not match {sought}",
    "vmr-match": "tick {tick}: VMR {vmr} grounded to {sought}; location {zone}",
    "plan-selected": "tick {tick}: selected plan @{script} for {goal}",
    "precondition-open": "tick {tick}: precondition open: {slot} of {obj} unknown",
    "preconditions-done": "tick {tick}: preconditions satisfied for @{script}",
    "zones-allocated": "tick {tick}: allocated zones: {alloc}",
    "search-started": "tick {tick}: searching {zone}",
    "zone-outcome": "tick {tick}: zone {zone}: {outcome}",
    "report-sent": "tick {tick}: reported {what} to {who}",
    "plan-done": "tick {tick}: plan @{script} complete",
    "plan-failed": "tick {tick}: plan @{script} failed: {detail}",
    "question-asked": "tick {tick}: asked {who} about {topic}",
    "answer-applied": "tick {tick}: recorded {topic} for {obj}",
    "plan-adopted-from": "tick {tick}: adopted proposed plan from {who}",
    "warning": "tick {tick}: warning: {detail}",
}


def render_thought(kind: str, tick: int, **fields) -> str:
    if kind not in _THOUGHT_FORMATS:
        raise LanguageError(f"unknown thought kind {kind!r}")
    return _THOUGHT_FORMATS[kind].format(tick=tick, **fields)
