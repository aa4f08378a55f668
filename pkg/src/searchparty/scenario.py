"""Scenario files: the single declarative source for world, ontology, and casting.

Sectioned plain text. ``#`` starts a comment everywhere except inside [grid],
where ``#`` is a wall cell. All validation errors carry the offending line
number so authoring mistakes point at themselves.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

from .world import Cell, RobotBody, World, WorldObject, Zone

logger = logging.getLogger(__name__)

KNOWN_VERBS = ("goto", "search-zone", "scan", "pick")
ROBOT_CLASSES = ("ugv", "drone")


class ScenarioError(Exception):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


@dataclass
class RobotSpec:
    id: str
    rclass: str
    start: Cell
    commands: tuple[str, ...]
    idle: str = "wait"


@dataclass
class ParticipantSpec:
    id: str
    kind: str  # "human"
    display: str


@dataclass
class ConceptDef:
    name: str
    parents: tuple[str, ...]
    props: dict[str, str]


@dataclass
class SeedFrame:
    space: str
    id: str
    concept: str
    props: dict[str, str]


@dataclass
class Scenario:
    path: Path
    name: str
    seed: int
    location_id: str
    rows: list[str]
    zones: list[Zone]
    objects: list[WorldObject]
    robots: list[RobotSpec]
    participants: list[ParticipantSpec]
    ontology: list[ConceptDef]
    seeds: list[SeedFrame]
    feature_keys: tuple[str, ...]
    scripts_path: Path
    lexicon_path: Path
    tick_limit: int = 600
    extra: dict[str, str] = field(default_factory=dict)

    def humans(self) -> list[ParticipantSpec]:
        return [p for p in self.participants if p.kind == "human"]


def _parse_cell(text: str, line: int) -> Cell:
    try:
        x, y = text.split(",")
        return (int(x.strip()), int(y.strip()))
    except ValueError:
        raise ScenarioError(f"bad cell {text!r}, expected x,y", line) from None


def _parse_props(text: str, line: int) -> dict[str, str]:
    props: dict[str, str] = {}
    for pair in filter(None, (p.strip() for p in text.split(";"))):
        if "=" not in pair:
            raise ScenarioError(f"bad property {pair!r}, expected key=value", line)
        k, v = pair.split("=", 1)
        props[k.strip()] = v.strip()
    return props


def _sections(raw: str) -> dict[str, list[tuple[int, str]]]:
    out: dict[str, list[tuple[int, str]]] = {}
    current: str | None = None
    for lineno, line in enumerate(raw.splitlines(), start=1):
        stripped = line.strip()
        if current != "grid":
            if "#" in stripped:
                stripped = stripped.split("#", 1)[0].strip()
        if not stripped:
            continue
        if stripped.startswith("[") and stripped.endswith("]"):
            current = stripped[1:-1].strip().lower()
            out.setdefault(current, [])
            continue
        if current is None:
            raise ScenarioError(f"content before any [section]: {stripped!r}", lineno)
        out[current].append((lineno, stripped))
    return out


def load_scenario(path: str | Path) -> Scenario:
    """Parse and validate a scenario file."""
    path = Path(path)
    if not path.exists():
        raise ScenarioError(f"no such scenario file: {path}")
    sections = _sections(path.read_text())

    for required in ("meta", "grid", "zones", "robots", "participants", "ontology", "files"):
        if required not in sections:
            raise ScenarioError(f"missing [{required}] section in {path.name}")

    meta: dict[str, str] = {}
    meta_lines: dict[str, int] = {}
    for lineno, line in sections["meta"]:
        if "=" not in line:
            raise ScenarioError(f"bad meta line {line!r}", lineno)
        k, v = (s.strip() for s in line.split("=", 1))
        meta[k] = v
        meta_lines[k] = lineno
    name = meta.get("name", path.stem)
    location_id = meta.get("location", "LOCATION-1")
    try:
        seed = int(meta.get("seed", "0"))
    except ValueError:
        raise ScenarioError("meta seed must be an integer", meta_lines.get("seed")) from None
    try:
        tick_limit = int(meta.get("tick-limit", "600"))
    except ValueError:
        raise ScenarioError("meta tick-limit must be an integer",
                            meta_lines.get("tick-limit")) from None

    # grid ------------------------------------------------------------------
    rows = [line for _, line in sections["grid"]]
    grid_first_line = sections["grid"][0][0] if sections["grid"] else None
    if not rows:
        raise ScenarioError("empty [grid] section", grid_first_line)
    width = len(rows[0])
    for (lineno, line) in sections["grid"]:
        if len(line) != width:
            raise ScenarioError(
                f"grid row has length {len(line)}, expected {width}", lineno)

    # zones -------------------------------------------------------------------
    zones: list[Zone] = []
    zone_letters: dict[str, Zone] = {}
    for lineno, line in sections["zones"]:
        parts = [p.strip() for p in line.split("|")]
        if len(parts) != 6:
            raise ScenarioError(
                "zone needs: letter | id | type | label | locative | waypoints", lineno)
        letter, zid, ztype, label, locative, wp_text = parts
        if len(letter) != 1 or not letter.isalpha() or not letter.islower():
            raise ScenarioError(f"zone letter must be one lowercase letter, got {letter!r}", lineno)
        if ztype not in ("a", "b", "c"):
            raise ScenarioError(f"zone type must be a, b, or c, got {ztype!r}", lineno)
        if letter in zone_letters:
            raise ScenarioError(f"duplicate zone letter {letter!r}", lineno)
        if any(z.id == zid for z in zones):
            raise ScenarioError(f"duplicate zone id {zid!r}", lineno)
        waypoints = [_parse_cell(w, lineno) for w in wp_text.split(";") if w.strip()]
        if not waypoints:
            raise ScenarioError(f"zone {zid} declares no waypoints", lineno)
        zone = Zone(id=zid, letter=letter, ztype=ztype, label=label,
                    locative=locative, waypoints=waypoints)
        zones.append(zone)
        zone_letters[letter] = zone

    for y, row in enumerate(rows):
        for x, ch in enumerate(row):
            if ch in ("#", "."):
                continue
            if ch not in zone_letters:
                raise ScenarioError(
                    f"grid cell ({x},{y}) uses undeclared zone letter {ch!r}",
                    grid_first_line)
            zone_letters[ch].cells.add((x, y))

    for lineno, line in sections["zones"]:
        zid = [p.strip() for p in line.split("|")][1]
        zone = next(z for z in zones if z.id == zid)
        if not zone.cells:
            raise ScenarioError(f"zone {zid} has no cells in the grid", lineno)
        for wp in zone.waypoints:
            if wp not in zone.cells:
                raise ScenarioError(
                    f"zone {zid} waypoint ({wp[0]},{wp[1]}) not on a zone cell", lineno)

    # features ----------------------------------------------------------------
    feature_keys: tuple[str, ...] = ()
    for lineno, line in sections.get("features", []):
        feature_keys = tuple(k.strip() for k in line.split(",") if k.strip())

    # ontology ------------------------------------------------------------------
    ontology: list[ConceptDef] = []
    declared = {"ALL"}
    for lineno, line in sections["ontology"]:
        parts = [p.strip() for p in line.split("|")]
        if len(parts) not in (2, 3):
            raise ScenarioError("concept needs: name | parents [| props]", lineno)
        cname = parts[0]
        parents = tuple(p.strip() for p in parts[1].split(",") if p.strip())
        props = _parse_props(parts[2], lineno) if len(parts) == 3 else {}
        if cname in declared:
            raise ScenarioError(f"duplicate concept {cname!r}", lineno)
        for parent in parents:
            if parent not in declared:
                raise ScenarioError(
                    f"concept {cname} names undeclared parent {parent!r}", lineno)
        declared.add(cname)
        ontology.append(ConceptDef(cname, parents, props))

    # objects -------------------------------------------------------------------
    objects: list[WorldObject] = []
    for lineno, line in sections.get("objects", []):
        parts = [p.strip() for p in line.split("|")]
        if len(parts) not in (4, 5):
            raise ScenarioError(
                "object needs: id | concept | cell | features [| graspable]", lineno)
        oid, concept, cell_text, feat_text = parts[:4]
        graspable = len(parts) == 5 and parts[4] == "graspable"
        if any(o.id == oid for o in objects):
            raise ScenarioError(f"duplicate object id {oid!r}", lineno)
        if concept not in declared:
            raise ScenarioError(f"object {oid} has undeclared concept {concept!r}", lineno)
        cell = _parse_cell(cell_text, lineno)
        features = _parse_props(feat_text, lineno)
        for k in features:
            if k not in feature_keys:
                raise ScenarioError(
                    f"object {oid} uses undeclared feature key {k!r}", lineno)
        objects.append(WorldObject(id=oid, concept=concept, cell=cell,
                                   features=features, graspable=graspable))

    # robots ---------------------------------------------------------------------
    robots: list[RobotSpec] = []
    for lineno, line in sections["robots"]:
        parts = [p.strip() for p in line.split("|")]
        if len(parts) not in (4, 5):
            raise ScenarioError(
                "robot needs: id | class | start | commands [| idle=...]", lineno)
        rid, rclass, start_text, cmd_text = parts[:4]
        idle = "wait"
        if len(parts) == 5:
            if not parts[4].startswith("idle="):
                raise ScenarioError(f"unknown robot option {parts[4]!r}", lineno)
            idle = parts[4].split("=", 1)[1]
            if idle not in ("wait", "random-walk"):
                raise ScenarioError(f"idle must be wait or random-walk, got {idle!r}", lineno)
        if any(r.id == rid for r in robots):
            raise ScenarioError(f"duplicate robot id {rid!r}", lineno)
        if rclass not in ROBOT_CLASSES:
            raise ScenarioError(f"robot class must be ugv or drone, got {rclass!r}", lineno)
        commands = tuple(c.strip() for c in cmd_text.split(",") if c.strip())
        for c in commands:
            if c not in KNOWN_VERBS:
                raise ScenarioError(f"robot {rid} lists unknown command {c!r}", lineno)
        robots.append(RobotSpec(id=rid, rclass=rclass,
                                start=_parse_cell(start_text, lineno),
                                commands=commands, idle=idle))
    if not robots:
        raise ScenarioError("scenario declares no robots")

    # participants -----------------------------------------------------------------
    participants: list[ParticipantSpec] = []
    for lineno, line in sections["participants"]:
        parts = [p.strip() for p in line.split("|")]
        if len(parts) != 3:
            raise ScenarioError("participant needs: id | kind | display name", lineno)
        pid, kind, display = parts
        if kind != "human":
            raise ScenarioError(f"participant kind must be human, got {kind!r}", lineno)
        participants.append(ParticipantSpec(id=pid, kind=kind, display=display))
    if not [p for p in participants if p.kind == "human"]:
        raise ScenarioError("scenario needs at least one human participant")

    # seeds ------------------------------------------------------------------------
    seeds: list[SeedFrame] = []
    for lineno, line in sections.get("seeds", []):
        parts = [p.strip() for p in line.split("|")]
        if len(parts) != 4:
            raise ScenarioError("seed frame needs: space | id | concept | props", lineno)
        space, fid, concept, props_text = parts
        if concept not in declared:
            raise ScenarioError(f"seed frame {fid} has undeclared concept {concept!r}", lineno)
        seeds.append(SeedFrame(space=space, id=fid, concept=concept,
                               props=_parse_props(props_text, lineno)))

    # files ---------------------------------------------------------------------------
    files: dict[str, str] = {}
    for lineno, line in sections["files"]:
        if "=" not in line:
            raise ScenarioError(f"bad files line {line!r}", lineno)
        k, v = (s.strip() for s in line.split("=", 1))
        files[k] = v
    for key in ("scripts", "lexicon"):
        if key not in files:
            raise ScenarioError(f"[files] section must name {key}")
    scripts_path = (path.parent / files["scripts"]).resolve()
    lexicon_path = (path.parent / files["lexicon"]).resolve()
    for p in (scripts_path, lexicon_path):
        if not p.exists():
            raise ScenarioError(f"referenced file does not exist: {p}")

    scn = Scenario(
        path=path, name=name, seed=seed, location_id=location_id, rows=rows,
        zones=zones, objects=objects, robots=robots, participants=participants,
        ontology=ontology, seeds=seeds, feature_keys=feature_keys,
        scripts_path=scripts_path, lexicon_path=lexicon_path,
        tick_limit=tick_limit, extra=meta,
    )
    _validate_placement(scn)
    return scn


def _validate_placement(scn: Scenario) -> None:
    world = build_world(scn)
    for obj in scn.objects:
        zone = world.zone_at(obj.cell)
        if zone is None:
            raise ScenarioError(
                f"object {obj.id} at ({obj.cell[0]},{obj.cell[1]}) is not on a zone cell")
    starts: set[Cell] = set()
    for spec in scn.robots:
        if not world.passable(spec.start, spec.rclass):
            raise ScenarioError(
                f"robot {spec.id} start ({spec.start[0]},{spec.start[1]}) "
                f"not passable for class {spec.rclass}")
        if spec.start in starts:
            raise ScenarioError(f"robot {spec.id} shares a start cell")
        starts.add(spec.start)


def build_world(scn: Scenario, seed: int | None = None) -> World:
    """Fresh world instance for one run; ``seed`` overrides the scenario value."""
    zones = [
        Zone(id=z.id, letter=z.letter, ztype=z.ztype, label=z.label,
             locative=z.locative, waypoints=list(z.waypoints), cells=set(z.cells))
        for z in scn.zones
    ]
    objects = [
        WorldObject(id=o.id, concept=o.concept, cell=o.cell,
                    features=dict(o.features), graspable=o.graspable)
        for o in scn.objects
    ]
    robots = [
        RobotBody(id=r.id, rclass=r.rclass, pose=r.start, base=r.start,
                  commands=r.commands, idle=r.idle)
        for r in scn.robots
    ]
    return World(rows=list(scn.rows), zones=zones, objects=objects, robots=robots,
                 seed=scn.seed if seed is None else seed,
                 name=scn.name, location_id=scn.location_id)
