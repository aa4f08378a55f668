"""Desk-scale grid world: zones, objects, robot bodies, sensing, lockstep moves.

Coordinates are (x, y) with y growing downward; neighbor order everywhere is
N, E, S, W, which is also the BFS tie-break. The world owns the only RNG in the
whole simulation and counts its draws so state digests expose any stray use.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field

Cell = tuple[int, int]

N, E, S, W = (0, -1), (1, 0), (0, 1), (-1, 0)
STEP_ORDER = (N, E, S, W)
STEP_NAMES = {N: "N", E: "E", S: "S", W: "W"}

# zone type -> robot classes that may occupy its cells
GROUND_CLASSES = ("ugv",)
AIR_CLASSES = ("drone",)

VISIBLE_TYPES = {"ugv": ("a", "c"), "drone": ("a", "b")}


class WorldError(Exception):
    pass


@dataclass
class Zone:
    id: str
    letter: str
    ztype: str  # "a" both, "b" elevated (air only), "c" under-surface (ground only)
    label: str
    locative: str
    waypoints: list[Cell]
    cells: set[Cell] = field(default_factory=set)

    def accessible_to(self, rclass: str) -> bool:
        if self.ztype == "a":
            return True
        if self.ztype == "b":
            return rclass in AIR_CLASSES
        return rclass in GROUND_CLASSES


@dataclass
class WorldObject:
    id: str
    concept: str
    cell: Cell
    features: dict[str, str] = field(default_factory=dict)
    graspable: bool = False
    carried_by: str | None = None


@dataclass
class RobotBody:
    id: str
    rclass: str  # "ugv" | "drone"
    pose: Cell
    base: Cell
    commands: tuple[str, ...]
    idle: str = "wait"
    carried: str | None = None
    collision_flag: bool = False


@dataclass
class Detection:
    object_id: str
    concept: str
    features: dict[str, str]
    cell: Cell
    zone_id: str


@dataclass
class Actuation:
    kind: str  # "move" | "none" | "grasp"
    target: Cell | None = None
    object_id: str | None = None
    label: str = "hover"  # trace label: move:N, dwell, sidestep, wait, ...


class World:
    def __init__(
        self,
        rows: list[str],
        zones: list[Zone],
        objects: list[WorldObject],
        robots: list[RobotBody],
        seed: int,
        name: str = "world",
        location_id: str = "LOCATION-1",
    ) -> None:
        self.name = name
        self.location_id = location_id
        self.width = len(rows[0]) if rows else 0
        self.height = len(rows)
        self.rows = rows
        self.zones: dict[str, Zone] = {z.id: z for z in zones}
        self.zone_by_cell: dict[Cell, str] = {}
        for z in zones:
            for c in z.cells:
                self.zone_by_cell[c] = z.id
        self.objects: dict[str, WorldObject] = {o.id: o for o in objects}
        self.robots: dict[str, RobotBody] = {r.id: r for r in sorted(robots, key=lambda r: r.id)}
        self.tick = 0
        self.seed = seed
        self.rng = random.Random(seed)
        self.rng_draws = 0
        # the only randomized strategic decision: who leads the robot team
        self.leader_id = self.rand_choice(sorted(self.robots))

    # -- randomness --------------------------------------------------------

    def rand_choice(self, seq):
        self.rng_draws += 1
        return self.rng.choice(list(seq))

    # -- geometry ----------------------------------------------------------

    def in_bounds(self, cell: Cell) -> bool:
        x, y = cell
        return 0 <= x < self.width and 0 <= y < self.height

    def is_wall(self, cell: Cell) -> bool:
        x, y = cell
        return self.rows[y][x] == "#"

    def zone_at(self, cell: Cell) -> Zone | None:
        zid = self.zone_by_cell.get(cell)
        return self.zones[zid] if zid else None

    def passable(self, cell: Cell, rclass: str) -> bool:
        if not self.in_bounds(cell) or self.is_wall(cell):
            return False
        zone = self.zone_at(cell)
        if zone is None:
            return True
        return zone.accessible_to(rclass)

    def neighbors(self, cell: Cell) -> list[Cell]:
        x, y = cell
        return [(x + dx, y + dy) for dx, dy in STEP_ORDER]

    def bfs_path(self, start: Cell, goal: Cell, rclass: str,
                 blocked: set[Cell] = frozenset()) -> list[Cell] | None:
        """Shortest path as cells after ``start``; None when unreachable.

        First-visitor-wins with N,E,S,W expansion order fixes tie-breaks.
        """
        if start == goal:
            return []
        from collections import deque
        parent: dict[Cell, Cell] = {start: start}
        q = deque([start])
        while q:
            cur = q.popleft()
            for nxt in self.neighbors(cur):
                if nxt in parent or nxt in blocked or not self.passable(nxt, rclass):
                    continue
                parent[nxt] = cur
                if nxt == goal:
                    path = [nxt]
                    while parent[path[-1]] != start:
                        path.append(parent[path[-1]])
                    path.reverse()
                    return path
                q.append(nxt)
        return None

    # -- sensing -----------------------------------------------------------

    def sensed_cells(self, robot: RobotBody) -> list[Cell]:
        return [robot.pose] + [c for c in self.neighbors(robot.pose) if self.in_bounds(c)]

    def sense(self, robot_id: str) -> list[Detection]:
        """Objects on visible-zone cells within reach, ordered by object id."""
        robot = self.robots[robot_id]
        reach = set(self.sensed_cells(robot))
        visible = VISIBLE_TYPES[robot.rclass]
        out: list[Detection] = []
        for oid in sorted(self.objects):
            obj = self.objects[oid]
            if obj.carried_by is not None or obj.cell not in reach:
                continue
            zone = self.zone_at(obj.cell)
            if zone is None or zone.ztype not in visible:
                continue
            out.append(Detection(object_id=oid, concept=obj.concept,
                                 features=dict(obj.features), cell=obj.cell,
                                 zone_id=zone.id))
        return out

    # -- stepping ----------------------------------------------------------

    def apply(self, actuations: dict[str, Actuation]) -> None:
        """Apply one actuation per robot; id order resolves move conflicts.

        A rejected move (impassable, non-adjacent, or target occupied after
        earlier robots moved) sets the loser's collision flag.
        """
        for robot in self.robots.values():
            robot.collision_flag = False
        poses = {rid: r.pose for rid, r in self.robots.items()}
        for rid in sorted(self.robots):
            act = actuations.get(rid)
            robot = self.robots[rid]
            if act is None or act.kind == "none":
                continue
            if act.kind == "grasp":
                obj = self.objects.get(act.object_id or "")
                near = [robot.pose] + self.neighbors(robot.pose)
                if obj is not None and obj.graspable and obj.carried_by is None \
                        and obj.cell in near:
                    obj.carried_by = rid
                    robot.carried = obj.id
                else:
                    robot.collision_flag = False  # grasp misses are not collisions
                continue
            target = act.target
            ok = (
                target is not None
                and target in self.neighbors(robot.pose)
                and self.passable(target, robot.rclass)
                and all(p != target for r2, p in poses.items() if r2 != rid)
            )
            if ok:
                poses[rid] = target
                robot.pose = target
                if robot.carried:
                    self.objects[robot.carried].cell = target
            else:
                robot.collision_flag = True
        self.tick += 1

    # -- export ------------------------------------------------------------

    def digest(self) -> str:
        parts = [f"t={self.tick}", f"leader={self.leader_id}"]
        for rid in sorted(self.robots):
            r = self.robots[rid]
            parts.append(f"{rid}@{r.pose[0]},{r.pose[1]}/c={r.carried or '-'}"
                         f"/f={int(r.collision_flag)}")
        for oid in sorted(self.objects):
            o = self.objects[oid]
            parts.append(f"{oid}@{o.cell[0]},{o.cell[1]}/by={o.carried_by or '-'}")
        parts.append(f"draws={self.rng_draws}")
        return hashlib.sha256("|".join(parts).encode()).hexdigest()

    def layout_snapshot(self) -> dict:
        """Static map description, sent once on the map channel."""
        return {
            "width": self.width,
            "height": self.height,
            "rows": list(self.rows),
            "zones": [
                {
                    "id": z.id,
                    "type": z.ztype,
                    "label": z.label,
                    "waypoints": [list(c) for c in z.waypoints],
                    "cells": sorted([list(c) for c in z.cells]),
                }
                for z in self.zones.values()
            ],
            "robots": [
                {"id": r.id, "class": r.rclass, "base": list(r.base)}
                for r in self.robots.values()
            ],
        }

    def pose_snapshot(self) -> dict:
        return {
            "tick": self.tick,
            "robots": [
                {"id": r.id, "at": list(r.pose), "carried": r.carried,
                 "collision": r.collision_flag}
                for r in self.robots.values()
            ],
        }
