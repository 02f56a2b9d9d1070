"""Grid layout, agent state and the event log.

The map is one horizontal road crossed by two vertical roads.  Each road
has two one-way lanes and traffic keeps left, so with ``y`` growing
southwards:

* row ``h//2 - 1`` carries eastbound traffic, row ``h//2`` westbound;
* for a vertical road at column ``c``, column ``c`` carries northbound
  traffic and ``c + 1`` southbound.

Junction ``A`` (first vertical road) has a traffic light for both axes.
Junction ``B`` has stop signs on the vertical road; horizontal traffic
there has priority.  Each junction box is 2x2 cells.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator

from .config import SimConfig

Cell = tuple[int, int]

HEADINGS = ("N", "E", "S", "W")
DELTA = {"N": (0, -1), "E": (1, 0), "S": (0, 1), "W": (-1, 0)}
LEFT = {"N": "W", "W": "S", "S": "E", "E": "N"}
RIGHT = {v: k for k, v in LEFT.items()}
AXIS = {"N": "vertical", "S": "vertical", "E": "horizontal", "W": "horizontal"}
TURNS = ("straight", "left", "right")

LOG_SCHEMA = "roadcode-events/1"


def ahead(cell: Cell, heading: str) -> Cell:
    dx, dy = DELTA[heading]
    return cell[0] + dx, cell[1] + dy


def behind(cell: Cell, heading: str) -> Cell:
    dx, dy = DELTA[heading]
    return cell[0] - dx, cell[1] - dy


def turn_target(heading: str, turn: str) -> str:
    if turn == "left":
        return LEFT[heading]
    if turn == "right":
        return RIGHT[heading]
    return heading


@dataclass(frozen=True)
class Junction:
    id: str
    control: str  # "traffic_light" | "stop_sign"
    x0: int  # northbound column; southbound is x0 + 1
    y0: int  # eastbound row; westbound is y0 + 1

    @property
    def box(self) -> frozenset[Cell]:
        return frozenset((self.x0 + dx, self.y0 + dy) for dx in (0, 1) for dy in (0, 1))

    def lane(self, heading: str) -> tuple[str, int]:
        """("x", col) or ("y", row) of the lane carrying ``heading`` through this box."""
        return {
            "N": ("x", self.x0),
            "S": ("x", self.x0 + 1),
            "E": ("y", self.y0),
            "W": ("y", self.y0 + 1),
        }[heading]

    def on_lane(self, cell: Cell, heading: str) -> bool:
        axis, value = self.lane(heading)
        return cell[0 if axis == "x" else 1] == value

    def entry(self, heading: str) -> Cell:
        """First box cell for traffic arriving with ``heading``."""
        return {
            "N": (self.x0, self.y0 + 1),
            "S": (self.x0 + 1, self.y0),
            "E": (self.x0, self.y0),
            "W": (self.x0 + 1, self.y0 + 1),
        }[heading]

    def stop_line(self, heading: str) -> Cell:
        return behind(self.entry(heading), heading)

    def approach(self, heading: str, depth: int) -> list[Cell]:
        """Cells at distance 1..depth before the box, nearest first."""
        cells, c = [], self.entry(heading)
        for _ in range(depth):
            c = behind(c, heading)
            cells.append(c)
        return cells

    def controlled(self, heading: str) -> bool:
        """Does traffic with this heading face the junction's control?"""
        return self.control == "traffic_light" or AXIS[heading] == "vertical"


@dataclass(frozen=True)
class Layout:
    width: int
    height: int

    @cached_property
    def junctions(self) -> dict[str, Junction]:
        y0 = self.height // 2 - 1
        return {
            "A": Junction("A", "traffic_light", self.width // 3, y0),
            "B": Junction("B", "stop_sign", 2 * self.width // 3, y0),
        }

    @cached_property
    def row_e(self) -> int:
        return self.height // 2 - 1

    @cached_property
    def cols(self) -> tuple[int, ...]:
        return tuple(j.x0 for j in self.junctions.values())

    @cached_property
    def box_of(self) -> dict[Cell, str]:
        return {c: j.id for j in self.junctions.values() for c in j.box}

    def inside(self, cell: Cell) -> bool:
        return 0 <= cell[0] < self.width and 0 <= cell[1] < self.height

    def tag(self, cell: Cell) -> str:
        """``junction(A)``, ``road(E)`` and so on, or ``off-road``."""
        if not self.inside(cell):
            return "outside"
        if cell in self.box_of:
            return f"junction({self.box_of[cell]})"
        lanes = self.lanes_at(cell)
        return f"road({lanes[0]})" if lanes else "off-road"

    def lanes_at(self, cell: Cell) -> tuple[str, ...]:
        x, y = cell
        out = []
        if y == self.row_e:
            out.append("E")
        if y == self.row_e + 1:
            out.append("W")
        for c in self.cols:
            if x == c:
                out.append("N")
            if x == c + 1:
                out.append("S")
        return tuple(out)

    def is_road(self, cell: Cell) -> bool:
        return self.inside(cell) and (cell in self.box_of or bool(self.lanes_at(cell)))

    @cached_property
    def entry_points(self) -> tuple[tuple[Cell, str], ...]:
        w, h, r = self.width, self.height, self.row_e
        pts = [((0, r), "E"), ((w - 1, r + 1), "W")]
        for c in self.cols:
            pts += [((c, h - 1), "N"), ((c + 1, 0), "S")]
        return tuple(pts)

    @cached_property
    def crossings(self) -> tuple[tuple[Cell, str], ...]:
        """Pedestrian crossing points: a kerb cell and the walking direction.

        Placed midway between junctions and map edges, clear of every box.
        """
        r = self.row_e
        a, b = self.cols
        pts = [((a // 2, r - 1), "S"), (((a + b) // 2 + 1, r + 2), "N"), ((b + (self.width - b) // 2 + 1, r - 1), "S")]
        for c in self.cols:
            pts.append(((c - 1, r // 2), "E"))
            pts.append(((c + 2, r + 2 + (self.height - r - 2) // 2), "W"))
        return tuple(pts)

    def approach_of(self, cell: Cell, heading: str) -> tuple[str, int] | None:
        """(junction id, distance) of the next box ahead, if ``cell`` is on a lane leading to one."""
        if cell in self.box_of or heading not in self.lanes_at(cell):
            return None
        c, d = cell, 0
        while True:
            c = ahead(c, heading)
            d += 1
            if not self.inside(c):
                return None
            if c in self.box_of:
                return self.box_of[c], d

    @cached_property
    def road_count(self) -> int:
        return 1 + len(self.cols)


@dataclass
class Vehicle:
    plate: str
    kind: str  # car | ambulance
    controller: str  # human | autonomous
    pos: Cell
    heading: str
    speed: int = 0
    goal: str | None = None  # action currently being attempted
    target: str | None = None  # heading to leave the current junction on
    delay: int | None = None  # pending reaction delay (human only)
    cleared: str | None = None  # junction the vehicle may enter this tick

    @property
    def number(self) -> int:
        return int(self.plate.lstrip("v"))


@dataclass
class Pedestrian:
    id: str
    pos: Cell
    heading: str
    crossing: bool = False
    steps_left: int = 3  # two lane cells and the far kerb

    @property
    def number(self) -> int:
        return int(self.id.lstrip("p"))


@dataclass(frozen=True)
class Event:
    tick: int
    type: str
    payload: dict

    def to_json(self) -> str:
        return dumps({"tick": self.tick, "type": self.type, "payload": self.payload})

    @classmethod
    def from_json(cls, obj: dict) -> "Event":
        return cls(obj["tick"], obj["type"], obj["payload"])


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


@dataclass
class Lights:
    green_ticks: int
    red_ticks: int
    offset: int

    def colour(self, tick: int, axis: str) -> str:
        phase = (tick + self.offset) % (self.green_ticks + self.red_ticks)
        horizontal_green = phase < self.green_ticks
        if axis == "horizontal":
            return "green" if horizontal_green else "red"
        return "red" if horizontal_green else "green"

    def state(self, tick: int) -> dict[str, str]:
        return {"horizontal": self.colour(tick, "horizontal"), "vertical": self.colour(tick, "vertical")}


@dataclass
class World:
    config: SimConfig
    seed: int
    layout: Layout
    lights: Lights
    rng: random.Random
    tick: int = 0
    vehicles: dict[str, Vehicle] = field(default_factory=dict)
    pedestrians: dict[str, Pedestrian] = field(default_factory=dict)
    monitors: list = field(default_factory=list)
    events: list[Event] = field(default_factory=list)
    spawned: int = 0
    despawned: int = 0
    next_vehicle: int = 1
    next_pedestrian: int = 1
    light_state: dict[str, str] = field(default_factory=dict)

    @property
    def junctions(self) -> dict[str, Junction]:
        return self.layout.junctions

    def occupied(self) -> dict[Cell, str]:
        occ = {v.pos: v.plate for v in self.vehicles.values()}
        occ.update({p.pos: p.id for p in self.pedestrians.values() if self.layout.is_road(p.pos)})
        return occ

    def ordered_vehicles(self) -> list[Vehicle]:
        return sorted(self.vehicles.values(), key=lambda v: v.number)

    def emit(self, type_: str, payload: dict) -> None:
        self.events.append(Event(self.tick, type_, payload))

    def header(self) -> dict:
        return {
            "type": "header",
            "schema": LOG_SCHEMA,
            "seed": self.seed,
            "config": self.config.as_dict(),
            "lights": self.lights.state(0),
        }

    def log_lines(self) -> Iterator[str]:
        yield dumps(self.header())
        for e in self.events:
            yield e.to_json()

    def log_text(self) -> str:
        return "".join(line + "\n" for line in self.log_lines())

    def write_log(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for line in self.log_lines():
                fh.write(line + "\n")

    def snapshot(self) -> dict:
        """Plain-data view of the full state, used for determinism checks."""
        return {
            "tick": self.tick,
            "seed": self.seed,
            "rng": self.rng.getstate(),
            "vehicles": [vars(v).copy() for v in self.ordered_vehicles()],
            "pedestrians": [vars(p).copy() for p in sorted(self.pedestrians.values(), key=lambda p: p.number)],
            "monitors": [m.snapshot() for m in self.monitors],
            "events": [e.to_json() for e in self.events],
            "counts": (self.spawned, self.despawned, self.next_vehicle, self.next_pedestrian),
        }
