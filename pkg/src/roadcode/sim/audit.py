"""Check safety invariants by replaying an event log.

Only the log is used (plus the layout implied by its header), so the
checks work equally on a live world and on a file written yesterday.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from .config import SimConfig
from .world import Event, Layout


@dataclass
class AuditReport:
    ticks: int = 0
    exclusivity: list[str] = field(default_factory=list)
    unsafe_entries: list[str] = field(default_factory=list)
    conservation: list[str] = field(default_factory=list)
    entries: int = 0
    autonomous_entries: int = 0

    @property
    def ok(self) -> bool:
        return not (self.exclusivity or self.unsafe_entries or self.conservation)


def audit(header: dict, events: Iterable[Event]) -> AuditReport:
    config = SimConfig(**header["config"]) if header.get("config") else SimConfig()
    layout = Layout(config.width, config.height)
    boxes = layout.box_of
    stop_lines = {j.stop_line(h) for j in layout.junctions.values() for h in "NESW"}
    rep = AuditReport()
    pos: dict[str, tuple[int, int]] = {}
    controller: dict[str, str] = {}
    kind: dict[str, str] = {}
    queries: dict[tuple[int, str], dict] = {}
    spawned = despawned = 0
    tick = None

    def close(t: int) -> None:
        cells: dict[tuple[int, int], str] = {}
        for ident, cell in pos.items():
            if kind[ident] == "pedestrian" and not layout.is_road(cell):
                continue  # waiting on the kerb
            if cell in cells:
                rep.exclusivity.append(f"tick {t}: {cells[cell]} and {ident} share {cell}")
            cells[cell] = ident
        alive = sum(1 for i in pos if kind[i] != "pedestrian")
        if spawned - despawned != alive:
            rep.conservation.append(f"tick {t}: spawned {spawned} - despawned {despawned} != alive {alive}")
        rep.ticks = t + 1

    for e in events:
        if tick is not None and e.tick != tick:
            close(tick)
        tick = e.tick
        p = e.payload
        if e.type == "Spawned":
            pos[p["plate"]] = tuple(p["cell"])
            kind[p["plate"]] = p["kind"]
            controller[p["plate"]] = p.get("controller", "")
            if p["kind"] != "pedestrian":
                spawned += 1
        elif e.type == "Despawned":
            if kind.get(p["plate"]) != "pedestrian":
                despawned += 1
            pos.pop(p["plate"], None)
        elif e.type == "QueryMade":
            queries[(e.tick, p["plate"])] = p
        elif e.type == "Moved":
            src, dst = tuple(p["from"]), tuple(p["to"])
            pos[p["plate"]] = dst
            # the only way forward from a stop line is into the box
            if kind.get(p["plate"]) != "pedestrian" and src in stop_lines:
                rep.entries += 1
                if controller.get(p["plate"]) == "autonomous":
                    rep.autonomous_entries += 1
                    q = queries.get((e.tick, p["plate"]))
                    if q is None or not q["answer"] or q.get("error"):
                        rep.unsafe_entries.append(f"tick {e.tick}: {p['plate']} entered {dst} without permission")
    if tick is not None:
        close(tick)
    return rep
