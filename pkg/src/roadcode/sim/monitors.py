"""Roadside monitors: cameras with a narrow cone of vision at one junction.

A monitor only reads plate, position and speed of vehicles inside its
cone, plus the light colour of the approaches it watches.  It remembers
its own earlier observations, which is how it knows a vehicle came from
the stop line or had stopped there.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from ..logic import Const, Literal, RuleSet, Scenario, Solver, Var
from .agents import fact, fact_list
from .config import InvalidConfig, MonitorSpec
from .world import AXIS, Cell, Junction, World


@dataclass(frozen=True)
class Sighting:
    plate: str
    pos: Cell
    speed: int


@dataclass
class Monitor:
    id: str
    junction: Junction
    headings: tuple[str, ...]
    cone: frozenset[Cell]
    stop_lines: dict[Cell, str]
    speed_limit: int
    last: dict[str, Sighting] = field(default_factory=dict)
    episode: dict[str, int] = field(default_factory=dict)
    stopped: set[str] = field(default_factory=set)
    reported: set[tuple[str, str, int]] = field(default_factory=set)

    @classmethod
    def build(cls, spec: MonitorSpec, world: World) -> "Monitor":
        j = world.junctions.get(spec.junction)
        if j is None:
            raise InvalidConfig("monitors", f"unknown junction {spec.junction!r}")
        cells = set(j.box)
        for h in spec.headings:
            cells.update(c for c in j.approach(h, world.config.cone_depth) if world.layout.inside(c))
        stop_lines = {j.stop_line(h): h for h in spec.headings}
        return cls(spec.id, j, spec.headings, frozenset(cells), stop_lines, world.config.speed_limit)

    def sees(self, cell: Cell) -> bool:
        return cell in self.cone

    def look(self, world: World) -> list[Sighting]:
        """Everything observable this tick, ordered by plate number."""
        return [Sighting(v.plate, v.pos, v.speed) for v in world.ordered_vehicles() if v.pos in self.cone]

    def scenario(self, s: Sighting, world: World) -> Scenario:
        facts = [fact("travels_at", s.plate, s.speed), fact("speed_limit", self.speed_limit)]
        if s.speed == 0:
            facts.append(fact("is_stopped", s.plate))
        prev = self.last.get(s.plate)
        if prev is not None and prev.pos in self.stop_lines and s.pos in self.junction.box:
            heading = self.stop_lines[prev.pos]
            if self.junction.control == "traffic_light":
                facts.append(fact("has_light", s.plate, world.light_state[AXIS[heading]]))
            elif self.junction.controlled(heading):
                facts.append(fact("faces_stop_sign", s.plate))
                if s.plate in self.stopped:
                    facts.append(fact("stopped_at_stop_line", s.plate))
        return Scenario.of(facts, name=f"{self.id}:{s.plate}@{world.tick}")

    def observe(self, world: World, rules: RuleSet) -> list[dict]:
        """Run the detection rules on this tick's sightings; return new potential violations."""
        out = []
        seen = self.look(world)
        now: dict[str, Sighting] = {}
        for s in seen:
            if s.plate not in self.last:
                self.episode[s.plate] = self.episode.get(s.plate, 0) + 1
                self.stopped.discard(s.plate)
            scenario = self.scenario(s, world)
            action = Var("Action")
            for sol in Solver(rules, scenario).solve(Literal("potentially_violates", (Const(s.plate), action))):
                act = str(sol.bindings[action])
                key = (s.plate, act, self.episode[s.plate])
                if key in self.reported:
                    continue
                self.reported.add(key)
                out.append(
                    {
                        "monitor": self.id,
                        "junction": self.junction.id,
                        "plate": s.plate,
                        "action": act,
                        "episode": self.episode[s.plate],
                        "facts": [fact_list(f) for f in scenario],
                    }
                )
            if s.pos in self.stop_lines and s.speed == 0:
                self.stopped.add(s.plate)
            now[s.plate] = s
        self.last = now
        return out

    def snapshot(self) -> dict:
        return {
            "id": self.id,
            "last": sorted((k, v.pos, v.speed) for k, v in self.last.items()),
            "episode": sorted(self.episode.items()),
            "stopped": sorted(self.stopped),
            "reported": sorted(self.reported),
        }
