"""Tick loop.

Each tick runs, in order: lights, spawning, sensing and deciding (on the
state left by the previous tick), vehicle movement, pedestrians, monitors.
Events are appended to the world's log as they happen.
"""
from __future__ import annotations

import random
from concurrent.futures import Executor, ThreadPoolExecutor
from contextlib import nullcontext
from typing import Callable

from ..logic import RuleSet
from ..rulebase import Corpus, default_corpus
from .agents import ENTER, Decision, Query, ask, fact_list, resolve
from .config import SimConfig
from .monitors import Monitor
from .world import AXIS, Cell, Layout, Lights, Pedestrian, Vehicle, World, ahead, behind, turn_target


def init_world(config: SimConfig | None = None, seed: int | None = None) -> World:
    """Fresh world at tick 0 with no agents; identical for identical (config, seed)."""
    config = config or SimConfig()
    if seed is None:
        seed = config.seed
    else:
        config = config.replace(seed=seed)
    offset = 0 if config.light_start == "horizontal" else config.light_green_ticks
    lights = Lights(config.light_green_ticks, config.light_red_ticks, offset)
    world = World(config, seed, Layout(config.width, config.height), lights, random.Random(seed))
    world.light_state = lights.state(0)
    world.monitors = [Monitor.build(spec, world) for spec in config.monitor_specs]
    return world


def add_vehicle(
    world: World,
    pos: Cell,
    heading: str,
    kind: str = "car",
    controller: str = "autonomous",
    speed: int = 0,
) -> Vehicle:
    """Place a vehicle directly (used by scripted scenarios and tests)."""
    if not world.layout.is_road(pos) or heading not in world.layout.lanes_at(pos) and pos not in world.layout.box_of:
        raise ValueError(f"{pos} is not a {heading}-bound lane cell")
    if pos in world.occupied():
        raise ValueError(f"{pos} is occupied")
    plate = f"v{world.next_vehicle}"
    world.next_vehicle += 1
    v = Vehicle(plate, kind, controller, pos, heading, speed)
    world.vehicles[plate] = v
    world.spawned += 1
    world.emit(
        "Spawned",
        {"plate": plate, "kind": kind, "controller": controller, "cell": list(pos), "heading": heading},
    )
    return v


# -- phases ---------------------------------------------------------------------


def _lights(world: World) -> None:
    state = world.lights.state(world.tick)
    if state != world.light_state:
        world.light_state = state
        world.emit("LightChanged", {"junction": "A", **state})


def _spawn(world: World) -> None:
    cfg, rng = world.config, world.rng
    occupied = world.occupied()
    for cell, heading in world.layout.entry_points:
        if rng.random() >= cfg.spawn_rate:
            continue
        kind = "ambulance" if rng.random() < cfg.ambulance_fraction else "car"
        controller = "human" if rng.random() < cfg.human_fraction else "autonomous"
        if cell in occupied:
            continue
        occupied[cell] = add_vehicle(world, cell, heading, kind, controller).plate
    for cell, heading in world.layout.crossings:
        if rng.random() >= cfg.pedestrian_rate or any(p.pos == cell for p in world.pedestrians.values()):
            continue
        pid = f"p{world.next_pedestrian}"
        world.next_pedestrian += 1
        world.pedestrians[pid] = Pedestrian(pid, cell, heading)
        world.emit("Spawned", {"plate": pid, "kind": "pedestrian", "cell": list(cell), "heading": heading})


def _decide(world: World, rules: RuleSet, executor: Executor | None) -> list[Decision]:
    vehicles = world.ordered_vehicles()
    if executor is None:
        queries = [ask(world, v, rules) for v in vehicles]
    else:
        queries = list(executor.map(lambda v: ask(world, v, rules), vehicles))
    decisions = []
    for v, q in zip(vehicles, queries):
        d = resolve(v, q, world.config, world.rng)
        decisions.append(d)
        if q is not None:
            world.emit("QueryMade", _query_payload(q, d))
        v.cleared = q.junction if d.action == "enter" else None
        if d.action == "enter":
            v.goal, v.target = ENTER, turn_target(v.heading, d.turn or "straight")
    return decisions


def _query_payload(q: Query, d: Decision) -> dict:
    return {
        "plate": q.plate,
        "junction": q.junction,
        "goal": fact_list(q.goal),
        "answer": q.answer,
        "decision": d.action,
        "reason": d.reason,
        "error": q.error,
        "facts": [fact_list(f) for f in q.scenario],
    }


def _priority(world: World, v: Vehicle) -> tuple:
    in_box = v.pos in world.layout.box_of
    turning = v.target is not None and v.target != v.heading
    return (not in_box, turning, v.number)


def _next_cell(world: World, v: Vehicle) -> tuple[Cell, str]:
    heading = v.heading
    box = world.layout.box_of
    if v.pos in box and v.target and v.target != heading:
        j = world.junctions[box[v.pos]]
        if j.on_lane(v.pos, v.target):
            heading = v.target
    return ahead(v.pos, heading), heading


def _move(world: World, decisions: list[Decision]) -> None:
    layout = world.layout
    budget = {d.plate: d.speed if d.action != "stop" else 0 for d in decisions}
    start = {v.plate: v.pos for v in world.vehicles.values()}
    moved = {p: 0 for p in budget}
    occupied = world.occupied()
    order = sorted(world.vehicles.values(), key=lambda v: _priority(world, v))
    for _ in range(max(budget.values(), default=0)):
        done: set[str] = set()
        progress = True
        while progress:
            progress = False
            for v in order:
                if v.plate in done or v.plate not in world.vehicles or moved[v.plate] >= budget[v.plate]:
                    continue
                cell, heading = _next_cell(world, v)
                entering = cell in layout.box_of and v.pos not in layout.box_of
                if entering and v.cleared != layout.box_of[cell]:
                    done.add(v.plate)  # held at the stop line
                    continue
                if cell in occupied:
                    continue
                done.add(v.plate)
                progress = True
                del occupied[v.pos]
                moved[v.plate] += 1
                if not layout.inside(cell):
                    del world.vehicles[v.plate]
                    world.despawned += 1
                    world.emit("Despawned", {"plate": v.plate, "cell": list(v.pos)})
                    continue
                v.pos, v.heading = cell, heading
                occupied[cell] = v.plate
                if entering:
                    v.cleared = None
    for v in world.ordered_vehicles():
        v.speed = moved[v.plate]
        v.cleared = None
        if v.pos not in layout.box_of:
            v.target = v.goal = None
        if v.pos != start[v.plate]:
            world.emit(
                "Moved",
                {"plate": v.plate, "from": list(start[v.plate]), "to": list(v.pos), "speed": v.speed, "heading": v.heading},
            )


def _pedestrians(world: World) -> None:
    """Walk one cell, unless a vehicle is in the next cell or about to drive into it."""
    layout = world.layout
    occupied = world.occupied()
    vehicles = {v.pos for v in world.vehicles.values()}
    for p in sorted(world.pedestrians.values(), key=lambda p: p.number):
        target = ahead(p.pos, p.heading)
        if target in occupied:
            continue
        lanes = layout.lanes_at(target)
        if lanes and behind(target, lanes[0]) in vehicles:
            continue
        src = p.pos
        occupied.pop(src, None)
        p.pos = target
        p.crossing = layout.is_road(target)
        p.steps_left -= 1
        world.emit("Moved", {"plate": p.id, "from": list(src), "to": list(target), "speed": 1, "heading": p.heading})
        if p.steps_left <= 0:
            del world.pedestrians[p.id]
            world.emit("Despawned", {"plate": p.id, "cell": list(target)})
        elif p.crossing:
            occupied[target] = p.id


def _monitors(world: World, detection: RuleSet) -> None:
    for m in world.monitors:
        for pv in m.observe(world, detection):
            world.emit("PotentialViolation", pv)


def step(world: World, corpus: Corpus | None = None, executor: Executor | None = None) -> World:
    """Advance the world by one tick in place and return it."""
    corpus = corpus or default_corpus()
    _lights(world)
    _spawn(world)
    decisions = _decide(world, corpus.permissions, executor)
    _move(world, decisions)
    _pedestrians(world)
    _monitors(world, corpus.detection)
    world.tick += 1
    return world


def run(
    config: SimConfig | None = None,
    seed: int | None = None,
    ticks: int = 1000,
    corpus: Corpus | None = None,
    parallel: bool = False,
    workers: int = 4,
    setup: Callable[[World], None] | None = None,
    on_tick: Callable[[World], None] | None = None,
) -> World:
    """Run ``ticks`` ticks.  ``parallel`` evaluates vehicle queries on a thread pool."""
    if ticks < 0:
        raise ValueError("ticks must be >= 0")
    world = init_world(config, seed)
    corpus = corpus or default_corpus()
    if setup is not None:
        setup(world)
    pool = ThreadPoolExecutor(max_workers=workers) if parallel else nullcontext()
    with pool as executor:
        for _ in range(ticks):
            step(world, corpus, executor)
            if on_tick is not None:
                on_tick(world)
    return world


def summary(world: World) -> dict:
    counts: dict[str, int] = {}
    for e in world.events:
        counts[e.type] = counts.get(e.type, 0) + 1
    vehicles = sum(1 for e in world.events if e.type == "Spawned" and e.payload["kind"] != "pedestrian")
    return {
        "ticks": world.tick,
        "vehicles_spawned": vehicles,
        "queries": counts.get("QueryMade", 0),
        "potential_violations": counts.get("PotentialViolation", 0),
        "alive": len(world.vehicles),
        "events": len(world.events),
    }


__all__ = ["AXIS", "add_vehicle", "init_world", "run", "step", "summary"]
