"""Tick-based traffic simulation with rule-consulting vehicles and roadside monitors."""
from .agents import ENTER, SPEED_ACTION, Decision, Query, ask, fact, fact_from_list, fact_list, resolve, sense
from .audit import AuditReport, audit
from .config import InvalidConfig, MonitorSpec, SimConfig, load_config, parse_monitors
from .engine import add_vehicle, init_world, run, step, summary
from .monitors import Monitor, Sighting
from .world import (
    DELTA,
    HEADINGS,
    LOG_SCHEMA,
    Event,
    Junction,
    Layout,
    Lights,
    Pedestrian,
    Vehicle,
    World,
    ahead,
    behind,
    turn_target,
)


def observe(monitor: Monitor, world: World, rules=None) -> list[dict]:
    """Potential violations the monitor reports for the current state."""
    from ..rulebase import default_corpus

    return monitor.observe(world, rules if rules is not None else default_corpus().detection)


def decide(world: World, vehicle: Vehicle, rules=None) -> Decision:
    """Sense, query and resolve for a single vehicle, drawing from the world's generator."""
    from ..rulebase import default_corpus

    q = ask(world, vehicle, rules if rules is not None else default_corpus().permissions)
    return resolve(vehicle, q, world.config, world.rng)


__all__ = [
    "AuditReport",
    "audit",
    "DELTA",
    "Decision",
    "ENTER",
    "Event",
    "HEADINGS",
    "InvalidConfig",
    "Junction",
    "LOG_SCHEMA",
    "Layout",
    "Lights",
    "Monitor",
    "MonitorSpec",
    "Pedestrian",
    "Query",
    "SPEED_ACTION",
    "Sighting",
    "SimConfig",
    "Vehicle",
    "World",
    "add_vehicle",
    "ahead",
    "ask",
    "behind",
    "decide",
    "fact",
    "fact_from_list",
    "fact_list",
    "init_world",
    "load_config",
    "observe",
    "parse_monitors",
    "resolve",
    "run",
    "sense",
    "step",
    "summary",
    "turn_target",
]
