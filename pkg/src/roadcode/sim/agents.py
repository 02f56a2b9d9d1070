"""What a vehicle senses and how its controller decides.

Deciding is split in two so that queries can run concurrently:
:func:`ask` is a pure function of the pre-tick state and the rules, and
:func:`resolve` applies the controller's random draws in plate order.
"""
from __future__ import annotations

import random
from dataclasses import dataclass

from ..logic import Const, Literal, LogicError, RuleSet, Scenario, Solver
from .config import SimConfig
from .world import AXIS, Vehicle, World

ENTER = "enter_the_junction"
SPEED_ACTION = "drive_within_the_speed_limit"


def fact(pred: str, *args) -> Literal:
    return Literal(pred, tuple(Const(str(a)) for a in args))


def fact_list(lit: Literal) -> list[str]:
    return [lit.predicate, *(str(a) for a in lit.args)]


def fact_from_list(row: list) -> Literal:
    return fact(row[0], *row[1:])


def sense(world: World, v: Vehicle) -> Scenario:
    """Ground facts from the vehicle's own sensors and its immediate surroundings."""
    cfg, layout = world.config, world.layout
    facts = [fact("is_of_type", v.plate, v.kind)]
    if v.speed == 0:
        facts.append(fact("is_stopped", v.plate))
    near = layout.approach_of(v.pos, v.heading)
    if near is not None and near[1] <= cfg.sense_range:
        jid, dist = near
        j = layout.junctions[jid]
        if j.control == "traffic_light":
            facts.append(fact("has_light", v.plate, world.light_state[AXIS[v.heading]]))
        elif j.controlled(v.heading):
            facts.append(fact("faces_stop_sign", v.plate))
            if dist == 1 and v.speed == 0:
                facts.append(fact("stopped_at_stop_line", v.plate))
            facts.append(fact("safe_gap", cfg.safe_gap))
            for w in world.ordered_vehicles():
                if w is v or AXIS[w.heading] == AXIS[v.heading]:
                    continue
                other = layout.approach_of(w.pos, w.heading)
                if other is not None and other[0] == jid and other[1] <= cfg.approach_horizon:
                    facts.append(fact("priority_approach", w.plate, v.plate, other[1]))
        else:
            facts.append(fact("has_priority", v.plate))
        for w in world.ordered_vehicles():
            if w.pos in j.box:
                facts.append(fact("occupies_junction_ahead_of", w.plate, v.plate))
    return Scenario.of(facts, name=f"{v.plate}@{world.tick}")


@dataclass(frozen=True)
class Query:
    plate: str
    junction: str
    scenario: Scenario
    goal: Literal
    answer: bool
    error: str | None = None


def at_stop_line(world: World, v: Vehicle) -> str | None:
    near = world.layout.approach_of(v.pos, v.heading)
    return near[0] if near is not None and near[1] == 1 else None


def ask(world: World, v: Vehicle, rules: RuleSet) -> Query | None:
    """Query the rulebase if the vehicle is waiting to enter a junction.

    Runs against a private scenario snapshot and never touches the world.
    """
    jid = at_stop_line(world, v)
    if jid is None:
        return None
    scenario = sense(world, v)
    goal = fact("can", v.plate, ENTER)
    try:
        answer = bool(Solver(rules, scenario).solve(goal))
        error = None
    except LogicError as exc:
        answer, error = False, f"{type(exc).__name__}: {exc}"
    return Query(v.plate, jid, scenario, goal, answer, error)


@dataclass(frozen=True)
class Decision:
    plate: str
    action: str  # proceed | stop | enter
    speed: int  # intended cells this tick
    turn: str | None = None
    reason: str = ""


def resolve(v: Vehicle, query: Query | None, cfg: SimConfig, rng: random.Random) -> Decision:
    """Turn the (possibly absent) query answer into an action, drawing randomness in a fixed order."""
    human = v.controller == "human"
    speed = cfg.speed_limit
    if human and rng.random() < cfg.p_speed:
        speed = cfg.max_speed
    if query is None:
        return Decision(v.plate, "proceed", speed)
    if query.error is not None:
        v.delay = None
        return Decision(v.plate, "stop", 0, reason="engine error")
    go = query.answer
    reason = "permitted" if go else "not permitted"
    if go and human:
        if v.delay is None and v.speed == 0:
            v.delay = int(rng.random() * (cfg.reaction_delay_max + 1))
        if v.delay:
            v.delay -= 1
            return Decision(v.plate, "stop", 0, reason="reacting")
    if not go:
        v.delay = None
        if human and rng.random() < cfg.p_runlight:
            go, reason = True, "ignored refusal"
    if not go:
        return Decision(v.plate, "stop", 0, reason=reason)
    turn = ("straight", "left", "right")[min(2, int(rng.random() * 3))]
    return Decision(v.plate, "enter", speed, turn, reason)
