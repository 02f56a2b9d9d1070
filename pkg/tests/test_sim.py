from __future__ import annotations

import pytest

from roadcode.logic import Clause, RuleSet, atom
from roadcode.rulebase import load_corpus
from roadcode.sim import (
    InvalidConfig,
    SimConfig,
    add_vehicle,
    ask,
    audit,
    decide,
    init_world,
    load_config,
    resolve,
    run,
    sense,
    step,
)
from roadcode.sim.agents import Decision
from roadcode.sim.engine import _move, _pedestrians
from roadcode.sim.world import Pedestrian

QUIET = SimConfig(spawn_rate=0, pedestrian_rate=0, p_speed=0, reaction_delay_max=0)


@pytest.fixture(scope="module")
def corpus():
    return load_corpus()


def facts(scenario) -> set[str]:
    return {str(f) for f in scenario}


# -- configuration ----------------------------------------------------------------


def test_config_text_roundtrip():
    cfg = SimConfig(spawn_rate=0.2, monitors="m9:B:N")
    assert SimConfig.from_text(cfg.to_text()) == cfg


@pytest.mark.parametrize(
    "text, field",
    [
        ("spawn_rate = 1.5", "spawn_rate"),
        ("light_green_ticks = 0", "light_green_ticks"),
        ("colour = blue", "colour"),
        ("p_speed = lots", "p_speed"),
        ("monitors = m1:A", "monitors"),
    ],
)
def test_invalid_config_names_field(text, field):
    with pytest.raises(InvalidConfig) as info:
        SimConfig.from_text(text)
    assert info.value.field == field


def test_load_config_file(tmp_path):
    p = tmp_path / "sim.cfg"
    p.write_text("# quiet roads\nspawn_rate = 0.01\nseed = 7\n")
    cfg = load_config(p)
    assert cfg.spawn_rate == 0.01 and cfg.seed == 7


# -- world -------------------------------------------------------------------------


def test_layout_has_two_junctions_and_three_roads():
    w = init_world()
    controls = sorted(j.control for j in w.junctions.values())
    assert controls == ["stop_sign", "traffic_light"]
    assert w.layout.road_count == 3
    assert len(w.layout.box_of) == 8
    assert w.layout.tag((10, 14)) == "junction(A)"
    assert w.layout.tag((3, 14)) == "road(E)"
    assert w.layout.tag((0, 0)) == "off-road"


def test_init_world_is_reproducible():
    assert init_world(seed=42).snapshot() == init_world(seed=42).snapshot()


def test_no_spawns_at_rate_zero(corpus):
    w = run(QUIET, ticks=200, corpus=corpus)
    assert w.vehicles == {} and w.spawned == 0
    assert all(e.type == "LightChanged" for e in w.events)


def test_zero_ticks_gives_header_only():
    w = run(ticks=0)
    assert list(w.log_lines()) == [next(w.log_lines())]


def test_lights_alternate():
    w = init_world(SimConfig(light_green_ticks=3, light_red_ticks=2))
    seq = [w.lights.colour(t, "horizontal") for t in range(6)]
    assert seq == ["green"] * 3 + ["red"] * 2 + ["green"]
    assert all(w.lights.colour(t, "vertical") != w.lights.colour(t, "horizontal") for t in range(10))


# -- sensing and deciding -------------------------------------------------------------


def test_sense_car_at_red():
    w = init_world(QUIET.replace(light_start="vertical"))
    v = add_vehicle(w, (9, 14), "E")
    assert facts(sense(w, v)) == {"is_of_type(v1, car)", "has_light(v1, red)", "is_stopped(v1)"}


def test_sense_on_open_road():
    w = init_world(QUIET)
    v = add_vehicle(w, (3, 14), "E", speed=1)
    assert facts(sense(w, v)) == {"is_of_type(v1, car)"}


def test_sense_at_stop_sign():
    w = init_world(QUIET)
    v = add_vehicle(w, (20, 16), "N")
    other = add_vehicle(w, (17, 14), "E", speed=1)
    got = facts(sense(w, v))
    assert {"faces_stop_sign(v1)", "stopped_at_stop_line(v1)", "safe_gap(5)"} <= got
    assert f"priority_approach({other.plate}, v1, 3)" in got
    assert facts(sense(w, other)) == {"is_of_type(v2, car)", "has_priority(v2)"}


def test_sense_occupied_box():
    w = init_world(QUIET)
    amb = add_vehicle(w, (9, 14), "E", kind="ambulance")
    add_vehicle(w, (10, 15), "N")
    assert "occupies_junction_ahead_of(v2, v1)" in facts(sense(w, amb))


def test_autonomous_car_stops_at_red(corpus):
    w = init_world(QUIET.replace(light_start="vertical"))
    v = add_vehicle(w, (9, 14), "E")
    assert decide(w, v, corpus.permissions).action == "stop"


def test_ambulance_enters_on_red(corpus):
    w = init_world(QUIET.replace(light_start="vertical"))
    v = add_vehicle(w, (9, 14), "E", kind="ambulance")
    assert decide(w, v, corpus.permissions).action == "enter"


def test_ambulance_waits_for_occupied_box(corpus):
    w = init_world(QUIET.replace(light_start="vertical"))
    v = add_vehicle(w, (9, 14), "E", kind="ambulance")
    add_vehicle(w, (10, 15), "N")
    assert decide(w, v, corpus.permissions).action == "stop"


def test_human_may_ignore_refusal(corpus):
    w = init_world(QUIET.replace(light_start="vertical", p_runlight=1.0))
    v = add_vehicle(w, (9, 14), "E", controller="human")
    d = decide(w, v, corpus.permissions)
    assert d.action == "enter" and d.reason == "ignored refusal"


def test_human_reaction_delay():
    cfg = QUIET.replace(reaction_delay_max=2)
    w = init_world(cfg)
    v = add_vehicle(w, (9, 14), "E", controller="human")
    q = ask(w, v, load_corpus().permissions)
    assert q.answer
    actions = []
    while True:
        d = resolve(v, q, cfg, w.rng)
        actions.append(d.action)
        if d.action == "enter":
            break
    assert 1 <= len(actions) <= 3


def test_engine_error_fails_safe():
    looping = RuleSet.of([Clause(atom("can", "V", "A"), (atom("can", "V", "A"),))])
    w = init_world(QUIET)
    v = add_vehicle(w, (9, 14), "E")
    q = ask(w, v, looping)
    assert q.error and "BudgetExceeded" in q.error
    d = resolve(v, q, w.config, w.rng)
    assert d.action == "stop"


def test_engine_error_logged_and_vehicle_holds(corpus):
    broken = type(corpus)(corpus.vocabulary, corpus.rules, dict(corpus.parts), corpus.penalties)
    broken.parts["permissions"] = RuleSet.of([Clause(atom("can", "V", "A"), (atom("can", "V", "A"),))])
    w = init_world(QUIET)
    add_vehicle(w, (9, 14), "E")
    for _ in range(3):
        step(w, broken)
    queries = [e for e in w.events if e.type == "QueryMade"]
    assert queries and all(q.payload["error"] and q.payload["decision"] == "stop" for q in queries)
    assert w.vehicles["v1"].pos == (9, 14)


# -- movement ---------------------------------------------------------------------------


def test_contended_cell_goes_to_junction_occupant():
    w = init_world(QUIET)
    inside = add_vehicle(w, (10, 14), "E")  # in box A, heading for (11, 14)
    inside.target = "E"
    waiting = add_vehicle(w, (11, 13), "S")  # southbound stop line, next cell (11, 14)
    waiting.cleared = "A"
    _move(w, [Decision(inside.plate, "proceed", 1), Decision(waiting.plate, "enter", 1)])
    assert inside.pos == (11, 14)
    assert waiting.pos == (11, 13) and waiting.speed == 0


def test_vehicle_holds_at_stop_line_without_clearance():
    w = init_world(QUIET)
    v = add_vehicle(w, (7, 14), "E")
    _move(w, [Decision(v.plate, "proceed", 2)])
    assert v.pos == (9, 14)
    _move(w, [Decision(v.plate, "proceed", 2)])
    assert v.pos == (9, 14) and v.speed == 0


@pytest.mark.parametrize(
    "start, heading, target, path",
    [
        ((9, 14), "E", "N", [(10, 14), (10, 13)]),
        ((9, 14), "E", "S", [(10, 14), (11, 14), (11, 15), (11, 16)]),
        ((10, 16), "N", "W", [(10, 15), (9, 15)]),
        ((11, 13), "S", "E", [(11, 14), (12, 14)]),
    ],
)
def test_turns_follow_left_hand_lanes(start, heading, target, path):
    w = init_world(QUIET)
    v = add_vehicle(w, start, heading)
    v.cleared, v.target = "A", target
    seen = []
    for _ in path:
        _move(w, [Decision(v.plate, "enter" if not seen else "proceed", 1)])
        if v.pos in w.layout.box_of:
            v.target = target
        seen.append(v.pos)
    assert seen == path and v.heading == target


def test_pedestrian_waits_for_approaching_car():
    w = init_world(QUIET)
    w.pedestrians["p1"] = Pedestrian("p1", (5, 13), "S")
    add_vehicle(w, (4, 14), "E")
    _pedestrians(w)
    assert w.pedestrians["p1"].pos == (5, 13)


def test_pedestrian_crosses_clear_road():
    w = init_world(QUIET)
    w.pedestrians["p1"] = Pedestrian("p1", (5, 13), "S")
    _pedestrians(w)
    assert w.pedestrians["p1"].pos == (5, 14) and w.pedestrians["p1"].crossing
    _pedestrians(w)
    _pedestrians(w)
    assert "p1" not in w.pedestrians


def test_cars_do_not_drive_into_pedestrians(corpus):
    w = init_world(QUIET)
    w.pedestrians["p1"] = Pedestrian("p1", (5, 14), "S", crossing=True, steps_left=2)
    v = add_vehicle(w, (3, 14), "E", speed=1)
    _move(w, [Decision(v.plate, "proceed", 2)])
    assert v.pos == (4, 14)


# -- monitors ---------------------------------------------------------------------------


def _runner(light_start: str, cell, heading, **cfg):
    config = QUIET.replace(light_start=light_start, p_runlight=1.0, human_fraction=1.0, **cfg)
    return run(config, ticks=40, setup=lambda w: add_vehicle(w, cell, heading, controller="human"))


def pvs(world):
    return [e for e in world.events if e.type == "PotentialViolation"]


def test_monitor_catches_red_light_runner_in_cone():
    found = pvs(_runner("vertical", (3, 14), "E"))
    assert len(found) == 1
    p = found[0].payload
    assert (p["monitor"], p["plate"], p["action"]) == ("m1", "v1", "enter_the_junction")
    assert ["has_light", "v1", "red"] in p["facts"]


def test_monitor_blind_outside_cone():
    assert pvs(_runner("horizontal", (10, 27), "N")) == []


def test_stopped_car_at_red_is_not_reported(corpus):
    w = run(QUIET.replace(light_start="vertical"), ticks=15, setup=lambda w: add_vehicle(w, (3, 14), "E"), corpus=corpus)
    assert pvs(w) == []
    assert w.vehicles["v1"].pos == (9, 14)


def test_stop_sign_monitor():
    # rolls through the stop sign: reported
    found = pvs(_runner("horizontal", (20, 25), "N"))
    assert [p.payload["action"] for p in found] == ["enter_the_junction"]
    assert ["faces_stop_sign", "v1"] in found[0].payload["facts"]
    # an autonomous car stops first: nothing to report
    w = run(QUIET, ticks=40, setup=lambda w: add_vehicle(w, (20, 25), "N"))
    assert pvs(w) == []
    assert any(e.type == "Moved" and e.payload["from"] == [20, 16] for e in w.events)


def test_monitor_soundness(corpus):
    """Each reported snapshot satisfies a detection rule when re-evaluated."""
    from roadcode.logic import Const, Literal, Scenario, solve
    from roadcode.sim import fact_from_list

    w = run(SimConfig(), seed=3, ticks=800, corpus=corpus)
    found = pvs(w)
    assert found
    for e in found:
        p = e.payload
        sc = Scenario.of(fact_from_list(r) for r in p["facts"])
        goal = Literal("potentially_violates", (Const(p["plate"]), Const(p["action"])))
        assert solve(goal, corpus.detection, sc)


def test_one_report_per_episode(corpus):
    w = run(SimConfig(), seed=5, ticks=800, corpus=corpus)
    keys = [(e.payload["monitor"], e.payload["plate"], e.payload["action"], e.payload["episode"]) for e in pvs(w)]
    assert len(keys) == len(set(keys))


# -- whole runs ---------------------------------------------------------------------------


def test_run_is_deterministic(corpus):
    a = run(SimConfig(), seed=11, ticks=300, corpus=corpus)
    b = run(SimConfig(), seed=11, ticks=300, corpus=corpus)
    assert a.log_text() == b.log_text()
    assert a.snapshot() == b.snapshot()


def test_invariants_hold_over_run(corpus):
    w = run(SimConfig(spawn_rate=0.15, pedestrian_rate=0.05), seed=9, ticks=600, corpus=corpus)
    rep = audit(w.header(), w.events)
    assert rep.ok, (rep.exclusivity[:3], rep.unsafe_entries[:3], rep.conservation[:3])
    assert rep.autonomous_entries > 0
    assert w.spawned - w.despawned == len(w.vehicles)


def test_log_is_tick_ordered(corpus):
    w = run(SimConfig(), seed=2, ticks=200, corpus=corpus)
    ticks = [e.tick for e in w.events]
    assert ticks == sorted(ticks)
