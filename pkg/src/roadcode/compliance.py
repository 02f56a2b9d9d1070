"""Offline validation: turn potential violations from a simulation log into verdicts.

For each potential violation the validator rebuilds the scenario the
vehicle acted in, adds the ``potentially violates`` fact and asks the
validator rules whether the violation is punishable or mitigated.  The
answer always comes from the solver; this module only wires inputs and
outputs together and attaches penalties and explanations.
"""
from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .cnl import render_failure, render_trace
from .logic import Const, Literal, RuleSet, Scenario, Solver, explain_failure
from .rulebase import Corpus, PenaltyEntry, PenaltySchedule, default_corpus
from .sim.agents import fact_from_list
from .sim.world import Event, dumps

MITIGATED = "Mitigated"
PUNISHABLE = "Punishable"


class LogFormatError(ValueError):
    pass


class PartitionError(RuntimeError):
    """The validator rules derived both or neither outcome for one violation."""


@dataclass(frozen=True)
class PotentialViolation:
    monitor: str
    plate: str
    action: str
    facts: Scenario
    tick: int
    junction: str | None = None
    episode: int | None = None

    def __post_init__(self) -> None:
        for f in self.facts:
            if not all(isinstance(a, Const) for a in f.args):
                raise ValueError(f"observed fact {f} is not ground")

    @classmethod
    def from_event(cls, e: Event) -> "PotentialViolation":
        p = e.payload
        facts = Scenario.of((fact_from_list(r) for r in p.get("facts", [])), name=f"{p['monitor']}:{p['plate']}@{e.tick}")
        return cls(p["monitor"], p["plate"], p["action"], facts, e.tick, p.get("junction"), p.get("episode"))

    @property
    def fact(self) -> Literal:
        return Literal("potentially_violates", (Const(self.plate), Const(self.action)))


@dataclass(frozen=True)
class ValidatorScenario:
    plate: str
    action: str
    base: Scenario
    source: str  # "vehicle", "vehicle+monitor" or "monitor"
    query_tick: int | None = None

    @property
    def goal(self) -> Literal:
        return Literal("can", (Const(self.plate), Const(self.action)))


@dataclass
class Verdict:
    plate: str
    action: str
    tick: int
    outcome: str
    justification: str
    offence: str | None = None
    penalty: PenaltyEntry | None = None
    monitor: str | None = None
    junction: str | None = None
    scenario_source: str = ""
    lawful: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.outcome not in (MITIGATED, PUNISHABLE):
            raise ValueError(f"unknown outcome {self.outcome!r}")
        if self.outcome == PUNISHABLE and self.penalty is None:
            raise ValueError("a punishable verdict needs a penalty")

    @property
    def punishable(self) -> bool:
        return self.outcome == PUNISHABLE

    def as_dict(self) -> dict:
        return {
            "plate": self.plate,
            "action": self.action,
            "tick": self.tick,
            "outcome": self.outcome,
            "offence": self.offence,
            "penalty": self.penalty.as_dict() if self.penalty else None,
            "monitor": self.monitor,
            "junction": self.junction,
            "scenario_source": self.scenario_source,
            "lawful_actions": list(self.lawful),
            "justification": self.justification,
        }

    def to_json(self) -> str:
        return dumps(self.as_dict())


# -- reading logs ----------------------------------------------------------------


@dataclass
class EventLog:
    header: dict
    events: list[Event]
    _queries: dict[tuple[str, str], list[Event]] = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        for e in self.events:
            if e.type == "QueryMade":
                self._queries.setdefault((e.payload["plate"], e.payload["junction"]), []).append(e)

    def potential_violations(self) -> list[PotentialViolation]:
        return [PotentialViolation.from_event(e) for e in self.events if e.type == "PotentialViolation"]

    def last_query(self, plate: str, junction: str | None, tick: int) -> Event | None:
        found = None
        for e in self._queries.get((plate, junction), ()):
            if e.tick > tick:
                break
            found = e
        return found


def read_log(source: str | Path | Iterable[str]) -> EventLog:
    """Parse a JSON Lines event log (a path or an iterable of lines)."""
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    else:
        lines = list(source)
    header: dict = {}
    events = []
    last_tick = -1
    for n, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise LogFormatError(f"line {n}: {exc.msg}") from None
        if obj.get("type") == "header" and "tick" not in obj:
            header = obj
            continue
        try:
            e = Event.from_json(obj)
        except (KeyError, TypeError):
            raise LogFormatError(f"line {n}: not an event") from None
        if e.tick < last_tick:
            raise LogFormatError(f"line {n}: tick {e.tick} after {last_tick}")
        last_tick = e.tick
        events.append(e)
    if not header:
        raise LogFormatError("missing header line")
    return EventLog(header, events)


# -- validation --------------------------------------------------------------------


def build_validator_scenario(pv: PotentialViolation, log: EventLog | None = None) -> ValidatorScenario:
    """Prefer the vehicle's own logged scenario; fall back to what the monitor saw."""
    q = log.last_query(pv.plate, pv.junction, pv.tick) if log is not None else None
    if q is None:
        return ValidatorScenario(pv.plate, pv.action, Scenario.of(pv.facts, name="validator"), "monitor")
    vehicle = Scenario.of((fact_from_list(r) for r in q.payload["facts"]), name="validator")
    goal = q.payload.get("goal") or []
    if len(goal) == 3 and goal[2] == pv.action:
        return ValidatorScenario(pv.plate, pv.action, vehicle, "vehicle", q.tick)
    return ValidatorScenario(pv.plate, pv.action, vehicle.union(pv.facts, name="validator"), "vehicle+monitor", q.tick)


def lawful_actions(vs: ValidatorScenario, rules: RuleSet, actions: Sequence[str]) -> set[str]:
    """Declared actions the vehicle ``can`` take in the validator scenario."""
    solver = Solver(rules, vs.base)
    return {a for a in actions if solver.solve(Literal("can", (Const(vs.plate), Const(a))))}


def classify(
    pv: PotentialViolation,
    vs: ValidatorScenario,
    corpus: Corpus | None = None,
    penalties: PenaltySchedule | None = None,
) -> Verdict:
    corpus = corpus or default_corpus()
    penalties = penalties or corpus.penalties
    rules = corpus.validator
    scenario = vs.base.union([pv.fact], name="validator")
    solver = Solver(rules, scenario)
    args = (Const(pv.plate), Const(pv.action))
    punish = solver.solve(Literal("punishably_violates", args))
    mitigate = solver.solve(Literal("mitigately_violates", args))
    if bool(punish) == bool(mitigate):
        raise PartitionError(
            f"{pv.plate}/{pv.action} at tick {pv.tick}: punishable={bool(punish)} mitigated={bool(mitigate)}"
        )
    vocab = corpus.vocabulary
    lawful = tuple(sorted(lawful_actions(vs, corpus.permissions, corpus.actions)))
    common = dict(monitor=pv.monitor, junction=pv.junction, scenario_source=vs.source, lawful=lawful)
    if mitigate:
        text = render_trace(mitigate[0].trace, vocab, rules)
        return Verdict(pv.plate, pv.action, pv.tick, MITIGATED, text, **common)
    text = render_trace(punish[0].trace, vocab, rules)
    why = render_failure(explain_failure(vs.goal, rules, scenario), vocab, rules)
    offence = penalties.offence_for(pv.action)
    entry = penalties.penalty_for(offence)
    return Verdict(pv.plate, pv.action, pv.tick, PUNISHABLE, text + "\n" + why, offence, entry, **common)


def validate(log: EventLog, corpus: Corpus | None = None) -> list[Verdict]:
    """One verdict per potential violation, in log order."""
    corpus = corpus or default_corpus()
    return [classify(pv, build_validator_scenario(pv, log), corpus) for pv in log.potential_violations()]


def verdict_lines(verdicts: Iterable[Verdict]) -> Iterator[str]:
    for v in verdicts:
        yield v.to_json()


def report(verdicts: Sequence[Verdict]) -> str:
    """Readable summary: totals, per-plate counts, then each justification."""
    outcomes = Counter(v.outcome for v in verdicts)
    lines = [
        f"potential violations: {len(verdicts)}",
        f"  punishable: {outcomes.get(PUNISHABLE, 0)}",
        f"  mitigated: {outcomes.get(MITIGATED, 0)}",
    ]
    fines = sum(v.penalty.fine_pence for v in verdicts if v.penalty)
    points = sum(v.penalty.points for v in verdicts if v.penalty)
    lines.append(f"  total fines: £{fines / 100:,.2f}, points: {points}")
    per_plate: dict[str, Counter] = {}
    for v in verdicts:
        per_plate.setdefault(v.plate, Counter())[v.outcome] += 1
    if per_plate:
        lines.append("by vehicle:")
        for plate in sorted(per_plate, key=lambda p: (len(p), p)):
            c = per_plate[plate]
            lines.append(f"  {plate}: {c.get(PUNISHABLE, 0)} punishable, {c.get(MITIGATED, 0)} mitigated")
    for v in verdicts:
        head = f"[tick {v.tick}] {v.plate} {v.action.replace('_', ' ')}: {v.outcome}"
        if v.penalty:
            p = v.penalty
            head += f" ({p.description}; {p.statute}; {p.fine_text()}; {p.points} points)"
        lines.append("")
        lines.append(head)
        lines.extend("  " + line for line in v.justification.splitlines())
    return "\n".join(lines) + "\n"


__all__ = [
    "EventLog",
    "LogFormatError",
    "MITIGATED",
    "PUNISHABLE",
    "PartitionError",
    "PotentialViolation",
    "ValidatorScenario",
    "Verdict",
    "build_validator_scenario",
    "classify",
    "lawful_actions",
    "read_log",
    "report",
    "validate",
    "verdict_lines",
]
