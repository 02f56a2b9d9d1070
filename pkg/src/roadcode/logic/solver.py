"""Backward-chaining solver with negation as failure and proof traces.

Goals are resolved top-down against scenario facts first and then rule
clauses in source order; body items run left to right.  A negated item
succeeds when its literal has no solution under the current bindings.
"""
from __future__ import annotations

import itertools
import sys
from dataclasses import dataclass
from typing import Iterator, Mapping, Sequence

from .terms import (
    Clause,
    Const,
    Literal,
    Naf,
    RuleSet,
    Scenario,
    Term,
    Var,
    is_ground,
    literal_vars,
)
from .unify import apply, apply_clause, apply_literal, unify_literals

DEFAULT_BUDGET = 512

# Each proof level costs a handful of interpreter frames (nested generators),
# so the default recursion limit would trip long before the depth budget.
_FRAMES_PER_LEVEL = 12
if sys.getrecursionlimit() < DEFAULT_BUDGET * _FRAMES_PER_LEVEL:
    sys.setrecursionlimit(DEFAULT_BUDGET * _FRAMES_PER_LEVEL)


class LogicError(Exception):
    pass


class BudgetExceeded(LogicError):
    def __init__(self, goal: Literal, budget: int):
        super().__init__(f"depth budget {budget} exceeded while proving {goal}")
        self.goal = goal
        self.budget = budget


class UnknownPredicate(LogicError):
    def __init__(self, key: tuple[str, int]):
        super().__init__(f"unknown predicate {key[0]}/{key[1]}")
        self.key = key


class FlounderingNegation(LogicError):
    def __init__(self, literal: Literal, unbound: Sequence[Var]):
        names = ", ".join(v.name for v in unbound)
        super().__init__(f"negated literal {literal} is not ground ({names} unbound)")
        self.literal = literal
        self.unbound = tuple(unbound)


class InstantiationError(LogicError):
    pass


class ReplayError(LogicError):
    pass


def _number(t: Term) -> int | None:
    if isinstance(t, Const):
        try:
            return int(t.symbol)
        except ValueError:
            return None
    return None


def _builtin_different(a: Term, b: Term) -> bool:
    return a != b


def _builtin_at_most(a: Term, b: Term) -> bool:
    x, y = _number(a), _number(b)
    return x is not None and y is not None and x <= y


BUILTINS = {
    ("different", 2): _builtin_different,
    ("at_most", 2): _builtin_at_most,
}


def eval_builtin(lit: Literal) -> bool:
    if not is_ground(lit):
        raise InstantiationError(f"builtin {lit} called with unbound arguments")
    return BUILTINS[lit.key](*lit.args)


@dataclass(frozen=True)
class ProofTrace:
    """One node of a proof.

    ``resolution`` is ``"rule"`` (``clause`` is the index into the rule set),
    ``"fact"``, ``"naf"`` or ``"builtin"``.  For naf nodes ``guards`` holds the
    extra literals that were negated together with ``goal``.
    """

    goal: Literal
    resolution: str
    clause: int | None = None
    bindings: tuple[tuple[Var, Term], ...] = ()
    children: tuple["ProofTrace", ...] = ()
    guards: tuple[Literal, ...] = ()

    def walk(self) -> Iterator["ProofTrace"]:
        yield self
        for c in self.children:
            yield from c.walk()

    def size(self) -> int:
        return sum(1 for _ in self.walk())


@dataclass(frozen=True)
class Solution:
    bindings: Mapping[Var, Term]
    trace: ProofTrace


# Unfinished trace node: (goal, resolution, clause index, renamed->original var pairs, children)
_Raw = tuple


class _Compiled:
    """Per-clause data that does not depend on the call."""

    __slots__ = ("clause", "vars", "naf_locals")

    def __init__(self, clause: Clause):
        self.clause = clause
        seen: dict[Var, None] = {}
        for lit in clause.literals():
            for v in literal_vars(lit):
                seen.setdefault(v)
        self.vars = tuple(seen)
        # A variable is local to a negation only if it occurs nowhere else in
        # the clause; anything shared must be bound before the negation runs.
        inner = [
            {v for lit in item.literals for v in literal_vars(lit)} if isinstance(item, Naf) else set(literal_vars(item))
            for item in clause.body
        ]
        locals_: list[frozenset[Var]] = []
        for i, item in enumerate(clause.body):
            if not isinstance(item, Naf):
                locals_.append(frozenset())
                continue
            outside = set(literal_vars(clause.head)).union(*(vs for j, vs in enumerate(inner) if j != i))
            locals_.append(frozenset(inner[i] - outside))
        self.naf_locals = tuple(locals_)


_compiled_cache: dict[int, tuple[RuleSet, tuple[_Compiled, ...]]] = {}


def _compile(rules: RuleSet) -> tuple[_Compiled, ...]:
    hit = _compiled_cache.get(id(rules))
    if hit is not None and hit[0] is rules:
        return hit[1]
    compiled = tuple(_Compiled(c) for c in rules.clauses)
    if len(_compiled_cache) > 64:
        _compiled_cache.clear()
    _compiled_cache[id(rules)] = (rules, compiled)
    return compiled


class Solver:
    """Private working state for one query; rules and scenario are only read."""

    def __init__(self, rules: RuleSet, scenario: Scenario, budget: int = DEFAULT_BUDGET):
        if budget <= 0:
            raise ValueError("budget must be positive")
        self.rules = rules
        self.scenario = scenario
        self.budget = budget
        self._compiled = _compile(rules)
        self._fresh = itertools.count(1)

    # -- public -----------------------------------------------------------

    def solve(self, goal: Literal) -> list[Solution]:
        goal_vars = list(dict.fromkeys(literal_vars(goal)))
        out = []
        try:
            for s, raw in self._prove(goal, {}, 0):
                trace = self._finish(raw, s)
                out.append(Solution({v: apply(s, v) for v in goal_vars}, trace))
        except RecursionError:
            raise BudgetExceeded(goal, self.budget) from None
        return out

    def exists(self, goals: Sequence[Literal], s: Mapping[Var, Term] | None = None, depth: int = 0) -> bool:
        try:
            for _ in self._prove_all(tuple(goals), dict(s or {}), depth):
                return True
        except RecursionError:
            raise BudgetExceeded(goals[0], self.budget) from None
        return False

    # -- resolution -------------------------------------------------------

    def _check_known(self, key: tuple[str, int]) -> None:
        if key in BUILTINS or self.rules.defines(key) or self.scenario.matching(key):
            return
        if self.rules.declared and key not in self.rules.declared:
            raise UnknownPredicate(key)

    def _rename(self, idx: int) -> tuple[Clause, dict[Var, Var]]:
        comp = self._compiled[idx]
        n = next(self._fresh)
        mapping = {v: Var(f"{v.name}#{n}") for v in comp.vars}
        return apply_clause(mapping, comp.clause), mapping

    def _prove(self, goal: Literal, s: dict, depth: int) -> Iterator[tuple[dict, _Raw]]:
        if depth > self.budget:
            raise BudgetExceeded(goal, self.budget)
        key = goal.key
        self._check_known(key)
        if key in BUILTINS:
            lit = apply_literal(s, goal)
            if eval_builtin(lit):
                yield s, (goal, "builtin", None, (), ())
            return
        for fact in self.scenario.matching(key):
            s2 = unify_literals(goal, fact, s)
            if s2 is not None:
                yield s2, (goal, "fact", None, (), ())
        for idx in self.rules.candidates(key):
            renamed, mapping = self._rename(idx)
            s2 = unify_literals(goal, renamed.head, s)
            if s2 is None:
                continue
            locals_ = self._compiled[idx].naf_locals
            renamed_locals = tuple(frozenset(mapping[v] for v in loc) for loc in locals_)
            pairs = tuple((new, old) for old, new in mapping.items())
            for s3, children in self._prove_body(renamed.body, renamed_locals, s2, depth + 1):
                yield s3, (goal, "rule", idx, pairs, children)

    def _prove_body(self, body, locals_, s, depth) -> Iterator[tuple[dict, tuple]]:
        if not body:
            yield s, ()
            return
        first, rest = body[0], body[1:]
        if isinstance(first, Naf):
            node = self._negate(first, locals_[0], s, depth)
            if node is None:
                return
            for s2, nodes in self._prove_body(rest, locals_[1:], s, depth):
                yield s2, (node,) + nodes
            return
        for s1, node in self._prove(first, s, depth):
            for s2, nodes in self._prove_body(rest, locals_[1:], s1, depth):
                yield s2, (node,) + nodes

    def _prove_all(self, goals: tuple[Literal, ...], s: dict, depth: int) -> Iterator[tuple[dict, tuple]]:
        return self._prove_body(goals, (frozenset(),) * len(goals), s, depth)

    def _negate(self, item: Naf, local: frozenset[Var], s: dict, depth: int) -> _Raw | None:
        lits = tuple(apply_literal(s, lit) for lit in item.literals)
        unbound = [v for v in dict.fromkeys(literal_vars(lits[0])) if v not in local]
        if unbound:
            raise FlounderingNegation(lits[0], unbound)
        if self.exists(lits, {}, depth):
            return None
        return (lits[0], "naf", None, (), (), lits[1:])

    # -- traces -----------------------------------------------------------

    def _finish(self, raw: _Raw, s: Mapping[Var, Term]) -> ProofTrace:
        goal, kind, idx, pairs, children = raw[:5]
        if kind == "naf":
            return ProofTrace(goal, kind, guards=raw[5])
        bindings = tuple((old, apply(s, new)) for new, old in pairs)
        return ProofTrace(
            apply_literal(s, goal),
            kind,
            idx,
            bindings,
            tuple(self._finish(c, s) for c in children),
        )


def solve(
    goal: Literal, rules: RuleSet, scenario: Scenario, budget: int = DEFAULT_BUDGET
) -> list[Solution]:
    """All solutions of ``goal`` in clause order."""
    return Solver(rules, scenario, budget).solve(goal)


def holds_not(
    goal: Literal, rules: RuleSet, scenario: Scenario, budget: int = DEFAULT_BUDGET
) -> bool:
    """Negation as failure: True iff ``goal`` has no solution within ``budget``.

    Variables left in ``goal`` are read existentially.
    """
    solver = Solver(rules, scenario, budget)
    solver._check_known(goal.key)
    return not solver.exists([goal])


def replay(trace: ProofTrace, rules: RuleSet, scenario: Scenario, budget: int = DEFAULT_BUDGET) -> Literal:
    """Re-check every step of ``trace``; returns the proved goal or raises ReplayError."""
    goal = trace.goal
    if trace.resolution == "fact":
        if goal not in scenario:
            raise ReplayError(f"{goal} is not a scenario fact")
        return goal
    if trace.resolution == "builtin":
        if goal.key not in BUILTINS or not eval_builtin(goal):
            raise ReplayError(f"builtin {goal} does not hold")
        return goal
    if trace.resolution == "naf":
        if Solver(rules, scenario, budget).exists((goal,) + trace.guards):
            raise ReplayError(f"negated goal {goal} is provable")
        return goal
    if trace.resolution != "rule" or trace.clause is None:
        raise ReplayError(f"unknown resolution {trace.resolution!r}")
    try:
        clause = rules.clauses[trace.clause]
    except IndexError:
        raise ReplayError(f"no clause {trace.clause}") from None
    if len(clause.body) != len(trace.children):
        raise ReplayError(f"clause {trace.clause} has {len(clause.body)} body items, trace has {len(trace.children)}")
    mapping = {v: Var(f"{v.name}#r") for v in _Compiled(clause).vars}
    renamed = apply_clause(mapping, clause)
    s = unify_literals(renamed.head, goal, {})
    if s is None:
        raise ReplayError(f"clause {trace.clause} head does not match {goal}")
    for item, child in zip(renamed.body, trace.children):
        if isinstance(item, Naf):
            if child.resolution != "naf":
                raise ReplayError("negated body item justified by a positive proof")
            s = unify_literals(item.literal, child.goal, s)
            if s is None or len(item.literals) != 1 + len(child.guards):
                raise ReplayError(f"negated item does not match {child.goal}")
            for lit, g in zip(item.literals[1:], child.guards):
                s = unify_literals(lit, g, s)
                if s is None:
                    raise ReplayError(f"guard mismatch at {g}")
            replay(child, rules, scenario, budget)
        else:
            proved = replay(child, rules, scenario, budget)
            s = unify_literals(item, proved, s)
            if s is None:
                raise ReplayError(f"body item {item} does not match proved {proved}")
    if apply_literal(s, renamed.head) != goal:
        raise ReplayError(f"clause {trace.clause} does not re-derive {goal}")
    return goal


@dataclass(frozen=True)
class FailedAttempt:
    """Why one clause could not prove the goal.

    ``failed`` is the first body item that could not be satisfied (bindings
    from the satisfied prefix applied).  ``reason`` is a nested FailedGoal for
    a derived positive literal, the ProofTrace of the literal for a failed
    negation, or None when the literal is simply absent from the scenario.
    """

    clause: int
    satisfied: tuple[ProofTrace, ...]
    failed: Literal | Naf
    reason: "FailedGoal | ProofTrace | None" = None


@dataclass(frozen=True)
class FailedGoal:
    goal: Literal
    attempts: tuple[FailedAttempt, ...] = ()


def explain_failure(
    goal: Literal,
    rules: RuleSet,
    scenario: Scenario,
    budget: int = DEFAULT_BUDGET,
    max_depth: int = 4,
) -> FailedGoal:
    """For each clause that could conclude ``goal``, find the body item where proof stops."""
    solver = Solver(rules, scenario, budget)
    return _explain(solver, goal, max_depth)


def _explain(solver: Solver, goal: Literal, max_depth: int) -> FailedGoal:
    attempts = []
    for idx in solver.rules.candidates(goal.key):
        renamed, mapping = solver._rename(idx)
        s0 = unify_literals(goal, renamed.head, {})
        if s0 is None:
            continue
        locals_ = tuple(
            frozenset(mapping[v] for v in loc) for loc in solver._compiled[idx].naf_locals
        )
        body = renamed.body
        best_s, best_nodes, k = s0, (), 0
        while k < len(body):
            hit = next(iter(solver._prove_body(body[: k + 1], locals_[: k + 1], s0, 1)), None)
            if hit is None:
                break
            best_s, best_nodes = hit
            k += 1
        if k == len(body):
            # the clause proves the goal; nothing to explain
            continue
        item = body[k]
        satisfied = tuple(solver._finish(n, best_s) for n in best_nodes)
        if isinstance(item, Naf):
            lits = tuple(apply_literal(best_s, lit) for lit in item.literals)
            proof = next(iter(solver._prove_all(lits[:1], {}, 1)), None)
            reason = solver._finish(proof[1][0], proof[0]) if proof else None
            attempts.append(FailedAttempt(idx, satisfied, Naf(lits), reason))
        else:
            lit = apply_literal(best_s, item)
            reason = None
            if max_depth > 0 and solver.rules.defines(lit.key):
                reason = _explain(solver, lit, max_depth - 1)
            attempts.append(FailedAttempt(idx, satisfied, lit, reason))
    return FailedGoal(goal, tuple(attempts))
