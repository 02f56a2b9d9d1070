"""Substitutions and unification with occurs check."""
from __future__ import annotations

from typing import Mapping

from .terms import Clause, Compound, Literal, Naf, Term, Var

Substitution = Mapping[Var, Term]


def apply(s: Substitution, t: Term) -> Term:
    if isinstance(t, Var):
        return s.get(t, t)
    if isinstance(t, Compound):
        return Compound(t.functor, tuple(apply(s, a) for a in t.args))
    return t


def apply_literal(s: Substitution, lit: Literal) -> Literal:
    if not s or not lit.args:
        return lit
    return Literal(lit.predicate, tuple(apply(s, a) for a in lit.args))


def apply_clause(s: Substitution, clause: Clause) -> Clause:
    body = tuple(
        Naf(tuple(apply_literal(s, lit) for lit in item.literals))
        if isinstance(item, Naf)
        else apply_literal(s, item)
        for item in clause.body
    )
    return Clause(apply_literal(s, clause.head), body)


def occurs(v: Var, t: Term) -> bool:
    if t == v:
        return True
    if isinstance(t, Compound):
        return any(occurs(v, a) for a in t.args)
    return False


def _bind(s: dict[Var, Term], v: Var, t: Term) -> dict[Var, Term] | None:
    if occurs(v, t):
        return None
    single = {v: t}
    # keep the substitution idempotent: no bound variable appears in a range term
    out = {k: apply(single, val) for k, val in s.items()}
    out[v] = t
    return out


def unify(a: Term, b: Term, s: Substitution | None = None) -> dict[Var, Term] | None:
    """Most general unifier of ``a`` and ``b`` extending ``s``, or None.

    ``s`` must be idempotent; the result is idempotent too.
    """
    current: dict[Var, Term] | None = dict(s or {})
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        x = apply(current, x)
        y = apply(current, y)
        if x == y:
            continue
        if isinstance(x, Var):
            current = _bind(current, x, y)
        elif isinstance(y, Var):
            current = _bind(current, y, x)
        elif isinstance(x, Compound) and isinstance(y, Compound):
            if x.functor != y.functor or len(x.args) != len(y.args):
                return None
            stack.extend(reversed(list(zip(x.args, y.args))))
            continue
        else:
            return None
        if current is None:
            return None
    return current


def unify_literals(a: Literal, b: Literal, s: Substitution | None = None) -> dict[Var, Term] | None:
    if a.key != b.key:
        return None
    current: dict[Var, Term] | None = dict(s or {})
    for x, y in zip(a.args, b.args):
        current = unify(x, y, current)
        if current is None:
            return None
    return current


def is_idempotent(s: Substitution) -> bool:
    return all(apply(s, t) == t for t in s.values())


__all__ = [
    "Substitution",
    "apply",
    "apply_literal",
    "apply_clause",
    "unify",
    "unify_literals",
    "occurs",
    "is_idempotent",
]
