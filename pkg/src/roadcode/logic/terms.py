"""Terms, literals and clauses for the rule engine."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Union


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Const:
    symbol: str

    def __str__(self) -> str:
        return self.symbol


@dataclass(frozen=True)
class Compound:
    functor: str
    args: tuple["Term", ...]

    def __post_init__(self) -> None:
        if not self.args:
            raise ValueError(f"compound {self.functor!r} needs at least one argument")

    def __str__(self) -> str:
        return f"{self.functor}({', '.join(map(str, self.args))})"


Term = Union[Var, Const, Compound]


@dataclass(frozen=True)
class Literal:
    predicate: str
    args: tuple[Term, ...] = ()

    @property
    def key(self) -> tuple[str, int]:
        return self.predicate, len(self.args)

    def __str__(self) -> str:
        if not self.args:
            return self.predicate
        return f"{self.predicate}({', '.join(map(str, self.args))})"


@dataclass(frozen=True)
class Naf:
    """``it is not the case that`` block.

    ``literals[0]`` is the negated literal; any further literals are guards
    evaluated inside the negation (the distinctness check introduced by
    "an other X").
    """

    literals: tuple[Literal, ...]

    def __post_init__(self) -> None:
        if not self.literals:
            raise ValueError("empty negation")

    @property
    def literal(self) -> Literal:
        return self.literals[0]

    def __str__(self) -> str:
        return "\\+ " + ", ".join(map(str, self.literals))


BodyItem = Union[Literal, Naf]


@dataclass(frozen=True)
class SourceSpan:
    start_line: int
    start_col: int
    end_line: int
    end_col: int
    source: str = ""

    def contains(self, other: "SourceSpan") -> bool:
        return (self.start_line, self.start_col) <= (other.start_line, other.start_col) and (
            other.end_line,
            other.end_col,
        ) <= (self.end_line, self.end_col)

    def overlaps(self, other: "SourceSpan") -> bool:
        if self.source != other.source:
            return False
        return not (
            (self.end_line, self.end_col) < (other.start_line, other.start_col)
            or (other.end_line, other.end_col) < (self.start_line, self.start_col)
        )

    def __str__(self) -> str:
        prefix = f"{self.source}:" if self.source else "line "
        return f"{prefix}{self.start_line}:{self.start_col}"


@dataclass(frozen=True)
class Clause:
    head: Literal
    body: tuple[BodyItem, ...] = ()

    @property
    def is_fact(self) -> bool:
        return not self.body

    def literals(self) -> Iterator[Literal]:
        yield self.head
        for item in self.body:
            if isinstance(item, Naf):
                yield from item.literals
            else:
                yield item

    def __str__(self) -> str:
        if not self.body:
            return f"{self.head}."
        return f"{self.head} :- {', '.join(map(str, self.body))}."


def term_vars(term: Term) -> Iterator[Var]:
    if isinstance(term, Var):
        yield term
    elif isinstance(term, Compound):
        for arg in term.args:
            yield from term_vars(arg)


def literal_vars(lit: Literal) -> Iterator[Var]:
    for arg in lit.args:
        yield from term_vars(arg)


def clause_vars(clause: Clause) -> list[Var]:
    """Variables of ``clause`` in order of first occurrence."""
    seen: dict[Var, None] = {}
    for lit in clause.literals():
        for v in literal_vars(lit):
            seen.setdefault(v)
    return list(seen)


def is_ground(x: Term | Literal) -> bool:
    if isinstance(x, Literal):
        return all(is_ground(a) for a in x.args)
    if isinstance(x, Var):
        return False
    if isinstance(x, Compound):
        return all(is_ground(a) for a in x.args)
    return True


def canonical(clause: Clause) -> Clause:
    """Rename variables to ``_0, _1, ...`` by first occurrence (alpha-normal form)."""
    from .unify import apply_clause

    mapping = {v: Var(f"_{i}") for i, v in enumerate(clause_vars(clause))}
    return apply_clause(mapping, clause)


def alpha_equivalent(a: Clause, b: Clause) -> bool:
    return canonical(a) == canonical(b)


@dataclass(frozen=True)
class RuleSet:
    """Ordered clauses plus the vocabulary they were declared against.

    ``spans[i]`` is the source span of ``clauses[i]`` (or None for clauses
    built in code).  ``declared`` holds template-declared predicate keys; when
    it is empty the solver does not reject unknown predicates.
    """

    clauses: tuple[Clause, ...] = ()
    spans: tuple[SourceSpan | None, ...] = ()
    declared: frozenset[tuple[str, int]] = frozenset()
    _index: dict = field(default=None, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self) -> None:
        if not self.spans:
            object.__setattr__(self, "spans", (None,) * len(self.clauses))
        if len(self.spans) != len(self.clauses):
            raise ValueError("spans and clauses differ in length")
        index: dict[tuple[str, int], list[int]] = {}
        for i, c in enumerate(self.clauses):
            index.setdefault(c.head.key, []).append(i)
        object.__setattr__(self, "_index", {k: tuple(v) for k, v in index.items()})

    @classmethod
    def of(cls, clauses: Iterable[Clause], **kw) -> "RuleSet":
        return cls(tuple(clauses), **kw)

    def __len__(self) -> int:
        return len(self.clauses)

    def __iter__(self) -> Iterator[Clause]:
        return iter(self.clauses)

    def candidates(self, key: tuple[str, int]) -> tuple[int, ...]:
        return self._index.get(key, ())

    def defines(self, key: tuple[str, int]) -> bool:
        return key in self._index

    def __add__(self, other: "RuleSet") -> "RuleSet":
        return RuleSet(
            self.clauses + other.clauses,
            self.spans + other.spans,
            self.declared | other.declared,
        )

    def predicates(self) -> set[tuple[str, int]]:
        keys = set(self.declared)
        for c in self.clauses:
            keys.update(lit.key for lit in c.literals())
        return keys


@dataclass(frozen=True)
class Scenario:
    """A named set of ground facts (kept in first-seen order)."""

    facts: tuple[Literal, ...] = ()
    name: str = "scenario"
    _index: dict = field(default=None, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self) -> None:
        unique = tuple(dict.fromkeys(self.facts))
        for f in unique:
            if not is_ground(f):
                raise ValueError(f"scenario fact {f} is not ground")
        object.__setattr__(self, "facts", unique)
        index: dict[tuple[str, int], list[Literal]] = {}
        for f in unique:
            index.setdefault(f.key, []).append(f)
        object.__setattr__(self, "_index", {k: tuple(v) for k, v in index.items()})

    @classmethod
    def of(cls, facts: Iterable[Literal], name: str = "scenario") -> "Scenario":
        return cls(tuple(facts), name)

    def matching(self, key: tuple[str, int]) -> tuple[Literal, ...]:
        return self._index.get(key, ())

    def __contains__(self, fact: object) -> bool:
        return isinstance(fact, Literal) and fact in self.matching(fact.key)

    def __len__(self) -> int:
        return len(self.facts)

    def __iter__(self) -> Iterator[Literal]:
        return iter(self.facts)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Scenario):
            return NotImplemented
        return set(self.facts) == set(other.facts)

    def __hash__(self) -> int:
        return hash(frozenset(self.facts))

    def union(self, other: Iterable[Literal], name: str | None = None) -> "Scenario":
        return Scenario(self.facts + tuple(other), name or self.name)


def atom(predicate: str, *args: str | Term) -> Literal:
    """Build a literal; capitalised strings become variables, others constants."""
    terms: list[Term] = []
    for a in args:
        if isinstance(a, (Var, Const, Compound)):
            terms.append(a)
        elif a[:1].isupper() or a[:1] == "_":
            terms.append(Var(a))
        else:
            terms.append(Const(a))
    return Literal(predicate, tuple(terms))
