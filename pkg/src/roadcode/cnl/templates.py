"""Sentence templates binding English phrases to predicates."""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Union

ARTICLES = ("a", "an")
RESERVED = frozenset({"a", "an", "the", "other", "if", "and"})
_IDENT = re.compile(r"^[a-z][a-z0-9_]*$")
_NOUN = re.compile(r"^[a-z]+$")


@dataclass(frozen=True)
class Slot:
    """An argument position; ``noun`` is the phrase used in the declaration."""

    noun: str
    kind: str = "entity"

    def declaration(self) -> str:
        return f"*{indefinite(self.noun)}*"


PatternItem = Union[str, Slot]


def indefinite(phrase: str) -> str:
    return ("an " if phrase[:1] in "aeiou" else "a ") + phrase


def valid_phrase(phrase: str) -> bool:
    words = phrase.split(" ")
    if len(words) == 2 and words[0] == "other":
        words = words[1:]
    return len(words) == 1 and bool(_NOUN.match(words[0])) and words[0] not in RESERVED


@dataclass(frozen=True)
class Template:
    pattern: tuple[PatternItem, ...]
    predicate: str

    def __post_init__(self) -> None:
        if not _IDENT.match(self.predicate):
            raise ValueError(f"bad predicate name {self.predicate!r}")
        if not any(isinstance(p, str) for p in self.pattern):
            raise ValueError("a template needs at least one literal word")

    @property
    def slots(self) -> tuple[Slot, ...]:
        return tuple(p for p in self.pattern if isinstance(p, Slot))

    @property
    def arity(self) -> int:
        return len(self.slots)

    @property
    def key(self) -> tuple[str, int]:
        return self.predicate, self.arity

    def declaration(self) -> str:
        text = " ".join(p.declaration() if isinstance(p, Slot) else p for p in self.pattern)
        if self.predicate != default_predicate(self.pattern):
            text = f"{self.predicate}: {text}"
        return text + "."


def default_predicate(pattern: Iterable[PatternItem]) -> str:
    return "_".join(p for p in pattern if isinstance(p, str)).replace("-", "_").replace("'", "")


def _builtin(text: str, predicate: str) -> Template:
    return Template(tuple(_pattern_from_text(text)), predicate)


def _pattern_from_text(text: str) -> list[PatternItem]:
    out: list[PatternItem] = []
    for chunk in re.split(r"(\*[^*]+\*)", text):
        if chunk.startswith("*"):
            words = chunk.strip("*").split()
            noun = " ".join(w for w in words if w not in ARTICLES)
            out.append(Slot(noun, "action" if noun == "action" else "entity"))
        else:
            out.extend(chunk.split())
    return out


BUILTIN_TEMPLATES = (
    _builtin("*a number* is at most *a number*", "at_most"),
    _builtin("*a thing* is different from *a thing*", "different"),
)


@dataclass
class Vocabulary:
    """Templates plus action phrases, as declared in ``templates:`` blocks.

    ``actions`` maps a canonical action constant to its phrases; the first
    phrase is used when rendering.
    """

    templates: list[Template] = field(default_factory=list)
    actions: dict[str, tuple[tuple[str, ...], ...]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self._by_key: dict[tuple[str, int], Template] = {}
        self._aliases: dict[tuple[str, ...], str] = {}
        templates, self.templates = self.templates, []
        for t in BUILTIN_TEMPLATES:
            self._by_key[t.key] = t
        for t in templates:
            self.add_template(t)
        actions, self.actions = self.actions, {}
        for name, phrases in actions.items():
            self.add_action(name, phrases)

    def add_template(self, t: Template) -> None:
        existing = self._by_key.get(t.key)
        if existing is not None:
            if existing.pattern == t.pattern:
                return
            raise ValueError(f"predicate {t.predicate}/{t.arity} declared twice with different wording")
        self._by_key[t.key] = t
        self.templates.append(t)

    def add_action(self, name: str, phrases: Iterable[tuple[str, ...]]) -> None:
        phrases = tuple(tuple(w.lower() for w in p) for p in phrases)
        for p in phrases:
            owner = self._aliases.get(p)
            if owner is not None and owner != name:
                raise ValueError(f"action phrase {' '.join(p)!r} used for {owner} and {name}")
            self._aliases[p] = name
        merged = self.actions.get(name, ()) + tuple(p for p in phrases if p not in self.actions.get(name, ()))
        self.actions[name] = merged

    def merge(self, other: "Vocabulary") -> "Vocabulary":
        out = Vocabulary(list(self.templates), dict(self.actions))
        for t in other.templates:
            out.add_template(t)
        for name, phrases in other.actions.items():
            out.add_action(name, phrases)
        return out

    def copy(self) -> "Vocabulary":
        return Vocabulary(list(self.templates), dict(self.actions))

    def lookup(self, key: tuple[str, int]) -> Template | None:
        return self._by_key.get(key)

    def all_templates(self) -> list[Template]:
        return list(self._by_key.values())

    def action_for(self, phrase: tuple[str, ...]) -> str | None:
        return self._aliases.get(phrase)

    def action_phrase(self, name: str) -> str | None:
        phrases = self.actions.get(name)
        return " ".join(phrases[0]) if phrases else None

    def keys(self) -> frozenset[tuple[str, int]]:
        return frozenset(t.key for t in self.templates)

    def __len__(self) -> int:
        return len(self.templates)

    def declarations(self) -> list[str]:
        lines = [t.declaration() for t in self.templates]
        for name, phrases in self.actions.items():
            decl = " | ".join(" ".join(p) for p in phrases)
            if name != canonical_action(phrases[0]):
                decl = f"{name} = {decl}"
            lines.append(f"action: {decl}.")
        return lines


def canonical_action(phrase: tuple[str, ...]) -> str:
    return "_".join(phrase).replace("-", "_").replace("'", "")
