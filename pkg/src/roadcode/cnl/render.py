"""Render clauses, scenarios and proofs back into the controlled English."""
from __future__ import annotations

import re
from typing import Callable, Iterable

from ..logic import (
    BUILTINS,
    Clause,
    Compound,
    Const,
    FailedGoal,
    Literal,
    Naf,
    ProofTrace,
    RuleSet,
    Scenario,
    Term,
    Var,
)
from .parser import CNLError, Document, NoTemplateForPredicate
from .templates import RESERVED, Slot, Template, Vocabulary, indefinite, valid_phrase

INDENT = "  "
_TOKEN = re.compile(r"^[a-z0-9_][a-z0-9_'\-]*$")


class RenderError(CNLError):
    pass


def phrase_of(v: Var) -> str:
    """Noun phrase a variable was introduced with (``Other_vehicle_2`` -> ``other vehicle``)."""
    name = v.name.split("#", 1)[0]
    name = re.sub(r"(_\d+)+$", "", name)
    return name.lower().replace("_", " ")


def _template(lit: Literal, vocab: Vocabulary) -> Template:
    t = vocab.lookup(lit.key)
    if t is None:
        raise NoTemplateForPredicate(f"no template for {lit.predicate}/{len(lit.args)}")
    return t


def _const_text(c: Const, slot: Slot, vocab: Vocabulary) -> str:
    if slot.kind == "action":
        phrase = vocab.action_phrase(c.symbol)
        if phrase is not None:
            return phrase
    if not _TOKEN.match(c.symbol) or c.symbol in RESERVED:
        raise RenderError(f"constant {c.symbol!r} cannot be written as a word")
    return c.symbol


def _literal_text(lit: Literal, vocab: Vocabulary, var_text: Callable[[Var], str]) -> str:
    t = _template(lit, vocab)
    args = iter(lit.args)
    words = []
    for item in t.pattern:
        if isinstance(item, str):
            words.append(item)
            continue
        arg: Term = next(args)
        if isinstance(arg, Const):
            words.append(_const_text(arg, item, vocab))
        elif isinstance(arg, Var):
            words.append(var_text(arg))
        else:
            raise RenderError(f"compound term {arg} has no English form")
    return " ".join(words)


def render_literal(lit: Literal, vocab: Vocabulary) -> str:
    """Stand-alone rendering; unbound variables read as ``a <noun>``."""
    return _literal_text(lit, vocab, lambda v: indefinite(phrase_of(v) or "thing"))


class _Articles:
    """Choose a/an/the for each variable occurrence so the text re-parses."""

    def __init__(self) -> None:
        self.recent: dict[str, Var] = {}
        self.introduced: set[Var] = set()
        self.guards: list[Literal] = []

    def __call__(self, v: Var) -> str:
        phrase = phrase_of(v)
        if not valid_phrase(phrase):
            raise RenderError(f"variable {v.name} has no usable noun phrase")
        if v in self.introduced:
            if self.recent.get(phrase) != v:
                raise RenderError(f"'the {phrase}' would not refer to {v.name}")
            return f"the {phrase}"
        self.introduced.add(v)
        if phrase.startswith("other "):
            prior = self.recent.get(phrase[len("other "):])
            if prior is not None:
                self.guards.append(Literal("different", (v, prior)))
        self.recent[phrase] = v
        return indefinite(phrase)

    def take_guards(self) -> list[Literal]:
        out, self.guards = self.guards, []
        return out


def render_clause(clause: Clause, vocab: Vocabulary) -> str:
    """Canonical text of one clause; re-parses to an alpha-equivalent clause."""
    art = _Articles()
    head = _literal_text(clause.head, vocab, art)
    head_guards = art.take_guards()
    body = list(clause.body)
    if head_guards:
        tail = body[len(body) - len(head_guards) :]
        if tail != head_guards:
            raise RenderError(f"missing distinctness check for 'an other' in {clause.head}")
        body = body[: len(body) - len(head_guards)]
    if not body:
        return head + "."
    lines = [head + " if"]
    i = 0
    first = True
    while i < len(body):
        item = body[i]
        lead = INDENT if first else INDENT + "and "
        first = False
        if isinstance(item, Naf):
            text = _literal_text(item.literal, vocab, art)
            if list(item.literals[1:]) != art.take_guards():
                raise RenderError(f"negated block {item} cannot be written")
            lines.append(lead + "it is not the case that")
            lines.append(INDENT * 2 + text)
            i += 1
            continue
        text = _literal_text(item, vocab, art)
        guards = art.take_guards()
        if body[i + 1 : i + 1 + len(guards)] != guards:
            raise RenderError(f"missing distinctness check after {item}")
        lines.append(lead + text)
        i += 1 + len(guards)
    return "\n".join(lines) + "."


def render_rules(rules: Iterable[Clause], vocab: Vocabulary) -> str:
    return "\n\n".join(render_clause(c, vocab) for c in rules)


def render_scenario(scenario: Scenario, vocab: Vocabulary, header: bool = True) -> str:
    lines = []
    if header:
        lines.append("scenario:" if scenario.name == "scenario" else f"scenario {scenario.name}:")
    for fact in scenario:
        lines.append(INDENT + render_literal(fact, vocab) + ".")
    return "\n".join(lines)


def render_document(doc: Document, include_templates: bool = True, base: Vocabulary | None = None) -> str:
    """Canonical text of a whole document.

    Templates already present in ``base`` (for example the corpus the
    document was parsed against) are not repeated in the output.
    """
    parts = []
    if include_templates:
        decls = doc.vocabulary.declarations()
        if base is not None:
            known = set(base.declarations())
            decls = [d for d in decls if d not in known]
        if decls:
            parts.append("templates:\n" + "\n".join(INDENT + d for d in decls))
    if doc.clauses:
        parts.append(("rules:\n\n" if parts else "") + render_rules(doc.clauses, doc.vocabulary))
    for sc in doc.scenarios:
        parts.append(render_scenario(sc, doc.vocabulary))
    for name, goal in doc.goals:
        art = _Articles()
        header = "goal:" if name == "goal" else f"goal {name}:"
        parts.append(f"{header}\n{INDENT}{_literal_text(goal, doc.vocabulary, art)}.")
    return "\n\n".join(parts) + ("\n" if parts else "")


# -- explanations ---------------------------------------------------------------


def _rule_ref(idx: int | None, rules: RuleSet | None) -> str:
    span = rules.spans[idx] if rules is not None and idx is not None and idx < len(rules.spans) else None
    if span is None:
        return f"by rule {idx}" if idx is not None else "by rule"
    where = f"by rule at line {span.start_line}"
    return f"{where} of {span.source}" if span.source else where


def _justify(node: ProofTrace, rules: RuleSet | None) -> str:
    if node.resolution == "fact":
        return "given in scenario"
    if node.resolution == "naf":
        return "by absence of evidence"
    if node.resolution == "builtin":
        return "by computation"
    return _rule_ref(node.clause, rules)


def render_trace(trace: ProofTrace, vocab: Vocabulary, rules: RuleSet | None = None) -> str:
    """Indented proof, one line per step with its justification."""
    lines: list[str] = []

    def visit(node: ProofTrace, depth: int) -> None:
        text = render_literal(node.goal, vocab)
        if node.resolution == "naf":
            text = "it is not the case that " + text
        lines.append(f"{INDENT * depth}{text} [{_justify(node, rules)}]")
        for child in node.children:
            visit(child, depth + 1)

    visit(trace, 0)
    return "\n".join(lines)


def render_failure(failed: FailedGoal, vocab: Vocabulary, rules: RuleSet | None = None) -> str:
    """Explain why a goal has no proof, following the deepest failed branch of each rule."""
    lines = [f"no: {render_literal(failed.goal, vocab)}"]
    _failure_lines(failed, vocab, rules, 1, lines)
    return "\n".join(lines)


def _failure_lines(failed: FailedGoal, vocab, rules, depth: int, lines: list[str]) -> None:
    pad = INDENT * depth
    if not failed.attempts:
        lines.append(f"{pad}no rule concludes it and the scenario does not state it")
        return
    for att in failed.attempts:
        lines.append(f"{pad}{_rule_ref(att.clause, rules)}:")
        for proof in att.satisfied:
            text = render_literal(proof.goal, vocab)
            if proof.resolution == "naf":
                text = "it is not the case that " + text
            lines.append(f"{pad}{INDENT}holds: {text} [{_justify(proof, rules)}]")
        if isinstance(att.failed, Naf):
            text = render_literal(att.failed.literal, vocab)
            lines.append(f"{pad}{INDENT}fails: it is not the case that {text}, because it holds")
            if isinstance(att.reason, ProofTrace):
                for line in render_trace(att.reason, vocab, rules).splitlines():
                    lines.append(f"{pad}{INDENT * 2}{line}")
            continue
        text = render_literal(att.failed, vocab)
        if isinstance(att.reason, FailedGoal) and att.reason.attempts:
            lines.append(f"{pad}{INDENT}fails: {text}, which cannot be derived")
            _failure_lines(att.reason, vocab, rules, depth + 2, lines)
        elif att.failed.key in BUILTINS:
            lines.append(f"{pad}{INDENT}fails: {text}, which does not hold")
        else:
            lines.append(f"{pad}{INDENT}fails: {text}, which is not given")


def render_term(t: Term) -> str:
    if isinstance(t, Compound):
        return str(t)
    return t.name if isinstance(t, Var) else t.symbol
