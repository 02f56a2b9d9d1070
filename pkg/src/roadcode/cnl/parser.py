"""Parser for the ``.rules`` controlled-English format.

A document is a sequence of sentences, each ended by ``.``.  Block headers
(``templates:``, ``rules:``, ``scenario [name]:``, ``goal [name]:``) switch
what the following sentences mean; text before any header is rules.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator, Sequence

from ..logic import Clause, Const, Literal, Naf, RuleSet, Scenario, SourceSpan, Var, is_ground
from .templates import ARTICLES, RESERVED, Slot, Template, Vocabulary, canonical_action, default_predicate, valid_phrase


class CNLError(Exception):
    def __init__(self, message: str, span: SourceSpan | None = None):
        self.span = span
        self.message = message
        super().__init__(f"{span}: {message}" if span else message)

    @property
    def line(self) -> int | None:
        return self.span.start_line if self.span else None


class CNLSyntaxError(CNLError):
    def __init__(self, message: str, span: SourceSpan | None = None, expected: str = ""):
        super().__init__(message + (f" (expected {expected})" if expected else ""), span)
        self.expected = expected


class UnresolvedDefiniteReference(CNLError):
    pass


class AmbiguousTemplate(CNLError):
    pass


class NoTemplateForPredicate(CNLError):
    pass


@dataclass(frozen=True)
class Token:
    text: str
    line: int
    col: int

    @property
    def low(self) -> str:
        return self.text.lower()

    @property
    def end_col(self) -> int:
        return self.col + len(self.text)


_TOKEN = re.compile(r"(?P<comment>%[^\n]*)|(?P<word>[A-Za-z0-9_][A-Za-z0-9_'\-]*)|(?P<punct>[.:*|=])|(?P<ws>\s+)")

HEADERS = ("templates", "rules", "scenario", "goal")
NEGATION = ("it", "is", "not", "the", "case", "that")


def tokenize(text: str, source: str = "") -> list[Token]:
    tokens = []
    line, line_start = 1, 0
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            col = pos - line_start + 1
            raise CNLSyntaxError(f"unexpected character {text[pos]!r}", SourceSpan(line, col, line, col + 1, source))
        kind = m.lastgroup
        if kind in ("word", "punct"):
            tokens.append(Token(m.group(), line, pos - line_start + 1))
        chunk = m.group()
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            line_start = pos + chunk.rfind("\n") + 1
        pos = m.end()
    return tokens


def _span(tokens: Sequence[Token], source: str) -> SourceSpan:
    first, last = tokens[0], tokens[-1]
    return SourceSpan(first.line, first.col, last.line, last.end_col, source)


@dataclass
class Document:
    """Parsed ``.rules`` text: vocabulary, rules with spans, scenarios and goals."""

    vocabulary: Vocabulary = field(default_factory=Vocabulary)
    clauses: list[Clause] = field(default_factory=list)
    spans: list[SourceSpan] = field(default_factory=list)
    scenarios: list[Scenario] = field(default_factory=list)
    goals: list[tuple[str, Literal]] = field(default_factory=list)
    source: str = ""

    @property
    def templates(self) -> list[Template]:
        return self.vocabulary.templates


# -- filler classification ------------------------------------------------

# ('const', symbol) | ('new', phrase) | ('ref', phrase)
Filler = tuple


def _classify(words: Sequence[str], slot: Slot, vocab: Vocabulary) -> Filler | None:
    if slot.kind == "action":
        name = vocab.action_for(tuple(words))
        if name is not None:
            return ("const", name)
    n = len(words)
    if n == 1:
        w = words[0]
        if w in RESERVED:
            return None
        return ("const", w)
    if words[0] in ARTICLES or words[0] == "the":
        phrase = " ".join(words[1:])
        if not valid_phrase(phrase):
            return None
        return ("new" if words[0] in ARTICLES else "ref", phrase)
    return None


def _match(pattern, words, vocab, pi=0, wi=0) -> Iterator[list[Filler]]:
    if pi == len(pattern):
        if wi == len(words):
            yield []
        return
    item = pattern[pi]
    if isinstance(item, str):
        if wi < len(words) and words[wi] == item:
            yield from _match(pattern, words, vocab, pi + 1, wi + 1)
        return
    for end in range(wi + 1, len(words) + 1):
        filler = _classify(words[wi:end], item, vocab)
        if filler is None:
            continue
        for rest in _match(pattern, words, vocab, pi + 1, end):
            yield [filler] + rest


def match_templates(words: Sequence[str], vocab: Vocabulary) -> list[tuple[Template, tuple[Filler, ...]]]:
    found: dict[tuple, tuple[Template, tuple[Filler, ...]]] = {}
    for t in vocab.all_templates():
        for fillers in _match(t.pattern, words, vocab):
            found.setdefault((t.key, tuple(fillers)), (t, tuple(fillers)))
    return list(found.values())


# -- variable scoping --------------------------------------------------------


class _Scope:
    """Clause-scoped article resolution."""

    def __init__(self) -> None:
        self.recent: dict[str, Var] = {}
        self.used: set[str] = set()
        self.indefinites = 0

    def fresh(self, phrase: str) -> tuple[Var, Literal | None]:
        base = phrase.replace(" ", "_").capitalize()
        name, n = base, 1
        while name in self.used:
            n += 1
            name = f"{base}_{n}"
        self.used.add(name)
        v = Var(name)
        guard = None
        if phrase.startswith("other "):
            prior = self.recent.get(phrase[len("other "):])
            if prior is not None:
                guard = Literal("different", (v, prior))
        self.recent[phrase] = v
        self.indefinites += 1
        return v, guard

    def ref(self, phrase: str, span: SourceSpan) -> Var:
        v = self.recent.get(phrase)
        if v is None:
            raise UnresolvedDefiniteReference(f"'the {phrase}' has no antecedent", span)
        return v


# -- parser -------------------------------------------------------------------


def _declares(sentence: list[Token]) -> bool:
    """Does this sentence declare a template or an action (rather than state a rule)?"""
    if any(t.text == "*" for t in sentence):
        return True
    return len(sentence) > 1 and sentence[0].low == "action" and sentence[1].text == ":"


class _Parser:
    def __init__(self, text: str, vocabulary: Vocabulary | None, source: str):
        self.source = source
        self.tokens = tokenize(text, source)
        self.doc = Document(vocabulary.copy() if vocabulary else Vocabulary(), source=source)
        self.unnamed = {"scenario": 0, "goal": 0}

    def sentences(self) -> Iterator[tuple[str, object, list[Token]]]:
        """Yield (block, owner, tokens) for every sentence, handling headers.

        ``owner`` is the scenario index for scenario blocks and the goal name
        for goal blocks.
        """
        block: str = "rules"
        owner: object = None
        toks = self.tokens
        i = 0
        current: list[Token] = []
        while i < len(toks):
            t = toks[i]
            if not current and t.low in HEADERS:
                named = t.low in ("scenario", "goal") and i + 2 < len(toks) and toks[i + 2].text == ":"
                if i + 1 < len(toks) and toks[i + 1].text == ":":
                    block, owner = t.low, self._open_block(t.low, None)
                    i += 2
                    continue
                if named and toks[i + 1].text not in (":", ".", "*", "|", "="):
                    block, owner = t.low, self._open_block(t.low, toks[i + 1].low)
                    i += 3
                    continue
            if t.text == ".":
                if not current:
                    raise CNLSyntaxError("empty sentence", _span([t], self.source))
                if block == "templates" and not _declares(current):
                    block = "rules"  # a templates block ends at the first ordinary sentence
                yield block, owner, current
                current = []
            else:
                current.append(t)
            i += 1
        if current:
            raise CNLSyntaxError("sentence not terminated", _span(current, self.source), expected="'.'")

    def _open_block(self, block: str, name: str | None) -> object:
        if block not in ("scenario", "goal"):
            return None
        if name is None:
            self.unnamed[block] += 1
            n = self.unnamed[block]
            name = block if n == 1 else f"{block}_{n}"
        if block == "scenario":
            self.doc.scenarios.append(Scenario((), name))
            return len(self.doc.scenarios) - 1
        return name

    def parse(self) -> Document:
        pending = []
        for block, owner, sentence in self.sentences():
            if block == "templates":
                self._template(sentence)
            else:
                pending.append((block, owner, sentence))
        # templates may be declared after use, so sentences are resolved afterwards
        goal_counts: dict[str, int] = {}
        facts: dict[int, list[Literal]] = {}
        for block, owner, sentence in pending:
            if block == "rules":
                self.doc.clauses.append(self._rule(sentence))
                self.doc.spans.append(_span(sentence, self.source))
            elif block == "scenario":
                facts.setdefault(owner, []).append(self._ground(sentence))
            else:
                lit, _ = self._literal_sentence(sentence)
                count = goal_counts[owner] = goal_counts.get(owner, 0) + 1
                self.doc.goals.append((owner if count == 1 else f"{owner}_{count}", lit))
        self.doc.scenarios = [
            Scenario(tuple(facts.get(i, ())), sc.name) for i, sc in enumerate(self.doc.scenarios)
        ]
        return self.doc

    # template declarations ------------------------------------------------

    def _template(self, sentence: list[Token]) -> None:
        span = _span(sentence, self.source)
        words = [t.low for t in sentence]
        if len(words) >= 2 and words[0] == "action" and words[1] == ":":
            self._action(sentence[2:], span)
            return
        predicate = None
        if len(sentence) >= 2 and sentence[1].text == ":":
            predicate = words[0]
            sentence = sentence[2:]
        pattern: list = []
        i = 0
        while i < len(sentence):
            t = sentence[i]
            if t.text == "*":
                j = i + 1
                while j < len(sentence) and sentence[j].text != "*":
                    j += 1
                if j == len(sentence):
                    raise CNLSyntaxError("unclosed slot", span, expected="'*'")
                slot_words = [x.low for x in sentence[i + 1 : j]]
                if not slot_words or slot_words[0] not in ARTICLES:
                    raise CNLSyntaxError("slot must start with 'a' or 'an'", span)
                phrase = " ".join(slot_words[1:])
                if not valid_phrase(phrase):
                    raise CNLSyntaxError(f"bad slot noun {phrase!r}", span)
                pattern.append(Slot(phrase, "action" if phrase == "action" else "entity"))
                i = j + 1
                continue
            if t.text in (":", "|", "="):
                raise CNLSyntaxError(f"unexpected {t.text!r} in template", span)
            pattern.append(t.low)
            i += 1
        try:
            template = Template(tuple(pattern), predicate or default_predicate(pattern))
            self.doc.vocabulary.add_template(template)
        except ValueError as exc:
            raise CNLSyntaxError(str(exc), span) from None

    def _action(self, sentence: list[Token], span: SourceSpan) -> None:
        name = None
        if len(sentence) >= 2 and sentence[1].text == "=":
            name = sentence[0].low
            sentence = sentence[2:]
        phrases: list[tuple[str, ...]] = [()]
        for t in sentence:
            if t.text == "|":
                phrases.append(())
            elif t.text in (":", "*", "="):
                raise CNLSyntaxError(f"unexpected {t.text!r} in action declaration", span)
            else:
                phrases[-1] += (t.low,)
        if any(not p for p in phrases):
            raise CNLSyntaxError("empty action phrase", span, expected="words")
        try:
            self.doc.vocabulary.add_action(name or canonical_action(phrases[0]), phrases)
        except ValueError as exc:
            raise CNLSyntaxError(str(exc), span) from None

    # sentences ---------------------------------------------------------------

    def _resolve(self, tokens: list[Token], scope: _Scope) -> tuple[Literal, list[Literal]]:
        """Match ``tokens`` to exactly one template and build the literal."""
        span = _span(tokens, self.source)
        words = [t.low for t in tokens]
        matches = match_templates(words, self.doc.vocabulary)
        if not matches:
            raise NoTemplateForPredicate(f"no template matches '{' '.join(t.text for t in tokens)}'", span)
        if len(matches) > 1:
            preds = ", ".join(f"{t.predicate}/{t.arity}" for t, _ in matches)
            raise AmbiguousTemplate(f"phrase matches several templates ({preds})", span)
        template, fillers = matches[0]
        args = []
        guards = []
        for filler in fillers:
            kind, value = filler
            if kind == "const":
                args.append(Const(value))
            elif kind == "ref":
                args.append(scope.ref(value, span))
            else:
                v, guard = scope.fresh(value)
                args.append(v)
                if guard is not None:
                    guards.append(guard)
        return Literal(template.predicate, tuple(args)), guards

    def _literal_sentence(self, tokens: list[Token]) -> tuple[Literal, _Scope]:
        scope = _Scope()
        lit, _ = self._resolve(tokens, scope)
        return lit, scope

    def _ground(self, tokens: list[Token]) -> Literal:
        lit, _ = self._literal_sentence(tokens)
        if not is_ground(lit):
            raise CNLSyntaxError("scenario facts must be ground", _span(tokens, self.source), expected="constants")
        return lit

    def _rule(self, tokens: list[Token]) -> Clause:
        words = [t.low for t in tokens]
        if "if" in words:
            cut = words.index("if")
            head_toks, cond_toks = tokens[:cut], tokens[cut + 1 :]
            if not head_toks:
                raise CNLSyntaxError("rule has no conclusion", _span(tokens, self.source), expected="a conclusion before 'if'")
            if not cond_toks:
                raise CNLSyntaxError("rule has no conditions", _span(tokens, self.source), expected="conditions after 'if'")
        else:
            head_toks, cond_toks = tokens, []
        scope = _Scope()
        head, head_guards = self._resolve(head_toks, scope)
        body: list = []
        if cond_toks:
            segments = self._segment(cond_toks)
            if segments is None:
                self._diagnose(cond_toks)
            for negated, seg in segments:
                lit, guards = self._resolve(seg, scope)
                if negated:
                    body.append(Naf((lit, *guards)))
                else:
                    body.append(lit)
                    body.extend(guards)
        body.extend(head_guards)
        return Clause(head, tuple(body))

    def _condition_shape(self, toks: list[Token]) -> tuple[bool, list[Token]] | None:
        words = tuple(t.low for t in toks)
        negated = words[: len(NEGATION)] == NEGATION
        seg = toks[len(NEGATION) :] if negated else toks
        if not seg:
            return None
        if not match_templates([t.low for t in seg], self.doc.vocabulary):
            return None
        return negated, seg

    def _segment(self, toks: list[Token]) -> list[tuple[bool, list[Token]]] | None:
        """Split conditions at ``and`` so that every piece matches a template."""
        if not toks:
            return []
        cuts = [i for i, t in enumerate(toks) if t.low == "and"] + [len(toks)]
        for cut in cuts:
            shape = self._condition_shape(toks[:cut])
            if shape is None:
                continue
            if cut == len(toks):
                return [shape]
            rest = self._segment(toks[cut + 1 :])
            if rest is not None:
                return [shape] + rest
        return None

    def _diagnose(self, toks: list[Token]) -> None:
        # report the first condition that matches nothing
        start = 0
        for i, t in enumerate(toks + [None]):
            if t is None or t.low == "and":
                piece = toks[start:i]
                if piece and self._condition_shape(piece) is None:
                    words = tuple(x.low for x in piece)
                    if words[: len(NEGATION)] == NEGATION:
                        piece = piece[len(NEGATION) :]
                    if not piece:
                        raise CNLSyntaxError("negation without a condition", _span(toks, self.source), expected="a condition")
                    self._resolve(piece, _Scope())
                start = i + 1
        raise CNLSyntaxError("cannot split conditions", _span(toks, self.source), expected="conditions joined by 'and'")


def parse_document(text: str, vocabulary: Vocabulary | None = None, source: str = "") -> Document:
    """Parse ``.rules`` text.  ``vocabulary`` supplies templates declared elsewhere."""
    return _Parser(text, vocabulary, source).parse()


def lower(doc: Document) -> tuple[RuleSet, dict[str, Scenario], dict[str, Literal]]:
    rules = RuleSet(tuple(doc.clauses), tuple(doc.spans), doc.vocabulary.keys())
    scenarios = {s.name: s for s in doc.scenarios}
    goals = dict(doc.goals)
    return rules, scenarios, goals


def parse_vocabulary(text: str, vocabulary: Vocabulary | None = None, source: str = "") -> Vocabulary:
    """Collect only the ``templates:`` blocks of ``text``."""
    p = _Parser(text, vocabulary, source)
    for block, _, sentence in p.sentences():
        if block == "templates":
            p._template(sentence)
    return p.doc.vocabulary


def parse_literal(text: str, vocabulary: Vocabulary, source: str = "") -> Literal:
    """Parse a single sentence such as ``173 can enter the junction``."""
    tokens = [t for t in tokenize(text, source) if t.text != "."]
    if not tokens:
        raise CNLSyntaxError("empty sentence", expected="a sentence")
    lit, _ = _Parser("", vocabulary, source)._literal_sentence(tokens)
    return lit
