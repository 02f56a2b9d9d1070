"""The shipped junction corpus and penalty schedule.

A corpus directory holds ``*.rules`` documents plus two tab-separated
tables:

``penalties.tsv``
    ``offence_id  description  statute  fine_pence  points  status``
``offences.tsv``
    ``action_id  offence_id``

Lines starting with ``#`` are comments.  Rule files are grouped by stem:
``permissions`` (what vehicles may do), ``detection`` (monitor rules) and
``validator``; any other stem only contributes to the combined rule set.
"""
from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field
from decimal import Decimal
from pathlib import Path

from ..cnl import Vocabulary, lower, parse_document, parse_vocabulary
from ..logic import RuleSet

CORPUS_ENV = "ROADCODE_CORPUS"
ROLES = ("permissions", "detection", "validator")
CORPUS_VERSION = "hc-junctions-1"


class CorpusError(Exception):
    pass


class UnknownOffence(KeyError):
    def __str__(self) -> str:
        return f"unknown offence {self.args[0]!r}"


@dataclass(frozen=True)
class PenaltyEntry:
    offence_id: str
    description: str
    statute: str
    fine_pence: int
    points: int
    status: str = "cited"

    def __post_init__(self) -> None:
        if self.fine_pence < 0 or self.points < 0:
            raise ValueError(f"negative fine or points for {self.offence_id}")

    @property
    def fine(self) -> Decimal:
        """Fine in GBP."""
        return Decimal(self.fine_pence) / 100

    def fine_text(self) -> str:
        pounds = self.fine
        return f"£{pounds:,.0f}" if pounds == pounds.to_integral() else f"£{pounds:,.2f}"

    def as_dict(self) -> dict:
        return {
            "offence": self.offence_id,
            "description": self.description,
            "statute": self.statute,
            "fine_pence": self.fine_pence,
            "points": self.points,
            "status": self.status,
        }


def _read_tsv(path: Path) -> list[list[str]]:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = []
        for row in csv.reader(fh, delimiter="\t"):
            if not row or row[0].startswith("#"):
                continue
            rows.append([c.strip() for c in row])
        return rows


@dataclass
class PenaltySchedule:
    entries: dict[str, PenaltyEntry] = field(default_factory=dict)
    offences: dict[str, str] = field(default_factory=dict)  # action id -> offence id

    @classmethod
    def load(cls, penalties: Path, offences: Path | None = None) -> "PenaltySchedule":
        entries: dict[str, PenaltyEntry] = {}
        for n, row in enumerate(_read_tsv(penalties), 1):
            if len(row) not in (5, 6):
                raise CorpusError(f"{penalties}: row {n} has {len(row)} columns, expected 5 or 6")
            oid, desc, statute, fine, points = row[:5]
            if oid in entries:
                raise CorpusError(f"{penalties}: duplicate offence id {oid!r}")
            try:
                entries[oid] = PenaltyEntry(oid, desc, statute, int(fine), int(points), *(row[5:] or ["cited"]))
            except ValueError as exc:
                raise CorpusError(f"{penalties}: row {n}: {exc}") from None
        mapping: dict[str, str] = {}
        if offences is not None and offences.exists():
            for n, row in enumerate(_read_tsv(offences), 1):
                if len(row) != 2:
                    raise CorpusError(f"{offences}: row {n} has {len(row)} columns, expected 2")
                mapping[row[0]] = row[1]
        return cls(entries, mapping)

    def penalty_for(self, offence_id: str) -> PenaltyEntry:
        try:
            return self.entries[offence_id]
        except KeyError:
            raise UnknownOffence(offence_id) from None

    def offence_for(self, action_id: str) -> str:
        try:
            return self.offences[action_id]
        except KeyError:
            raise UnknownOffence(f"no offence mapped for action {action_id}") from None

    def unresolved(self) -> list[str]:
        """Offence ids referenced by the action map but missing from the schedule."""
        return sorted({o for o in self.offences.values() if o not in self.entries})


@dataclass
class Corpus:
    """Parsed rule documents plus penalties, immutable once loaded."""

    vocabulary: Vocabulary
    rules: RuleSet
    parts: dict[str, RuleSet]
    penalties: PenaltySchedule
    path: Path | None = None
    version: str = CORPUS_VERSION

    @property
    def templates(self):
        return self.vocabulary.all_templates()

    @property
    def permissions(self) -> RuleSet:
        return self.parts.get("permissions", RuleSet(declared=self.rules.declared))

    @property
    def detection(self) -> RuleSet:
        return self.parts.get("detection", RuleSet(declared=self.rules.declared))

    @property
    def validator(self) -> RuleSet:
        """Permission rules followed by the validator rules."""
        rs = self.parts.get("validator", RuleSet(declared=self.rules.declared))
        return self.permissions + rs

    @property
    def actions(self) -> list[str]:
        return list(self.vocabulary.actions)

    def penalty_for(self, offence_id: str) -> PenaltyEntry:
        return self.penalties.penalty_for(offence_id)


def default_corpus_path() -> Path:
    env = os.environ.get(CORPUS_ENV)
    if env:
        return Path(env)
    return Path(__file__).with_name("corpus")


def load_corpus(path: str | os.PathLike | None = None) -> Corpus:
    """Load every ``.rules`` file under ``path`` (a directory or a single file)."""
    root = Path(path) if path is not None else default_corpus_path()
    if not root.exists():
        raise CorpusError(f"corpus not found: {root}")
    files = sorted(root.glob("*.rules")) if root.is_dir() else [root]
    if not files:
        raise CorpusError(f"no .rules files in {root}")
    texts = {}
    for f in files:
        try:
            texts[f] = f.read_text(encoding="utf-8")
        except OSError as exc:
            raise CorpusError(f"cannot read {f}: {exc}") from None
    vocab = Vocabulary()
    for f, text in texts.items():
        vocab = parse_vocabulary(text, vocab, source=f.name)
    parts: dict[str, RuleSet] = {}
    combined = RuleSet(declared=vocab.keys())
    for f, text in texts.items():
        doc = parse_document(text, vocab, source=f.name)
        rules, _, _ = lower(doc)
        rules = RuleSet(rules.clauses, rules.spans, vocab.keys())
        combined = combined + rules
        if f.stem in ROLES:
            parts[f.stem] = rules
    base = root if root.is_dir() else root.parent
    penalties_path = base / "penalties.tsv"
    penalties = (
        PenaltySchedule.load(penalties_path, base / "offences.tsv")
        if penalties_path.exists()
        else PenaltySchedule()
    )
    return Corpus(vocab, combined, parts, penalties, root)


_default: Corpus | None = None


def default_corpus() -> Corpus:
    global _default
    if _default is None or _default.path != default_corpus_path():
        _default = load_corpus()
    return _default


def penalty_for(offence_id: str, corpus: Corpus | None = None) -> PenaltyEntry:
    return (corpus or default_corpus()).penalty_for(offence_id)


__all__ = [
    "CORPUS_ENV",
    "Corpus",
    "CorpusError",
    "PenaltyEntry",
    "PenaltySchedule",
    "UnknownOffence",
    "default_corpus",
    "default_corpus_path",
    "load_corpus",
    "penalty_for",
]
