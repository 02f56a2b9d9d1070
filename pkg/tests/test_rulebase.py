from __future__ import annotations

import shutil
from pathlib import Path

import pytest

from roadcode.cnl import NoTemplateForPredicate
from roadcode.logic import Const, Literal, Scenario, Var, atom, solve
from roadcode.rulebase import (
    CORPUS_ENV,
    CorpusError,
    PenaltyEntry,
    UnknownOffence,
    default_corpus_path,
    load_corpus,
    penalty_for,
)


@pytest.fixture(scope="module")
def corpus():
    return load_corpus()


def can_enter(corpus, *facts) -> bool:
    sc = Scenario.of(atom(*f) for f in facts)
    return bool(solve(atom("can", "v1", "enter_the_junction"), corpus.permissions, sc))


def test_default_corpus_size(corpus):
    # frozen after authoring the corpus
    assert len(corpus.rules) == 12
    assert len(corpus.vocabulary.templates) == 16
    assert len(corpus.permissions) == 7 and len(corpus.detection) == 3 and len(corpus.parts["validator"]) == 2


def test_every_predicate_is_templated(corpus):
    declared = {t.key for t in corpus.templates}
    assert corpus.rules.predicates() <= declared


def test_listing_outcomes(corpus):
    assert not can_enter(corpus, ("is_of_type", "v1", "car"), ("has_light", "v1", "red"))
    assert can_enter(corpus, ("is_of_type", "v1", "ambulance"), ("has_light", "v1", "red"))
    assert can_enter(corpus, ("is_of_type", "v1", "car"), ("has_light", "v1", "green"))


def test_occupied_junction_means_give_way(corpus):
    assert not can_enter(
        corpus, ("is_of_type", "v1", "ambulance"), ("occupies_junction_ahead_of", "v2", "v1")
    )


STOP = (("is_of_type", "v1", "car"), ("faces_stop_sign", "v1"), ("safe_gap", "5"))


def test_rule_171_requires_stopping(corpus):
    assert not can_enter(corpus, *STOP)
    assert can_enter(corpus, *STOP, ("stopped_at_stop_line", "v1"))


@pytest.mark.parametrize("distance, allowed", [("3", False), ("5", False), ("6", True), ("12", True)])
def test_rule_171_safe_gap(corpus, distance, allowed):
    facts = STOP + (("stopped_at_stop_line", "v1"), ("priority_approach", "v2", "v1", distance))
    assert can_enter(corpus, *facts) is allowed


def test_priority_road_traffic_need_not_stop(corpus):
    assert can_enter(corpus, ("is_of_type", "v1", "car"), ("has_priority", "v1"))


def test_speed_permission(corpus):
    def ok(speed):
        sc = Scenario.of([atom("travels_at", "v1", speed), atom("speed_limit", "1")])
        return bool(solve(atom("can", "v1", "drive_within_the_speed_limit"), corpus.permissions, sc))

    assert ok("1") and ok("0") and not ok("2")


def test_detection_rules(corpus):
    def pv(*facts):
        sc = Scenario.of(atom(*f) for f in facts)
        sols = solve(Literal("potentially_violates", (Const("v1"), Var("A"))), corpus.detection, sc)
        return {str(s.bindings[Var("A")]) for s in sols}

    assert pv(("has_light", "v1", "red")) == {"enter_the_junction"}
    assert pv(("has_light", "v1", "red"), ("is_stopped", "v1")) == set()
    assert pv(("faces_stop_sign", "v1")) == {"enter_the_junction"}
    assert pv(("faces_stop_sign", "v1"), ("stopped_at_stop_line", "v1")) == set()
    assert pv(("travels_at", "v1", "2"), ("speed_limit", "1")) == {"drive_within_the_speed_limit"}


def test_penalty_for_cited_offence():
    entry = penalty_for("fail_to_comply_traffic_sign")
    assert entry.statute == "Road Traffic Act 1988 s.36"
    assert entry.fine_pence == 10000 and entry.fine_text() == "£100"
    assert entry.points == 3


def test_unknown_offence():
    with pytest.raises(UnknownOffence):
        penalty_for("jaywalking")


def test_offence_closure(corpus):
    """Every action a vehicle can be found violating maps to a schedule row."""
    assert corpus.penalties.unresolved() == []
    for action in corpus.actions:
        offence = corpus.penalties.offence_for(action)
        assert isinstance(corpus.penalty_for(offence), PenaltyEntry)


def test_placeholder_rows_are_marked(corpus):
    statuses = {e.offence_id: e.status for e in corpus.penalties.entries.values()}
    assert statuses["fail_to_comply_traffic_sign"] == "cited"
    assert set(statuses.values()) <= {"cited", "placeholder"}


def test_negative_fine_rejected():
    with pytest.raises(ValueError):
        PenaltyEntry("x", "x", "x", -1, 0)


def test_missing_path_named():
    with pytest.raises(CorpusError, match="no/such/dir"):
        load_corpus("no/such/dir")


def _copy_corpus(tmp_path: Path) -> Path:
    dst = tmp_path / "corpus"
    shutil.copytree(default_corpus_path(), dst)
    return dst


def test_untemplated_predicate_fails_at_load(tmp_path):
    dst = _copy_corpus(tmp_path)
    (dst / "extra.rules").write_text("a vehicle can enter the junction if\n  the vehicle is purple.\n")
    with pytest.raises(NoTemplateForPredicate) as info:
        load_corpus(dst)
    assert info.value.span.source == "extra.rules" and info.value.line == 2


def test_env_var_overrides_default(tmp_path, monkeypatch):
    dst = _copy_corpus(tmp_path)
    (dst / "detection.rules").unlink()
    monkeypatch.setenv(CORPUS_ENV, str(dst))
    assert len(load_corpus().detection) == 0


def test_bad_penalty_table(tmp_path):
    dst = _copy_corpus(tmp_path)
    (dst / "penalties.tsv").write_text("a\tb\n")
    with pytest.raises(CorpusError, match="penalties.tsv"):
        load_corpus(dst)
