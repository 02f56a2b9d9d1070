from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import random_document
from roadcode.cnl import (
    AmbiguousTemplate,
    CNLSyntaxError,
    NoTemplateForPredicate,
    UnresolvedDefiniteReference,
    Vocabulary,
    lower,
    parse_document,
    parse_literal,
    render_clause,
    render_document,
    render_failure,
    render_literal,
    render_trace,
    tokenize,
)
from roadcode.logic import Const, Naf, Var, alpha_equivalent, atom, explain_failure, solve

TEMPLATES = """templates:
  *a vehicle* is of type *a type*.
  *a vehicle* has *a colour* light.
  *a vehicle* is stopped.
  *a vehicle* can *an action*.
  must_give_way: *a vehicle* must give way to *an other vehicle*.
  *a vehicle* potentially violates *an action*.
  action: enter the junction | entering the junction.
"""

LISTING_1 = """
a vehicle can enter the junction if
the vehicle is of type ambulance
and it is not the case that
    the vehicle must give way to an other vehicle.

a vehicle can enter the junction if
the vehicle has green light
and it is not the case that
    the vehicle must give way to an other vehicle.
"""

LISTING_2 = """
a vehicle potentially violates entering the junction if
the vehicle has red light
and it is not the case that
    the vehicle is stopped.
"""

LISTING_3 = """
scenario:
    173 is of type car.
    173 has red light.
goal:
    173 can enter the junction.
"""


def doc(text: str):
    return parse_document(TEMPLATES + text)


def test_listing_1_lowers_to_two_clauses():
    rules, _, _ = lower(doc(LISTING_1))
    assert len(rules) == 2
    first = rules.clauses[0]
    v, w = Var("Vehicle"), Var("Other_vehicle")
    assert first.head == atom("can", v, "enter_the_junction")
    assert first.body[0] == atom("is_of_type", v, "ambulance")
    neg = first.body[1]
    assert isinstance(neg, Naf)
    assert neg.literal == atom("must_give_way", v, w)
    assert neg.literals[1:] == (atom("different", w, v),)


def test_listing_2_action_phrase_maps_to_canonical_constant():
    rules, _, _ = lower(doc(LISTING_2))
    assert rules.clauses[0].head.args[1] == Const("enter_the_junction")


def test_listing_3_scenario_and_goal():
    _, scenarios, goals = lower(doc(LISTING_3))
    assert set(scenarios["scenario"]) == {atom("is_of_type", "173", "car"), atom("has_light", "173", "red")}
    assert goals["goal"] == atom("can", "173", "enter_the_junction")


def test_spans_point_at_source_lines():
    rules, _, _ = lower(parse_document(TEMPLATES + LISTING_1, source="l1.rules"))
    assert [s.start_line for s in rules.spans] == [10, 15]
    assert rules.spans[0].source == "l1.rules"


def test_dangling_definite_reference():
    with pytest.raises(UnresolvedDefiniteReference) as info:
        doc("a vehicle can enter the junction if\n  the car has green light.\n")
    assert info.value.line == 10


def test_empty_document():
    d = parse_document("")
    rules, scenarios, goals = lower(d)
    assert len(rules) == 0 and not scenarios and not goals
    assert render_document(d) == ""


def test_comments_are_ignored():
    d = doc("% just a note\n" + LISTING_2)
    assert len(d.clauses) == 1


def test_no_template():
    with pytest.raises(NoTemplateForPredicate):
        doc("a vehicle can enter the junction if\n  the vehicle flies.\n")


def test_ambiguous_template():
    text = "templates:\n  *a thing* is red.\n  red_thing: *a thing* is red.\n"
    parse_document(text)  # declaring both is allowed
    with pytest.raises(AmbiguousTemplate):
        parse_document(text + "rules:\n  a cat is red.\n")


def test_missing_full_stop_is_a_syntax_error():
    with pytest.raises(CNLSyntaxError):
        doc("a vehicle can enter the junction if\n  the vehicle has green light\n")


def test_other_without_antecedent_gets_no_guard():
    rules, _, _ = lower(doc("an other vehicle is stopped.\n"))
    assert rules.clauses[0].body == ()


def test_parse_literal():
    vocab = doc("").vocabulary
    assert parse_literal("253 can enter the junction.", vocab) == atom("can", "253", "enter_the_junction")
    with pytest.raises(NoTemplateForPredicate):
        parse_literal("253 flies", vocab)


def test_tokenize_tracks_positions():
    toks = tokenize("a b\n  c.")
    assert [(t.text, t.line, t.col) for t in toks] == [("a", 1, 1), ("b", 1, 3), ("c", 2, 3), (".", 2, 4)]


def test_duplicate_template_with_new_wording_rejected():
    v = Vocabulary()
    parse_document("templates:\n  *a car* is red.\n", v)
    with pytest.raises(Exception):
        parse_document("templates:\n  *a car* is red.\n  is_red: *a car* looks red.\n")


# -- rendering --------------------------------------------------------------------


def test_render_listing_1_canonical_layout():
    d = doc(LISTING_1)
    assert render_clause(d.clauses[0], d.vocabulary) == (
        "a vehicle can enter the junction if\n"
        "  the vehicle is of type ambulance\n"
        "  and it is not the case that\n"
        "    the vehicle must give way to an other vehicle."
    )


def test_render_literal_with_constants():
    d = doc("")
    assert render_literal(atom("has_light", "173", "red"), d.vocabulary) == "173 has red light"


def test_render_trace_and_failure():
    d = doc(LISTING_1)
    rules, _, _ = lower(d)
    amb = parse_document(TEMPLATES + "scenario:\n  253 is of type ambulance.\n  253 has red light.\n")
    sc = amb.scenarios[0]
    goal = atom("can", "253", "enter_the_junction")
    text = render_trace(solve(goal, rules, sc)[0].trace, d.vocabulary, rules)
    assert text.splitlines() == [
        "253 can enter the junction [by rule at line 10]",
        "  253 is of type ambulance [given in scenario]",
        "  it is not the case that 253 must give way to an other vehicle [by absence of evidence]",
    ]
    car = lower(doc(LISTING_3))[1]["scenario"]
    why = render_failure(explain_failure(atom("can", "173", "enter_the_junction"), rules, car), d.vocabulary, rules)
    assert why.splitlines()[0] == "no: 173 can enter the junction"
    assert "fails: 173 has green light, which is not given" in why


def _roundtrip(text: str) -> None:
    d1 = parse_document(text)
    canonical = render_document(d1)
    d2 = parse_document(canonical)
    r1, s1, g1 = lower(d1)
    r2, s2, g2 = lower(d2)
    assert len(r1) == len(r2)
    assert all(alpha_equivalent(x, y) for x, y in zip(r1, r2))
    assert s1 == s2 and g1 == g2
    assert render_document(d2) == canonical  # rendering is a fixed point


def test_roundtrip_listings():
    _roundtrip(TEMPLATES + LISTING_1 + LISTING_2 + LISTING_3)


@given(st.integers(min_value=0, max_value=2**32))
@settings(max_examples=60, deadline=None)
def test_roundtrip_generated_documents(seed):
    _roundtrip(random_document(random.Random(seed)))


def test_generator_covers_negation_and_other():
    texts = [random_document(random.Random(i)) for i in range(100)]
    assert any("it is not the case that" in t for t in texts)
    assert any(" an other " in t for t in texts)
    assert any(" the " in t for t in texts)
