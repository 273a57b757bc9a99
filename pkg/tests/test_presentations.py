from __future__ import annotations

import json

import pytest
from hypothesis import given, strategies as st

from csrs.errors import InvalidFraction, InvariantViolation, SchemaError
from csrs.presentations import (GroupWord, X, Y, builtin_5_2, commutator, parse_presentation,
                                resolve_knot, twist_knot, two_bridge_presentation)


def test_commutator_convention():
    assert str(commutator(X, Y)) == "x y x^-1 y^-1"


def test_builtin_relator_is_commutator_square():
    k = builtin_5_2()
    assert k.relator_w.unit_letters() == [("y", 1), ("x", -1), ("y", -1), ("x", 1)] * 2
    assert k.meridian == X
    assert k.longitude.exponent_sum() == 0
    assert k.fraction == (7, 2)


def test_free_reduction_on_parse():
    assert GroupWord.parse("x x^-1 y") == Y
    assert GroupWord.parse("x^2 x^-1") == X


letters = st.lists(st.tuples(st.sampled_from("xy"), st.integers(-3, 3).filter(bool)), max_size=12)


@given(letters)
def test_free_reduction_idempotent(raw):
    w = GroupWord(tuple(raw))
    assert GroupWord(w.letters) == w
    for (g1, _), (g2, _) in zip(w.letters, w.letters[1:]):
        assert g1 != g2


@given(letters)
def test_inverse_cancels(raw):
    w = GroupWord(tuple(raw))
    assert (w * w.inverse()).letters == ()


def test_trefoil_word():
    k = two_bridge_presentation(3, 1)
    assert str(k.relator_w) == "x y"


@pytest.mark.parametrize("p,q", [(3, 1), (5, 3), (5, 1), (7, 2), (7, 3), (9, 2)])
def test_generated_longitudes_lie_in_commutator_subgroup(p, q):
    assert two_bridge_presentation(p, q).longitude.exponent_sum() == 0


@pytest.mark.parametrize("p,q", [(6, 1), (9, 3), (7, 0), (7, 7), (1, 1)])
def test_bad_fractions(p, q):
    with pytest.raises(InvalidFraction):
        two_bridge_presentation(p, q)


def test_twist_knots():
    assert twist_knot(1).fraction == (3, 2)
    assert twist_knot(2).fraction == (7, 2)
    assert twist_knot(2).name == "K_2"
    with pytest.raises(InvalidFraction):
        twist_knot(0)


def test_document_round_trip():
    k = builtin_5_2()
    again = parse_presentation(json.dumps(k.to_document()))
    assert again == k


def test_parse_rejects_bad_longitude():
    doc = builtin_5_2().to_document()
    doc["longitude"] = [["x", 2]]
    with pytest.raises(InvariantViolation) as info:
        parse_presentation(doc)
    assert info.value.invariant == "longitude_exponent_sum"


def test_parse_reduces_words():
    doc = {"name": "t", "relator": [["x", 1], ["x", -1], ["y", 1]], "longitude": []}
    assert parse_presentation(doc).relator_w == Y


@pytest.mark.parametrize("doc", [
    "not json", "[]", {"name": "a"},
    {"name": "a", "relator": [["z", 1]], "longitude": []},
    {"name": "a", "relator": [["x", 1]], "longitude": [], "colour": "red"},
])
def test_schema_errors(doc):
    with pytest.raises(SchemaError):
        parse_presentation(doc if isinstance(doc, str) else json.dumps(doc))


def test_resolve_specs(tmp_path):
    assert resolve_knot("builtin:5_2") == builtin_5_2()
    assert resolve_knot("twist:1").fraction == (3, 2)
    assert str(resolve_knot("two_bridge:3/1").relator_w) == "x y"
    f = tmp_path / "k.json"
    f.write_text(json.dumps(builtin_5_2().to_document()))
    assert resolve_knot(f"file:{f}") == builtin_5_2()
    with pytest.raises(SchemaError):
        resolve_knot("file:/nonexistent/knot.json")
    with pytest.raises(SchemaError):
        resolve_knot("mystery:1")
