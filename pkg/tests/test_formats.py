import json
import warnings
from fractions import Fraction
from pathlib import Path

import pytest

from towerlab.complexes import circle, lls_example, torus, validate, wedge_of_circles
from towerlab.formats import (
    FormatError,
    complex_from_dict,
    complex_to_dict,
    data_file,
    dump_complex,
    dump_tower,
    format_cell,
    format_word,
    load_complex,
    load_tower,
    parse_word,
    write_csv,
    write_json,
)
from towerlab.groups import FREE, GroupModelSpec, Tower, make_builtin_tower

FIXTURES = Path(__file__).parent / "fixtures"


def test_shipped_torus_fixture_is_builtin():
    assert load_complex(data_file("torus2.json")) == torus(2)
    for d in (1, 2, 3):
        assert load_complex(data_file(f"wedge{d}.json")) == wedge_of_circles(d)
    assert load_complex(data_file("circle.json")) == circle()
    assert load_complex(data_file("lls22.json")) == lls_example(2, 2)
    tower = load_tower(data_file("torus2_tower_p2.json"))
    assert tower.orders == [4, 16, 64]


def test_round_trip(tmp_path):
    for C in (torus(3), wedge_of_circles(2), lls_example(3, 5)):
        dump_complex(C, tmp_path / "c.json")
        assert load_complex(tmp_path / "c.json") == C
    T = make_builtin_tower(GroupModelSpec("heisenberg"), "heisenberg", 2, 2)
    dump_tower(T, tmp_path / "t.json")
    back = load_tower(tmp_path / "t.json")
    assert back == Tower(T.quotients, T.maps)


def test_words():
    F = GroupModelSpec(FREE, 3)
    g = parse_word(F, "g0 g0 g2^-1 g1")
    assert format_word(g) == "g0 g0 g2^-1 g1"
    assert parse_word(F, "").is_identity()
    assert parse_word(F, "g1^3") == parse_word(F, "g1 g1 g1")
    for bad in ("x1", "g3", "g0^0", "g0^"):
        with pytest.raises(ValueError):
            parse_word(F, bad)


def test_corrupted_fixture_loads_but_fails_validation():
    C = load_complex(FIXTURES / "corrupted_complex.json")
    rep = validate(C)
    assert not rep and rep.degree == 2


def test_malformed_fixture_names_entry():
    with pytest.raises(FormatError, match=r"boundaries\[1\]\[1\]\[0\]\[0\]"):
        load_complex(FIXTURES / "malformed_complex.json")


def test_non_regular_tower_names_level():
    with pytest.raises(FormatError, match="level 2"):
        load_tower(FIXTURES / "nonregular_tower.json")


def test_strict_and_lax_unknown_fields():
    doc = complex_to_dict(circle())
    doc["colour"] = "blue"
    with pytest.raises(FormatError, match="colour"):
        complex_from_dict(doc)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        assert complex_from_dict(doc, strict=False) == circle()
    assert any("colour" in str(w.message) for w in caught)


def test_schema_errors(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"format": 1,\n "group": {"kind": "free"},\n')
    with pytest.raises(FormatError, match="line"):
        load_complex(path)
    doc = complex_to_dict(wedge_of_circles(2))
    doc["ranks"] = [1, 3]
    with pytest.raises(FormatError, match="3 x 1"):
        complex_from_dict(doc)
    doc = complex_to_dict(circle())
    doc["format"] = 2
    path.write_text(json.dumps(doc))
    with pytest.raises(FormatError, match="version"):
        load_complex(path)
    with pytest.raises(FormatError, match="cannot read"):
        load_complex(tmp_path / "missing.json")


def test_exact_coefficients():
    doc = complex_to_dict(circle())
    doc["coefficients"] = "Q"
    doc["boundaries"]["1"][0][0][0]["coeff"] = "-1/2"
    C = complex_from_dict(doc)
    assert Fraction(-1, 2) in C.boundaries[1][0, 0].terms.values()
    doc["coefficients"] = "Z"
    with pytest.raises(FormatError):
        complex_from_dict(doc)
    big = complex_to_dict(circle())
    big["boundaries"]["1"][0][0][0]["coeff"] = str(10**40)
    assert 10**40 in complex_from_dict(big).boundaries[1][0, 0].terms.values()


def test_cells():
    assert format_cell(Fraction(5, 4)) == "5/4"
    assert format_cell(Fraction(2)) == "2/1"
    assert format_cell(1 / 3) == "0.333333333333"
    assert format_cell(float("-inf")) == "-inf"
    assert format_cell(None) == "" and format_cell(True) == "true"


def test_writers_are_atomic_and_exact(tmp_path):
    write_csv(tmp_path / "a.csv", ("x", "y"), [(1, Fraction(1, 3)), (2, 0.5)])
    assert (tmp_path / "a.csv").read_text() == "x,y\n1,1/3\n2,0.5\n"
    write_json(tmp_path / "sub" / "b.json", {"r": Fraction(3, 7), "v": [Fraction(1)]})
    assert json.loads((tmp_path / "sub" / "b.json").read_text()) == {"r": "3/7", "v": ["1/1"]}
    assert [p.name for p in tmp_path.rglob(".*")] == []
