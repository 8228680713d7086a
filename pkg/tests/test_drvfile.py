import pytest

from sepkit.checker import LogicId
from sepkit.drvfile import (DrvSyntaxError, Sym, dump_derivation, parse_derivation,
                            parse_derivations, read_sexprs)
from sepkit.harness import FIXTURES, fixture_text


def test_reader():
    forms = read_sexprs('(a "b c" (d . "e")) ; trailing comment\n(f)')
    assert forms == [[Sym("a"), "b c", [Sym("d"), Sym("."), "e"]], [Sym("f")]]


@pytest.mark.parametrize("text", ["(rule", "rule)", '(rule Free)', '(foo Free :conclusion "{emp} free(x) {emp}")',
                                  '(rule Free :conclusion "{emp} free(x {emp}")',
                                  '(rule Free :logic sl+9 :conclusion "{emp} free(x) {emp}")'])
def test_syntax_errors(text):
    with pytest.raises(DrvSyntaxError):
        parse_derivation(text)


def test_side_data():
    d, lg = parse_derivation('''(rule Exists :logic nc+2 :exists "x' y'"
        :conclusion "{emp} free(x) {emp}" :subst ((x . "x") (z . "z'")))''')
    assert lg == LogicId("nc+", 2)
    assert d.exists == ("x'", "y'")
    assert d.subst == {"x": "x", "z": "z'"}


def test_premise_synonym():
    d, _ = parse_derivation('''(rule Seq :conclusion "{emp} free(x); free(y) {emp}"
        (premise A :conclusion "{emp} free(x) {emp}") (rule B :conclusion "{emp} free(y) {emp}"))''')
    assert [p.rule for p in d.premises] == ["A", "B"]


@pytest.mark.parametrize("name", FIXTURES)
def test_dump_round_trip(name):
    d, lg = parse_derivation(fixture_text(name))
    again = parse_derivations(dump_derivation(d, lg))
    assert again == [(d, lg)]
