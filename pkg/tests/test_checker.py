import inspect

import pytest

from sepkit import checker
from sepkit.axioms import UnknownRule
from sepkit.checker import (CheckerOptions, LogicId, RuleShapeMismatch,
                            SideConditionFailed, check_derivation, check_rule, match_axiom,
                            parse_triple, triple_valid)
from sepkit.drvfile import parse_derivation
from sepkit.harness import fixture_text
from sepkit.syntax import parse_assertion as A

SL1, ISL1, ISL2 = LogicId("sl+", 1), LogicId("isl+", 1), LogicId("isl+", 2)
NC1, SIL1 = LogicId("nc+", 1), LogicId("sil+", 1)


def drv(text, logic=None):
    d, lg = parse_derivation(text)
    return d, logic or lg


def test_logic_ids():
    assert LogicId.parse("ISL+2") == ISL2
    assert str(NC1) == "nc+1"
    with pytest.raises(ValueError):
        LogicId.parse("sl+3")


def test_parse_triple_tags():
    t = parse_triple("{emp} error() [er]{emp}")
    assert t.outcome == "er"
    t = parse_triple("{x |-> _} free(x) {emp}")
    assert t.outcome is None and t.post == A("emp")
    t = parse_triple("{empX{x}} x := 1 {empX{x} && x = 1}")
    assert t.pre == A("empX{x}")


def test_match_free_axiom(cfg):
    t = parse_triple("{empX{x,y} * x |-> z'} free(x) {empX{x,y}}")
    assert match_axiom(t, SL1, "Free", {"x": "x", "z": "z'"}, cfg)
    assert not match_axiom(t, SL1, "Free", {"x": "x", "z": "w'"}, cfg)
    assert not match_axiom(parse_triple("{x |-> _} free(x) {emp}"), SL1, "Free", {"z": "z'"}, cfg)


def test_match_load_er3(cfg2):
    t = parse_triple("{empX{x,y} * y !->} x := [y] [er]{empX{x,y} * y !->}")
    assert match_axiom(t, ISL2, "LoadEr3", {}, cfg2)
    ok = parse_triple("{empX{x,y} * y !->} x := [y] [ok]{empX{x,y} * y !->}")
    assert not match_axiom(ok, ISL2, "LoadEr3", {}, cfg2)


def test_model_filtered_rules(cfg):
    t = parse_triple("{empX{x,y} * y !->} x := [y] [er]{empX{x,y} * y !->}")
    with pytest.raises(UnknownRule):
        match_axiom(t, ISL1, "LoadEr3", {}, cfg)


def test_frame_side_condition(cfg):
    d, _ = drv('''(rule Frame :conclusion "{empX{x,y} * x |-> 0 * x' |-> _} free(x) {empX{x,y} * x' |-> _}"
                    :frame "x' |-> _"
                    (premise Free :conclusion "{empX{x,y} * x |-> 0} free(x) {empX{x,y}}"))''')
    with pytest.raises(SideConditionFailed):
        check_rule(d, SL1, cfg)


def test_cons_weakening_post(cfg):
    d, _ = drv('''(rule Cons :conclusion "{empX{x,y} * x |-> 0} free(x) {true}"
                    (premise Free :conclusion "{empX{x,y} * x |-> 0} free(x) {empX{x,y}}"))''')
    assert check_derivation(d, SL1, cfg)


def test_nc_cons_directions(cfg):
    good, _ = drv('''(rule Cons :conclusion "{(exists z'. empX{x,y} * x |-> z') || x = 0 && emp} free(x) {empX{x,y}}"
        (premise Free1 :conclusion "{exists z'. empX{x,y} * x |-> z'} free(x) {empX{x,y}}"))''')
    bad, _ = drv('''(rule Cons :conclusion "{empX{x,y} * x |-> 0} free(x) {empX{x,y}}"
        (premise Free1 :conclusion "{exists z'. empX{x,y} * x |-> z'} free(x) {empX{x,y}}"))''')
    assert check_derivation(good, NC1, cfg)
    v = check_derivation(bad, NC1, cfg)
    assert not v and v.error == "SideConditionFailed"


def test_rule_shape_mismatch(cfg):
    d, _ = drv('''(rule Seq :conclusion "{empX{x,y} * x |-> 0} free(x) {empX{x,y}}"
                    (premise Free :conclusion "{empX{x,y} * x |-> 0} free(x) {empX{x,y}}"))''')
    with pytest.raises(RuleShapeMismatch):
        check_rule(d, SL1, cfg)


def test_unknown_rule_is_rejected(cfg):
    d, _ = drv('(rule Magic :conclusion "{emp} free(x) {emp}")')
    v = check_derivation(d, SL1, cfg)
    assert not v and v.path == ()


def test_exists_needs_logical_variables(cfg):
    d, _ = drv('''(rule Exists :exists "x" :conclusion "{exists x. empX{x,y} * x |-> 0} free(x) {exists x. empX{x,y}}"
                    (premise Free :conclusion "{empX{x,y} * x |-> 0} free(x) {empX{x,y}}"))''')
    assert not check_derivation(d, SL1, cfg)


def test_isl_needs_tags(cfg):
    d, _ = drv('(rule Error :conclusion "{empX{x,y}} error() {empX{x,y}}")')
    assert not check_derivation(d, ISL1, cfg)
    d, _ = drv('(rule Error :conclusion "{empX{x,y}} error() [er]{empX{x,y}}")')
    assert check_derivation(d, ISL1, cfg)


def test_seq_er_short_circuits(cfg):
    d, _ = drv('''(rule SeqEr :conclusion "{empX{x,y}} error(); free(x) [er]{empX{x,y}}"
                    (premise Error :conclusion "{empX{x,y}} error() [er]{empX{x,y}}"))''')
    assert check_derivation(d, ISL1, cfg)
    assert not check_derivation(d, SL1, cfg)


def test_empty_rule_per_logic(cfg):
    sl, _ = drv('(rule Empty :conclusion "{false} free(x) {x |-> 1}")')
    nc, _ = drv('(rule Empty :conclusion "{emp} free(x) {false}")')
    assert check_derivation(sl, SL1, cfg) and check_derivation(sl, SIL1, cfg)
    assert check_derivation(nc, NC1, cfg) and not check_derivation(nc, SL1, cfg)


def test_choice_is_modulo_associativity(cfg):
    d, _ = drv('''(rule Choice :conclusion "{empX{x,y}} error() + (x := 1 + x := 2) [er]{empX{x,y}}"
        (premise Error :conclusion "{empX{x,y}} error() [er]{empX{x,y}}")
        (premise Empty :conclusion "{empX{x,y}} x := 1 [er]{false}")
        (premise Empty :conclusion "{empX{x,y}} x := 2 [er]{false}"))''')
    v = check_derivation(d, ISL1, cfg)
    assert v, str(v)


@pytest.mark.parametrize("name,logic,accepted", [
    ("sl_more_expressive", "sl+1", True),
    ("isl_more_expressive", "isl+2", True),
    ("isl_paper_frames", "isl+2", False),
    ("wrong_frame", "isl+1", False),
])
def test_fixtures(name, logic, accepted, cfg):
    lid = LogicId.parse(logic)
    d, file_logic = parse_derivation(fixture_text(name))
    assert file_logic == lid
    c = cfg.with_model(lid.model)
    v = check_derivation(d, lid, c)
    assert bool(v) is accepted, str(v)
    if accepted:
        assert triple_valid(d.conclusion, lid, c)
    else:
        assert v.error == "SideConditionFailed"
        assert "heap-compatible" in v.reason


def test_wrong_frame_fixture_root_is_invalid(cfg):
    d, lid = parse_derivation(fixture_text("wrong_frame"))
    assert not triple_valid(d.conclusion, lid, cfg)
    v = check_derivation(d, lid, cfg, CheckerOptions(frame_compat=False))
    assert v


def test_no_modifies_predicate():
    src = inspect.getsource(checker).lower()
    assert "mod(" not in src and "modifies" not in src
