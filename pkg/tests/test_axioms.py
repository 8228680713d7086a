import pytest

from sepkit.axioms import (CATALOGUES, REPAIRED_NAMES, UnknownRule, get_schema, instances,
                           instantiate, schemas)
from sepkit.checker import LogicalTriple, LogicId, triple_valid
from sepkit.domain import DomainConfig
from sepkit.harness import suite_axiom_soundness
from sepkit.syntax import show_assertion

LITERAL_FAILURES = {
    "isl+1/Free1", "nc+1/Alloc", "nc+1/Free1", "nc+1/Store", "nc+2/Alloc", "nc+2/Alloc2",
    "nc+2/Free2", "nc+2/Store", "sl+1/Alloc", "sl+2/Alloc", "sl+2/Alloc2",
}


def _triple(inst, logic):
    return LogicalTriple(inst.pre, inst.cmd, inst.post,
                         inst.outcome if logic.logic == "isl+" else None)


def test_free_instance_text(cfg):
    inst = instantiate(get_schema("sl+", 1, "Free"), {"x": "x", "z": "z'"}, cfg)
    assert show_assertion(inst.pre) == "empX{x,y} * x |-> z'"
    assert show_assertion(inst.post) == "empX{x,y}"


def test_model_filtering():
    names1 = {s.name for s in schemas("isl+", 1)}
    names2 = {s.name for s in schemas("isl+", 2)}
    assert "LoadEr3" in names2 and "LoadEr3" not in names1
    assert "Free1" in names1 and "Free2" in names2
    assert "LoadEr2" in names1 and "LoadEr2" in names2


def test_unknown_rule():
    with pytest.raises(UnknownRule):
        get_schema("sl+", 1, "Teleport")


def test_instantiate_validation(cfg):
    s = get_schema("sl+", 1, "Load")
    with pytest.raises(ValueError):
        instantiate(s, {"x": "x", "y": "x", "z": "z'"}, cfg)
    with pytest.raises(ValueError):
        instantiate(s, {"x": "x", "z": "z'"}, cfg)


def test_bound_value_avoids_program_mirrors():
    c = DomainConfig(program_vars=("x", "y", "z"), values=(0, 1), locations=(1,))
    inst = instantiate(get_schema("sl+", 1, "Alloc"), {"x": "x"}, c)
    assert "z'" not in show_assertion(inst.post).split("exists ")[1].split(".")[0]


def test_instances_skip_aliasing(cfg):
    for inst in instances(get_schema("isl+", 1, "Load"), cfg):
        d = dict(inst.subst)
        assert d["x"] != d["y"]


@pytest.mark.parametrize("logic", ["sl+1", "sl+2", "isl+1", "isl+2", "sil+1", "sil+2",
                                   "nc+1", "nc+2"])
def test_repaired_catalogue_is_sound(cfg, logic):
    lid = LogicId.parse(logic)
    assert suite_axiom_soundness(lid, cfg).ok


def test_literal_catalogue_failures_are_pinned(cfg):
    rep = suite_axiom_soundness(None, cfg, catalogue="literal")
    failing = {"/".join(f.case.split("/")[:2]) for f in rep.failures}
    assert failing == LITERAL_FAILURES


def test_repairs_cover_exactly_the_failing_schemas():
    names = {f"{lg}/{n}" for lg, n in REPAIRED_NAMES}
    assert {f.split("/")[0][:-1] + "/" + f.split("/")[1] for f in LITERAL_FAILURES} == names


def test_isl_free_literal_counterexample(cfg):
    # the literal post {emp} also covers stores where x is no location
    lid = LogicId("isl+", 1)
    lit = instantiate(get_schema("isl+", 1, "Free1", "literal"), {"x": "x", "z": "0"}, cfg)
    rep = instantiate(get_schema("isl+", 1, "Free1"), {"x": "x", "z": "0"}, cfg)
    assert not triple_valid(_triple(lit, lid), lid, cfg)
    assert triple_valid(_triple(rep, lid), lid, cfg)


def test_sl_alloc_literal_counterexample(cfg):
    # a fixed value z' cannot over-approximate an arbitrary fresh cell
    lid = LogicId("sl+", 1)
    lit = instantiate(get_schema("sl+", 1, "Alloc", "literal"), {"x": "x", "z": "0"}, cfg)
    assert not triple_valid(_triple(lit, lid), lid, cfg)


def test_overrides_replace_fields():
    s = get_schema("sl+", 1, "Free", overrides={("sl+", "Free"): {"post": "{EMP} * {x} |-> {z}"}})
    assert s.post == "{EMP} * {x} |-> {z}"
    assert set(CATALOGUES) == {"literal", "repaired"}
