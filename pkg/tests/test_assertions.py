import pytest

from sepkit.assertions import (eval_assertion, heap_compat_logical, heap_compat_semantic,
                               implies, is_universal_frame, to_dnf)
from sepkit.domain import DomainConfig, MemorySet, ModelMismatch
from sepkit.syntax import parse_assertion as A, show_assertion


def ev(text, cfg):
    return eval_assertion(A(text), cfg)


def test_basic_denotations(cfg):
    assert ev("false", cfg).is_empty()
    emp = ev("emp", cfg)
    for m in emp.memories(("x", "y")):
        assert m.heap.as_dict() == {}
    assert emp.count() == 1
    assert ev("x #-> * x |-> 1", cfg).is_empty()


def test_points_to_needs_location(cfg):
    S = ev("x |-> 1", cfg)
    assert {m.store["x"] for m in S.memories(("x",))} == {1, 2}


def test_dealloc_assertion_needs_model_two(cfg, cfg2):
    with pytest.raises(ModelMismatch):
        ev("x !->", cfg)
    assert not ev("x !->", cfg2).is_empty()
    assert not ev("x #->", cfg).is_empty()


def test_empx_macro_matches_expansion(cfg):
    assert ev("empX{x,y}", cfg) == ev("x = x' && y = y' && emp", cfg)


def test_null_comparisons(cfg):
    assert ev("null = null && emp", cfg) == ev("emp", cfg)
    assert ev("null < 1", cfg).is_empty()
    assert ev("x + 1 = null && emp", cfg) == ev("x = null && emp", cfg)


def test_dnf_distributes(cfg):
    d = to_dnf(A("(x |-> 1 || y |-> 1) * z' |-> 0"), cfg)
    assert eval_assertion(d.assertion(), cfg) == ev("(x |-> 1 || y |-> 1) * z' |-> 0", cfg)


def test_dnf_of_empx_has_one_disjunct(cfg):
    d = to_dnf(A("empX{x}"), cfg)
    assert len(d.disjuncts) == 1
    assert show_assertion(d.assertion()) == "x = x' && emp"


def test_dnf_expands_existentials():
    small = DomainConfig(values=(0, 1), locations=(1,))
    d = to_dnf(A("exists z'. x |-> z'"), small)
    # null is a value of the finite domain, so it shows up as a third disjunct
    assert show_assertion(d.assertion()) == "x |-> 0 || x |-> 1 || x |-> null"


def test_implies(cfg):
    assert implies(A("false"), A("x |-> 1"), cfg)
    assert implies(A("x |-> 1"), A("exists z'. x |-> z'"), cfg)
    assert not implies(A("x |-> _"), A("x |-> 1"), cfg)


def test_universal_frames(cfg):
    assert is_universal_frame(A("z' = 1 && emp"), cfg)
    assert not is_universal_frame(A("x |-> z'"), cfg)
    closed = A("exists x. x = 1 && true")
    assert is_universal_frame(closed, cfg)
    assert is_universal_frame(closed, cfg, semantic=True)
    assert not is_universal_frame(A("x = 1 && true"), cfg, semantic=True)


def test_semantic_compat(cfg):
    assert heap_compat_semantic(MemorySet.empty(cfg), ev("true", cfg))
    assert not heap_compat_semantic(ev("x |-> 1", cfg), ev("x |-> 1", cfg))
    assert not heap_compat_semantic(ev("x |-> 1", cfg), ev("z' |-> 2", cfg))


@pytest.mark.parametrize("a,b,want", [
    ("emp", "x |-> _", True),
    ("x |-> _", "x |-> _", False),
    ("x |-> 1", "z' |-> 2", False),
    ("empX{x,y} * y |-> z'", "(x' != y' && emp) * x' |-> w'", True),
    ("empX{x,y} * y |-> z'", "(x' = y' && emp) * x' |-> w'", False),
])
def test_logical_compat(cfg, a, b, want):
    assert heap_compat_logical(A(a), A(b), cfg) is want
    assert heap_compat_semantic(ev(a, cfg), ev(b, cfg)) is want
