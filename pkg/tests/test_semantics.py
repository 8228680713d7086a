import numpy as np

from sepkit import reference
from sepkit.assertions import eval_assertion
from sepkit.domain import DEALLOC, Heap, Memory, Store, TaggedMemorySet
from sepkit.semantics import (SemanticsKind, run_backward, run_forward, step_atomic_isl,
                              step_atomic_sl)
from sepkit.syntax import parse_assertion as A, parse_command as C

SL, ISL = SemanticsKind.FORWARD_SL, SemanticsKind.FORWARD_ISL


def ev(text, cfg):
    return eval_assertion(A(text), cfg)


def mem(heap, **store):
    store = {"x": 0, "y": 0, **store}
    return Memory(Store.of(store), Heap.of(heap))


def test_free_model_one(cfg):
    out = step_atomic_sl(C("free(x)"), mem({1: 2}, x=1), cfg)
    assert set(out.memories(("x", "y"))) == {mem({}, x=1)} and not out.abort


def test_free_without_cell_aborts(cfg):
    out = step_atomic_sl(C("free(x)"), mem({}, x=1), cfg)
    assert out.abort and out.count() == 0


def test_free_model_two_writes_dealloc(cfg2):
    out = step_atomic_sl(C("free(x)"), mem({1: 2}, x=1), cfg2)
    assert set(out.memories(("x", "y"))) == {mem({1: DEALLOC}, x=1)}


def test_load_from_dealloc_is_an_error(cfg2):
    m = mem({1: DEALLOC}, x=0, y=1)
    out = step_atomic_isl(C("x := [y]"), ("ok", m), cfg2)
    assert out.ok.is_empty()
    assert set(out.er.memories(("x", "y"))) == {m}


def test_error_command(cfg):
    m = mem({}, x=0)
    out = step_atomic_isl(C("error()"), ("ok", m), cfg)
    assert set(out.er.memories(("x", "y"))) == {m} and out.ok.is_empty()
    assert step_atomic_sl(C("error()"), m, cfg).abort


def test_er_states_propagate(cfg):
    m = mem({}, x=0)
    out = step_atomic_isl(C("x := alloc()"), ("er", m), cfg)
    assert set(out.er.memories(("x", "y"))) == {m} and out.ok.is_empty()


def test_alloc_reuses_dealloc_cells(cfg2):
    out = step_atomic_sl(C("x := alloc()"), mem({1: DEALLOC, 2: 0}, x=0), cfg2)
    heaps = {(m.store["x"], m.heap) for m in out.memories(("x", "y"))}
    assert {(1, Heap.of({1: v, 2: 0})) for v in cfg2.all_values} <= heaps
    assert all(x == 1 for x, _ in heaps)


def test_alloc_never_targets_reserved(cfg):
    from sepkit.domain import RESERVED
    out = step_atomic_sl(C("x := alloc()"), mem({1: RESERVED}, x=0), cfg)
    assert {m.store["x"] for m in out.memories(("x", "y"))} == {2}


def test_skip_and_choice(cfg):
    P = ev("x |-> 1 || emp", cfg)
    assert run_forward(C("skip"), P, SL) == P
    a, b = C("free(x)"), C("x := 0")
    both = run_forward(C("free(x) + x := 0"), P, SL)
    assert both == run_forward(a, P, SL) | run_forward(b, P, SL)


def test_paper_program_reaches_error_states(cfg2):
    P = ev("y |-> z'", cfg2)
    out = run_forward(C("x := alloc(); free(y); x := [y]"), P, ISL)
    want = ev("y !-> * x |-> _", cfg2)
    assert not (out.er & want).is_empty()
    assert out.er <= ev("y !-> * x |-> _", cfg2)


def test_backward_basics(cfg):
    Q = ev("x |-> 1 || y = 0 && emp", cfg)
    assert run_backward(C("skip"), Q) == Q
    assert run_backward(C("false?"), Q).is_empty()


def test_backward_free(cfg):
    got = run_backward(C("free(x)"), ev("emp", cfg))
    assert got == ev("exists z'. x |-> z'", cfg)


def test_star_is_reflexive_transitive(cfg):
    P = ev("x = 0 && emp", cfg)
    out = run_forward(C("(x := x + 1)*"), P, SL)
    assert out == ev("x != null && emp", cfg)


def test_sequencing_law(cfg):
    P = ev("x |-> _ || y |-> 1", cfg)
    r1, r2 = C("y := [x]"), C("free(x)")
    mid = run_forward(r1, P, SL)
    end = run_forward(r2, mid.without_abort(), SL)
    whole = run_forward(C("y := [x]; free(x)"), P, SL)
    assert whole.without_abort() == end.without_abort()
    assert whole.abort == (mid.abort or end.abort)


def test_isl_sequencing_splits_errors(cfg):
    P = TaggedMemorySet.of_ok(ev("x |-> _ || emp", cfg))
    r1, r2 = C("free(x)"), C("y := [x]")
    mid = run_forward(r1, P, ISL)
    end = run_forward(r2, TaggedMemorySet(mid.ok, mid.er), ISL)
    assert run_forward(C("free(x); y := [x]"), P, ISL) == end


def test_backward_agrees_with_pair_oracle(cfg):
    U = reference.Universe.build(cfg, ("x", "y"))
    Q = ev("x |-> y * true", cfg)
    target = np.array([m in Q for m in (Memory(Store.of(s), Heap.of(h)) for s, h in U.states)])
    for text in ("x := alloc(); [x] := y", "(free(x) + y := [x])*", "error() + x := y"):
        r = C(text)
        got = run_backward(r, Q)
        want = reference.preimage(r, U, target)
        have = np.array([Memory(Store.of(s), Heap.of(h)) in got for s, h in U.states])
        assert np.array_equal(have, want), text
