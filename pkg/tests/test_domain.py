import itertools

import pytest

from sepkit.assertions import eval_assertion
from sepkit.domain import (DEALLOC, NULL, RESERVED, DomainConfig, Heap, Memory, MemorySet,
                           NotDisjoint, Store, exists_lift, heap_disjoint, heap_join, set_join)
from sepkit.syntax import parse_assertion


def ev(text, cfg):
    return eval_assertion(parse_assertion(text), cfg)


def test_config_invariants():
    with pytest.raises(ValueError):
        DomainConfig(locations=(5,))
    with pytest.raises(ValueError):
        DomainConfig(program_vars=("x'",))
    with pytest.raises(ValueError):
        DomainConfig(model=3)
    c = DomainConfig(logical_vars=("z'",))
    assert "x'" in c.logical_vars and "y'" in c.logical_vars


def test_value_coding_round_trip(cfg):
    for v in cfg.all_values:
        assert cfg.decode_value(cfg.encode_value(v)) == v
    assert cfg.encode_value(NULL) == cfg.null_code


def test_heap_coding_round_trip(cfg2):
    for i in range(cfg2.H):
        assert cfg2.encode_heap(cfg2.decode_heap(i)) == i


def test_heap_disjoint():
    assert heap_disjoint(Heap(), Heap.of({1: 3}))
    assert not heap_disjoint(Heap.of({1: 3}), Heap.of({1: 5}))
    assert not heap_disjoint(Heap.of({1: DEALLOC}), Heap.of({1: 4}))
    assert not heap_disjoint(Heap.of({1: RESERVED}), Heap.of({1: 0}))


def test_heap_join():
    h = Heap.of({2: 1})
    assert heap_join(Heap(), h) == h
    assert heap_join(Heap.of({1: 3}), Heap.of({2: DEALLOC})) == Heap.of({1: 3, 2: DEALLOC})
    with pytest.raises(NotDisjoint):
        heap_join(Heap.of({1: 3}), Heap.of({1: 3}))


def test_heap_join_laws():
    cells = [None, 0, DEALLOC]
    heaps = [Heap.of({l: c for l, c in zip((1, 2, 3), cs) if c is not None})
             for cs in itertools.product(cells, repeat=3)]
    for a, b in itertools.product(heaps, repeat=2):
        if heap_disjoint(a, b):
            assert heap_join(a, b) == heap_join(b, a)
        for c in heaps:
            if heap_disjoint(a, b) and heap_disjoint(heap_join(a, b), c):
                assert heap_join(heap_join(a, b), c) == heap_join(a, heap_join(b, c))


def test_set_join_examples(cfg):
    P = ev("x |-> 1", cfg)
    assert set_join(MemorySet.empty(cfg), P).is_empty()
    assert set_join(P, ev("emp", cfg)) == P
    assert set_join(P, P).is_empty()


def test_set_join_matches_pairwise_enumeration(small):
    P, Q = ev("x |-> _ || emp", small), ev("y |-> 0 || y = 1 && emp", small)
    got = set(set_join(P, Q).memories(("x", "y")))
    want = set()
    for p in P.memories(("x", "y")):
        for q in Q.memories(("x", "y")):
            if p.store == q.store and heap_disjoint(p.heap, q.heap):
                want.add(Memory(p.store, heap_join(p.heap, q.heap)))
    assert got == want


def test_exists_lift(cfg):
    P = ev("x' = 1 && emp", cfg)
    assert exists_lift((), P) == P
    lifted = exists_lift(["x'"], P)
    assert lifted == ev("emp", cfg)
    Q = exists_lift(["x"], ev("x |-> 1", cfg))
    for m in Q.memories(("x",)):
        assert m.heap.as_dict() in ({1: 1}, {2: 1})
    assert Q == ev("exists z'. z' |-> 1", cfg)


def test_exists_is_closure(small):
    P = ev("x |-> z' && z' = 0 || y = 1 && emp", small)
    X = ["z'"]
    assert P <= exists_lift(X, P)
    assert exists_lift(X, exists_lift(X, P)) == exists_lift(X, P)
    Q = P | ev("emp", small)
    assert exists_lift(X, P) <= exists_lift(X, Q)


def test_model_constraints_on_outputs(cfg):
    S = ev("true", cfg)
    for m in S.memories(("x",)):
        assert DEALLOC not in m.heap.as_dict().values()
    no_res = DomainConfig(reserved_enabled=False)
    for m in ev("true", no_res).memories(("x",)):
        assert RESERVED not in m.heap.as_dict().values()


def test_memory_set_membership(cfg):
    m = Memory(Store.of({"x": 1}), Heap.of({1: 2}))
    S = MemorySet.from_memories(cfg, [m])
    assert m in S
    assert S.count() == 1
    assert S.extend(["y"]).count() == cfg.V
    assert S == S.extend(["y"])
