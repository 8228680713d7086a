import pytest

from sepkit.assertions import eval_assertion
from sepkit.closures import (BACKWARD_OVER, BACKWARD_UNDER, FORWARD_OVER, FORWARD_UNDER,
                             FORWARD_UNDER_ER, KindMismatch, NotUniversalFrame, Pools, Rejected,
                             SemTriple, apply_cons, apply_disj, apply_exists, apply_frame,
                             check_normalization, disj_tracking_holds, is_valid)
from sepkit.domain import MemorySet, TaggedMemorySet
from sepkit.semantics import SemanticsKind, run_backward, run_forward
from sepkit.syntax import parse_assertion as A, parse_command as C


def ev(text, cfg):
    return eval_assertion(A(text), cfg)


def fw_over(pre, cmd, cfg):
    P = ev(pre, cfg)
    c = C(cmd)
    return SemTriple(P, c, run_forward(c, P, SemanticsKind.FORWARD_SL).without_abort(),
                     FORWARD_OVER)


def test_empty_rows(cfg):
    e = MemorySet.empty(cfg)
    assert is_valid(SemTriple(e, C("free(x)"), e, FORWARD_OVER))
    assert is_valid(SemTriple(ev("emp", cfg), C("free(x)"), e, FORWARD_UNDER))
    assert is_valid(SemTriple(ev("emp", cfg), C("free(x)"), TaggedMemorySet.of_ok(e),
                              FORWARD_UNDER_ER))


def test_paper_isl_triple_is_valid(cfg2):
    t = SemTriple(ev("y |-> z'", cfg2), C("x := alloc(); free(y); x := [y]"),
                  TaggedMemorySet(MemorySet.empty(cfg2), ev("y !-> * x |-> _", cfg2)),
                  FORWARD_UNDER_ER)
    assert is_valid(t)


def test_abort_breaks_forward_over(cfg):
    t = SemTriple(ev("emp", cfg), C("free(x)"), ev("true", cfg), FORWARD_OVER)
    assert not is_valid(t)


def test_exists_preserves_validity(cfg):
    t = fw_over("x |-> z'", "free(x)", cfg)
    assert apply_exists(t, ()) == t
    t2 = apply_exists(t, ["z'"])
    assert is_valid(t2) and t2.pre == ev("x |-> _", cfg)
    with pytest.raises(ValueError):
        apply_exists(t, ["x"])


def test_frame(cfg):
    t = fw_over("x = x' && emp * x |-> 0", "free(x)", cfg)
    assert apply_frame(t, ev("emp", cfg)) == t
    bad = apply_frame(t, ev("x' |-> w'", cfg))
    assert isinstance(bad, Rejected)
    ok = apply_frame(t, ev("(x' != w' && emp) * w' |-> 1", cfg))
    assert is_valid(ok)
    with pytest.raises(NotUniversalFrame):
        apply_frame(t, ev("y |-> 1", cfg))


def test_backward_frame_checks_post(cfg):
    Q = ev("emp", cfg)
    t = SemTriple(run_backward(C("free(x)"), Q), C("free(x)"), Q, BACKWARD_OVER)
    assert not isinstance(apply_frame(t, ev("x' |-> w'", cfg)), Rejected)


def test_cons(cfg):
    t = fw_over("x |-> 0", "free(x)", cfg)
    assert apply_cons(t, t.pre, t.post) == t
    assert is_valid(apply_cons(t, t.pre, ev("true", cfg)))
    u = SemTriple(t.pre, t.cmd, ev("emp && x = 1", cfg), FORWARD_UNDER)
    assert isinstance(apply_cons(u, u.pre, ev("emp", cfg)), Rejected)
    shrink = apply_cons(t, ev("x = 1 && x |-> 0", cfg), t.post)
    assert isinstance(shrink, Rejected)
    assert not isinstance(apply_cons(t, ev("x = 1 && x |-> 0", cfg), t.post, allow_cons2=True),
                          Rejected)


def test_disj(cfg):
    a = fw_over("x |-> 0", "free(x)", cfg)
    b = fw_over("x |-> 1", "free(x)", cfg)
    assert apply_disj([a]) == a
    assert is_valid(apply_disj([a, b]))
    with pytest.raises(KindMismatch):
        apply_disj([a, fw_over("x |-> 0", "x := 1", cfg)])
    assert disj_tracking_holds([a, b])


def test_backward_under_disj_tracking(cfg):
    Q1, Q2 = ev("emp", cfg), ev("x |-> 1", cfg)
    c = C("free(x) + y := x")
    ts = [SemTriple(run_backward(c, Q), c, Q, BACKWARD_UNDER) for Q in (Q1, Q2)]
    assert disj_tracking_holds(ts)


def test_normalization_zero_steps(small):
    t = fw_over("x |-> 0", "free(x)", small)
    rep = check_normalization([t], Pools(k=0))
    assert rep.cases == 1 and not rep.failures


def test_normalization_on_assign_and_free(small):
    pools = Pools(frames=(ev("z' |-> w'", small),), exists=(("z'",),),
                  cons=(ev("emp", small),), k=3)
    seeds = [fw_over("x = x' && emp", "x := x + 1", small),
             fw_over("x = x' && y = y' && emp * x |-> z'", "free(x)", small)]
    rep = check_normalization(seeds, pools)
    assert rep.cases > 20 and not rep.failures
