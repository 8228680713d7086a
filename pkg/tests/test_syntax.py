import pytest

from sepkit.domain import NULL
from sepkit.syntax import (SKIP, ACmp, AExists, Assume, BFalse, BTrue, Choice, Const, Emp,
                           EmpVars, Free, Load, ParseError, PointsTo, Sep, Seq, Star, Var,
                           expand_emp_vars, free_vars, parse_assertion, parse_command,
                           parse_expr, show_assertion, show_command)


def test_seq_of_free_and_load():
    assert parse_command("free(x); x := [y]") == Seq(Free("x"), Load("x", "y"))


def test_choice_of_guarded_branches():
    c = parse_command("(false? ; x := [y]) + (true? ; true?)")
    assert c == Choice(Seq(Assume(BFalse()), Load("x", "y")),
                       Seq(Assume(BTrue()), Assume(BTrue())))


def test_load_needs_distinct_variables():
    with pytest.raises(ParseError):
        parse_command("x := [x]")
    with pytest.raises(ParseError):
        parse_command("[y] := y")


def test_precedence_and_associativity():
    assert parse_command("a := 1; b := 2 + c := 3") == \
        Seq(parse_command("a := 1"), Choice(parse_command("b := 2"), parse_command("c := 3")))
    assert parse_command("free(x)*; free(y)") == Seq(Star(Free("x")), Free("y"))
    assert parse_command("free(x); free(y); free(z)") == \
        Seq(Seq(Free("x"), Free("y")), Free("z"))


def test_skip_is_true_guard():
    assert parse_command("skip") == SKIP


def test_parse_error_has_position():
    with pytest.raises(ParseError) as e:
        parse_command("free(x) ;; free(y)")
    assert e.value.pos > 0


def test_assertions():
    assert parse_assertion("empX{x,y} * x |-> z'") == \
        Sep(EmpVars(("x", "y")), PointsTo(Var("x"), Var("z'")))
    assert parse_assertion("emp") == Emp()
    parse_assertion("x !-> * x |-> 1")
    assert parse_expr("null") == Const(NULL)


def test_underscore_is_anonymous_existential():
    a = parse_assertion("x |-> _")
    assert isinstance(a, AExists) and free_vars(a) == {"x"}


def test_free_vars():
    assert free_vars(parse_assertion("emp")) == frozenset()
    assert free_vars(parse_assertion("exists z'. x |-> z'")) == {"x"}
    assert free_vars(parse_assertion("empX{x}")) == {"x", "x'"}


def test_expand_emp_vars():
    assert expand_emp_vars(EmpVars(())) == Emp()
    assert show_assertion(expand_emp_vars(EmpVars(("x",)))) == "x = x' && emp"
    assert show_assertion(expand_emp_vars(EmpVars(("x", "y")))) == "x = x' && y = y' && emp"


def test_comparison_ops():
    assert parse_assertion("x <= 1 && emp").left == ACmp("<=", Var("x"), Const(1))
    for op in ("=", "!=", "<", "<="):
        a = parse_assertion(f"x {op} y")
        assert show_assertion(a) == f"x {op} y"


@pytest.mark.parametrize("text", [
    "x := alloc()", "free(x)", "y := [x]", "[x] := y", "x := y + 1 - z", "error()",
    "(x = y && !(y < 1))?", "(free(x) + y := alloc())*; error()",
])
def test_command_round_trip(text):
    c = parse_command(text)
    assert parse_command(show_command(c)) == c


@pytest.mark.parametrize("text", [
    "exists z'. empX{x,y} * x |-> z' && x = 1 || y #->",
    "(x |-> 1 || y !->) * true", "x' != y' && emp * (x' |-> _)", "false || true",
])
def test_assertion_round_trip(text):
    a = parse_assertion(text)
    assert parse_assertion(show_assertion(a)) == a
