"""Commands, expressions and assertions: ASTs, parsing and printing.

ASCII syntax.  Assertions: ``&&`` binds tighter than ``*``, which binds
tighter than ``||``; ``exists a', b'. P`` extends as far right as possible.
Points-to is ``x |-> e`` (``x |-> _`` for an anonymous value), ``x !->`` is a
deallocated cell, ``x #->`` a reserved cell, and ``empX{x,y}`` is the
``emp_X`` macro.  Commands: ``;`` is loosest, then ``+``, then postfix ``*``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Union

from .domain import NULL, is_logical_name, mirror


class ParseError(ValueError):
    def __init__(self, msg: str, pos: int, text: str = ""):
        super().__init__(f"{msg} at position {pos}" + (f": {text!r}" if text else ""))
        self.pos = pos


# ---------------------------------------------------------------- expressions

@dataclass(frozen=True)
class Const:
    value: object  # int or NULL


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Add:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Sub:
    left: "Expr"
    right: "Expr"


Expr = Union[Const, Var, Add, Sub]

CMP_OPS = ("=", "!=", "<", "<=")


@dataclass(frozen=True)
class BTrue:
    pass


@dataclass(frozen=True)
class BFalse:
    pass


@dataclass(frozen=True)
class Cmp:
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class BAnd:
    left: "BoolExpr"
    right: "BoolExpr"


@dataclass(frozen=True)
class BOr:
    left: "BoolExpr"
    right: "BoolExpr"


@dataclass(frozen=True)
class BNot:
    arg: "BoolExpr"


BoolExpr = Union[BTrue, BFalse, Cmp, BAnd, BOr, BNot]

# ------------------------------------------------------------------ commands


@dataclass(frozen=True)
class Assume:
    cond: BoolExpr


@dataclass(frozen=True)
class Error:
    pass


@dataclass(frozen=True)
class Assign:
    var: str
    expr: Expr


@dataclass(frozen=True)
class Alloc:
    var: str


@dataclass(frozen=True)
class Free:
    var: str


@dataclass(frozen=True)
class Load:
    var: str
    addr: str

    def __post_init__(self):
        if self.var == self.addr:
            raise ValueError("load needs distinct variables")


@dataclass(frozen=True)
class StoreCmd:
    addr: str
    var: str

    def __post_init__(self):
        if self.var == self.addr:
            raise ValueError("store needs distinct variables")


@dataclass(frozen=True)
class Seq:
    first: "Command"
    second: "Command"


@dataclass(frozen=True)
class Choice:
    left: "Command"
    right: "Command"


@dataclass(frozen=True)
class Star:
    body: "Command"


Command = Union[Assume, Error, Assign, Alloc, Free, Load, StoreCmd, Seq, Choice, Star]
ATOMIC = (Assume, Error, Assign, Alloc, Free, Load, StoreCmd)

SKIP = Assume(BTrue())

# ---------------------------------------------------------------- assertions


@dataclass(frozen=True)
class AFalse:
    pass


@dataclass(frozen=True)
class ATrue:
    pass


@dataclass(frozen=True)
class ACmp:
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class AAnd:
    left: "Assertion"
    right: "Assertion"


@dataclass(frozen=True)
class AOr:
    left: "Assertion"
    right: "Assertion"


@dataclass(frozen=True)
class AExists:
    vars: tuple
    body: "Assertion"


@dataclass(frozen=True)
class Emp:
    pass


@dataclass(frozen=True)
class PointsTo:
    addr: Expr
    value: Expr


@dataclass(frozen=True)
class NotPointsTo:
    addr: Expr


@dataclass(frozen=True)
class Reserved:
    addr: Expr


@dataclass(frozen=True)
class Sep:
    left: "Assertion"
    right: "Assertion"


@dataclass(frozen=True)
class EmpVars:
    vars: tuple

    def __post_init__(self):
        object.__setattr__(self, "vars", tuple(sorted(set(self.vars))))


Assertion = Union[AFalse, ATrue, ACmp, AAnd, AOr, AExists, Emp, PointsTo,
                  NotPointsTo, Reserved, Sep, EmpVars]
HEAP_ATOMS = (PointsTo, NotPointsTo, Reserved)


def conj(parts: Iterable[Assertion]) -> Assertion:
    parts = list(parts)
    if not parts:
        return ATrue()
    out = parts[0]
    for p in parts[1:]:
        out = AAnd(out, p)
    return out


def disj(parts: Iterable[Assertion]) -> Assertion:
    parts = list(parts)
    if not parts:
        return AFalse()
    out = parts[0]
    for p in parts[1:]:
        out = AOr(out, p)
    return out


def star(parts: Iterable[Assertion]) -> Assertion:
    parts = list(parts)
    if not parts:
        return Emp()
    out = parts[0]
    for p in parts[1:]:
        out = Sep(out, p)
    return out


def seq(cmds: Iterable[Command]) -> Command:
    cmds = list(cmds)
    out = cmds[0]
    for c in cmds[1:]:
        out = Seq(out, c)
    return out


def flatten_seq(c: Command) -> list:
    if isinstance(c, Seq):
        return flatten_seq(c.first) + flatten_seq(c.second)
    return [c]


def flatten_choice(c: Command) -> list:
    if isinstance(c, Choice):
        return flatten_choice(c.left) + flatten_choice(c.right)
    return [c]


# ------------------------------------------------------------------ tokenizer

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<op>:=|\|->|!->|\#->|&&|\|\||<=|!=|[<=+\-*;?()\[\]{},.!])
  | (?P<num>\d+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*'*)
""", re.VERBOSE)


@dataclass(frozen=True)
class Tok:
    kind: str
    text: str
    pos: int


def tokenize(text: str) -> list:
    toks, pos = [], 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError("unexpected character", pos, text[pos])
        if m.lastgroup != "ws":
            toks.append(Tok(m.lastgroup, m.group(), pos))
        pos = m.end()
    toks.append(Tok("eof", "", len(text)))
    return toks


KEYWORDS = {"true", "false", "null", "emp", "empX", "exists", "error", "alloc",
            "free", "skip"}


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = tokenize(text)
        self.i = 0
        self.fresh = 0

    # helpers
    @property
    def tok(self) -> Tok:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, *texts: str) -> bool:
        return self.tok.kind in ("op", "name") and self.tok.text in texts

    def eat(self, text: str) -> Tok:
        if self.tok.text != text or self.tok.kind not in ("op", "name"):
            raise ParseError(f"expected {text!r}", self.tok.pos, self.tok.text)
        t = self.tok
        self.i += 1
        return t

    def name(self) -> str:
        t = self.tok
        if t.kind != "name" or t.text in KEYWORDS or t.text == "_":
            raise ParseError("expected a variable", t.pos, t.text)
        self.i += 1
        return t.text

    def done(self):
        if self.tok.kind != "eof":
            raise ParseError("trailing input", self.tok.pos, self.tok.text)

    # expressions; in_cmd makes '+' yield to choice when ambiguous
    def expr(self, in_cmd: bool = False) -> Expr:
        e = self.term()
        while self.at("+", "-"):
            op = self.tok.text
            save = self.i
            self.i += 1
            try:
                rhs = self.term()
            except ParseError:
                if in_cmd and op == "+":
                    self.i = save
                    break
                raise
            if in_cmd and op == "+" and self.at(":=", "?", "*"):
                self.i = save
                break
            e = Add(e, rhs) if op == "+" else Sub(e, rhs)
        return e

    def term(self) -> Expr:
        t = self.tok
        if t.kind == "num":
            self.i += 1
            return Const(int(t.text))
        if t.kind == "name" and t.text == "null":
            self.i += 1
            return Const(NULL)
        if t.kind == "op" and t.text == "(":
            self.i += 1
            e = self.expr()
            self.eat(")")
            return e
        return Var(self.name())

    # boolean expressions
    def bexpr(self) -> BoolExpr:
        b = self.bconj()
        while self.at("||"):
            self.i += 1
            b = BOr(b, self.bconj())
        return b

    def bconj(self) -> BoolExpr:
        b = self.bunary()
        while self.at("&&"):
            self.i += 1
            b = BAnd(b, self.bunary())
        return b

    def bunary(self) -> BoolExpr:
        if self.at("!"):
            self.i += 1
            return BNot(self.bunary())
        if self.at("true"):
            self.i += 1
            return BTrue()
        if self.at("false"):
            self.i += 1
            return BFalse()
        if self.at("("):
            save = self.i
            self.i += 1
            try:
                b = self.bexpr()
                self.eat(")")
                return b
            except ParseError:
                self.i = save
        left = self.expr()
        if not self.at(*CMP_OPS):
            raise ParseError("expected a comparison", self.tok.pos, self.tok.text)
        op = self.tok.text
        self.i += 1
        return Cmp(op, left, self.expr())

    # commands
    def cmd(self) -> Command:
        c = self.choice()
        while self.at(";"):
            self.i += 1
            c = Seq(c, self.choice())
        return c

    def choice(self) -> Command:
        c = self.starred()
        while self.at("+"):
            self.i += 1
            c = Choice(c, self.starred())
        return c

    def starred(self) -> Command:
        c = self.catom()
        while self.at("*"):
            self.i += 1
            c = Star(c)
        return c

    def catom(self) -> Command:
        t = self.tok
        if self.at("skip"):
            self.i += 1
            return SKIP
        if self.at("error") and self.peek().text == "(":
            self.i += 1
            self.eat("(")
            self.eat(")")
            return Error()
        if self.at("free") and self.peek().text == "(":
            self.i += 1
            self.eat("(")
            x = self.name()
            self.eat(")")
            return Free(x)
        if self.at("["):
            self.i += 1
            x = self.name()
            self.eat("]")
            self.eat(":=")
            y = self.name()
            if x == y:
                raise ParseError("store needs distinct variables", t.pos, self.text[t.pos:])
            return StoreCmd(x, y)
        if t.kind == "name" and self.peek().text == ":=":
            x = self.name()
            self.eat(":=")
            if self.at("alloc") and self.peek().text == "(":
                self.i += 1
                self.eat("(")
                self.eat(")")
                return Alloc(x)
            if self.at("["):
                self.i += 1
                y = self.name()
                self.eat("]")
                if x == y:
                    raise ParseError("load needs distinct variables", t.pos, self.text[t.pos:])
                return Load(x, y)
            return Assign(x, self.expr(in_cmd=True))
        save = self.i
        try:
            b = self.bexpr()
            self.eat("?")
            return Assume(b)
        except ParseError:
            self.i = save
        if self.at("("):
            self.i += 1
            c = self.cmd()
            self.eat(")")
            return c
        raise ParseError("expected a command", t.pos, t.text)

    # assertions
    def assertion(self) -> Assertion:
        a = self.asep()
        while self.at("||"):
            self.i += 1
            a = AOr(a, self.asep())
        return a

    def asep(self) -> Assertion:
        a = self.aconj()
        while self.at("*"):
            self.i += 1
            a = Sep(a, self.aconj())
        return a

    def aconj(self) -> Assertion:
        a = self.aatom()
        while self.at("&&"):
            self.i += 1
            a = AAnd(a, self.aatom())
        return a

    def names_until(self, closer: str) -> tuple:
        out = []
        while not self.at(closer):
            out.append(self.name())
            if self.at(","):
                self.i += 1
        return tuple(out)

    def aatom(self) -> Assertion:
        t = self.tok
        if self.at("exists"):
            self.i += 1
            vs = self.names_until(".")
            if not vs:
                raise ParseError("exists needs variables", t.pos)
            self.eat(".")
            return AExists(vs, self.assertion())
        if self.at("true"):
            self.i += 1
            return ATrue()
        if self.at("false"):
            self.i += 1
            return AFalse()
        if self.at("emp"):
            self.i += 1
            return Emp()
        if self.at("empX"):
            self.i += 1
            self.eat("{")
            vs = self.names_until("}")
            self.eat("}")
            return EmpVars(vs)
        if self.at("("):
            save = self.i
            self.i += 1
            try:
                a = self.assertion()
                self.eat(")")
                return a
            except ParseError:
                self.i = save
        left = self.expr()
        if self.at("|->"):
            self.i += 1
            if self.at("_"):
                self.i += 1
                v = f"_{self.fresh}'"
                self.fresh += 1
                return AExists((v,), PointsTo(left, Var(v)))
            return PointsTo(left, self.expr())
        if self.at("!->"):
            self.i += 1
            return NotPointsTo(left)
        if self.at("#->"):
            self.i += 1
            return Reserved(left)
        if self.at(*CMP_OPS):
            op = self.tok.text
            self.i += 1
            return ACmp(op, left, self.expr())
        raise ParseError("expected an assertion", self.tok.pos, self.tok.text)


def parse_command(text: str) -> Command:
    p = _Parser(text)
    c = p.cmd()
    p.done()
    return c


def parse_assertion(text: str) -> Assertion:
    p = _Parser(text)
    a = p.assertion()
    p.done()
    return a


def parse_expr(text: str) -> Expr:
    p = _Parser(text)
    e = p.expr()
    p.done()
    return e


def parse_bexpr(text: str) -> BoolExpr:
    p = _Parser(text)
    b = p.bexpr()
    p.done()
    return b


# ------------------------------------------------------------------- printing

def show_expr(e: Expr) -> str:
    if isinstance(e, Const):
        return "null" if e.value is NULL else str(e.value)
    if isinstance(e, Var):
        return e.name
    op = "+" if isinstance(e, Add) else "-"
    r = show_expr(e.right)
    if isinstance(e.right, (Add, Sub)):
        r = f"({r})"
    return f"{show_expr(e.left)} {op} {r}"


def show_bexpr(b: BoolExpr, prec: int = 0) -> str:
    if isinstance(b, BTrue):
        return "true"
    if isinstance(b, BFalse):
        return "false"
    if isinstance(b, Cmp):
        s = f"{show_expr(b.left)} {b.op} {show_expr(b.right)}"
        return f"({s})" if prec > 2 else s
    if isinstance(b, BNot):
        return "!" + show_bexpr(b.arg, 3)
    if isinstance(b, BAnd):
        s = f"{show_bexpr(b.left, 2)} && {show_bexpr(b.right, 3)}"
        return f"({s})" if prec > 2 else s
    s = f"{show_bexpr(b.left, 1)} || {show_bexpr(b.right, 2)}"
    return f"({s})" if prec > 1 else s


def show_command(c: Command, prec: int = 0) -> str:
    if isinstance(c, Assume):
        b = show_bexpr(c.cond, 0)
        if isinstance(c.cond, (BAnd, BOr)):
            b = f"({b})"
        return f"{b}?"
    if isinstance(c, Error):
        return "error()"
    if isinstance(c, Assign):
        return f"{c.var} := {show_expr(c.expr)}"
    if isinstance(c, Alloc):
        return f"{c.var} := alloc()"
    if isinstance(c, Free):
        return f"free({c.var})"
    if isinstance(c, Load):
        return f"{c.var} := [{c.addr}]"
    if isinstance(c, StoreCmd):
        return f"[{c.addr}] := {c.var}"
    if isinstance(c, Star):
        inner = show_command(c.body, 3)
        if not isinstance(c.body, Star) and not isinstance(c.body, ATOMIC):
            inner = f"({show_command(c.body)})"
        elif isinstance(c.body, Assign):
            inner = f"({inner})"
        return inner + "*"
    if isinstance(c, Choice):
        s = f"{show_command(c.left, 1)} + {show_command(c.right, 2)}"
        return f"({s})" if prec > 1 else s
    s = f"{show_command(c.first, 0)}; {show_command(c.second, 1)}"
    return f"({s})" if prec > 0 else s


def show_assertion(a: Assertion, prec: int = 0) -> str:
    """Print with minimal parentheses; precedence: || 1, * 2, && 3, atoms 4."""
    def par(s, p):
        return f"({s})" if prec > p else s

    if isinstance(a, AFalse):
        return "false"
    if isinstance(a, ATrue):
        return "true"
    if isinstance(a, Emp):
        return "emp"
    if isinstance(a, EmpVars):
        return "empX{" + ",".join(a.vars) + "}"
    if isinstance(a, ACmp):
        return f"{show_expr(a.left)} {a.op} {show_expr(a.right)}"
    if isinstance(a, PointsTo):
        return f"{_addr(a.addr)} |-> {show_expr(a.value)}"
    if isinstance(a, NotPointsTo):
        return f"{_addr(a.addr)} !->"
    if isinstance(a, Reserved):
        return f"{_addr(a.addr)} #->"
    if isinstance(a, AExists):
        s = f"exists {', '.join(a.vars)}. {show_assertion(a.body, 0)}"
        return f"({s})" if prec > 0 else s
    if isinstance(a, AAnd):
        return par(f"{show_assertion(a.left, 3)} && {show_assertion(a.right, 4)}", 3)
    if isinstance(a, Sep):
        return par(f"{show_assertion(a.left, 2)} * {show_assertion(a.right, 3)}", 2)
    return par(f"{show_assertion(a.left, 1)} || {show_assertion(a.right, 2)}", 1)


def _addr(e: Expr) -> str:
    s = show_expr(e)
    return f"({s})" if isinstance(e, (Add, Sub)) else s


# ------------------------------------------------------------- free variables

def expr_vars(e: Expr) -> frozenset:
    if isinstance(e, Var):
        return frozenset([e.name])
    if isinstance(e, (Add, Sub)):
        return expr_vars(e.left) | expr_vars(e.right)
    return frozenset()


def bexpr_vars(b: BoolExpr) -> frozenset:
    if isinstance(b, Cmp):
        return expr_vars(b.left) | expr_vars(b.right)
    if isinstance(b, (BAnd, BOr)):
        return bexpr_vars(b.left) | bexpr_vars(b.right)
    if isinstance(b, BNot):
        return bexpr_vars(b.arg)
    return frozenset()


def command_vars(c: Command) -> frozenset:
    if isinstance(c, Assume):
        return bexpr_vars(c.cond)
    if isinstance(c, Assign):
        return frozenset([c.var]) | expr_vars(c.expr)
    if isinstance(c, (Alloc, Free)):
        return frozenset([c.var])
    if isinstance(c, (Load, StoreCmd)):
        return frozenset([c.var, c.addr])
    if isinstance(c, Seq):
        return command_vars(c.first) | command_vars(c.second)
    if isinstance(c, Choice):
        return command_vars(c.left) | command_vars(c.right)
    if isinstance(c, Star):
        return command_vars(c.body)
    return frozenset()


def command_atoms(c: Command) -> list:
    if isinstance(c, ATOMIC):
        return [c]
    if isinstance(c, Seq):
        return command_atoms(c.first) + command_atoms(c.second)
    if isinstance(c, Choice):
        return command_atoms(c.left) + command_atoms(c.right)
    return command_atoms(c.body)


def free_vars(a: Assertion) -> frozenset:
    if isinstance(a, ACmp):
        return expr_vars(a.left) | expr_vars(a.right)
    if isinstance(a, (AAnd, AOr, Sep)):
        return free_vars(a.left) | free_vars(a.right)
    if isinstance(a, AExists):
        return free_vars(a.body) - frozenset(a.vars)
    if isinstance(a, PointsTo):
        return expr_vars(a.addr) | expr_vars(a.value)
    if isinstance(a, (NotPointsTo, Reserved)):
        return expr_vars(a.addr)
    if isinstance(a, EmpVars):
        return frozenset(a.vars) | frozenset(mirror(x) for x in a.vars)
    return frozenset()


def all_vars(a: Assertion) -> frozenset:
    """Free and bound variables."""
    if isinstance(a, AExists):
        return all_vars(a.body) | frozenset(a.vars)
    if isinstance(a, (AAnd, AOr, Sep)):
        return all_vars(a.left) | all_vars(a.right)
    return free_vars(a)


def expand_emp_vars(a: Assertion) -> Assertion:
    if isinstance(a, EmpVars):
        if not a.vars:
            return Emp()
        parts = [ACmp("=", Var(x), Var(mirror(x))) for x in a.vars]
        return conj(parts + [Emp()])
    if isinstance(a, (AAnd, AOr, Sep)):
        return type(a)(expand_emp_vars(a.left), expand_emp_vars(a.right))
    if isinstance(a, AExists):
        return AExists(a.vars, expand_emp_vars(a.body))
    return a


# --------------------------------------------------------------- substitution

def subst_expr(e: Expr, m: dict) -> Expr:
    if isinstance(e, Var):
        return m.get(e.name, e)
    if isinstance(e, (Add, Sub)):
        return type(e)(subst_expr(e.left, m), subst_expr(e.right, m))
    return e


def subst_bexpr(b: BoolExpr, m: dict) -> BoolExpr:
    if isinstance(b, Cmp):
        return Cmp(b.op, subst_expr(b.left, m), subst_expr(b.right, m))
    if isinstance(b, (BAnd, BOr)):
        return type(b)(subst_bexpr(b.left, m), subst_bexpr(b.right, m))
    if isinstance(b, BNot):
        return BNot(subst_bexpr(b.arg, m))
    return b


def _fresh(base: str, avoid: set) -> str:
    stem = base.rstrip("'")
    k = 0
    while f"{stem}_{k}'" in avoid:
        k += 1
    return f"{stem}_{k}'"


def subst_assertion(a: Assertion, m: dict) -> Assertion:
    """Capture-avoiding simultaneous substitution of expressions for variables."""
    m = {k: v for k, v in m.items() if k in free_vars(a)}
    if not m:
        return a
    if isinstance(a, EmpVars):
        return subst_assertion(expand_emp_vars(a), m)
    if isinstance(a, ACmp):
        return ACmp(a.op, subst_expr(a.left, m), subst_expr(a.right, m))
    if isinstance(a, PointsTo):
        return PointsTo(subst_expr(a.addr, m), subst_expr(a.value, m))
    if isinstance(a, (NotPointsTo, Reserved)):
        return type(a)(subst_expr(a.addr, m))
    if isinstance(a, (AAnd, AOr, Sep)):
        return type(a)(subst_assertion(a.left, m), subst_assertion(a.right, m))
    if isinstance(a, AExists):
        incoming = set()
        for e in m.values():
            incoming |= expr_vars(e)
        avoid = set(all_vars(a)) | incoming | set(m)
        ren, new_vars = {}, []
        for v in a.vars:
            if v in incoming:
                nv = _fresh(v, avoid)
                avoid.add(nv)
                ren[v] = Var(nv)
                new_vars.append(nv)
            else:
                new_vars.append(v)
        body = subst_assertion(a.body, ren) if ren else a.body
        inner = {k: v for k, v in m.items() if k not in a.vars}
        return AExists(tuple(new_vars), subst_assertion(body, inner))
    return a


def rename_assertion(a: Assertion, ren: dict) -> Assertion:
    return subst_assertion(a, {k: Var(v) for k, v in ren.items()})


def subst_command(c: Command, m: dict) -> Command:
    """Rename program variables (values of ``m`` are names) or substitute
    expressions (``Expr`` values) where the grammar allows them."""
    def nm(x):
        v = m.get(x)
        if v is None:
            return x
        if isinstance(v, Var):
            return v.name
        if isinstance(v, str):
            return v
        raise ValueError(f"cannot substitute {v} for a variable position")
    em = {k: (Var(v) if isinstance(v, str) else v) for k, v in m.items()}
    if isinstance(c, Assume):
        return Assume(subst_bexpr(c.cond, em))
    if isinstance(c, Assign):
        return Assign(nm(c.var), subst_expr(c.expr, em))
    if isinstance(c, Alloc):
        return Alloc(nm(c.var))
    if isinstance(c, Free):
        return Free(nm(c.var))
    if isinstance(c, Load):
        return Load(nm(c.var), nm(c.addr))
    if isinstance(c, StoreCmd):
        return StoreCmd(nm(c.addr), nm(c.var))
    if isinstance(c, Seq):
        return Seq(subst_command(c.first, m), subst_command(c.second, m))
    if isinstance(c, Choice):
        return Choice(subst_command(c.left, m), subst_command(c.right, m))
    if isinstance(c, Star):
        return Star(subst_command(c.body, m))
    return c


def is_pure(a: Assertion) -> bool:
    if isinstance(a, (AFalse, ATrue, ACmp)):
        return True
    if isinstance(a, (AAnd, AOr)):
        return is_pure(a.left) and is_pure(a.right)
    if isinstance(a, AExists):
        return is_pure(a.body)
    return False


def program_part(names: Iterable[str]) -> frozenset:
    return frozenset(v for v in names if not is_logical_name(v))


_NEG = {"=": "!=", "!=": "="}


def bexpr_assertion(b: BoolExpr, negate: bool = False) -> Assertion:
    """A pure assertion equivalent to ``b`` (negation pushed to the atoms).

    ``<`` and ``<=`` are false on null, so their negations include the null cases.
    """
    if isinstance(b, BTrue):
        return AFalse() if negate else ATrue()
    if isinstance(b, BFalse):
        return ATrue() if negate else AFalse()
    if isinstance(b, BNot):
        return bexpr_assertion(b.arg, not negate)
    if isinstance(b, (BAnd, BOr)):
        l, r = bexpr_assertion(b.left, negate), bexpr_assertion(b.right, negate)
        return AAnd(l, r) if isinstance(b, BAnd) != negate else AOr(l, r)
    if not negate:
        return ACmp(b.op, b.left, b.right)
    if b.op in _NEG:
        return ACmp(_NEG[b.op], b.left, b.right)
    flipped = ACmp("<=" if b.op == "<" else "<", b.right, b.left)
    null = Const(NULL)
    return disj([flipped, ACmp("=", b.left, null), ACmp("=", b.right, null)])
