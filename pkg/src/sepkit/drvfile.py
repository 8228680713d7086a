"""Reader and writer for the parenthesized derivation format.

    (rule NAME :logic isl+2 :conclusion "{P} cmd [ok]{Q}"
          :frame "R" :exists "x' y'" :subst ((x . "x") (z . "z'"))
      (premise ...) ...)

``premise`` is accepted as a synonym of ``rule``; ``;`` starts a comment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .checker import Derivation, LogicId, parse_triple
from .syntax import ParseError, parse_assertion, show_assertion, show_bexpr, show_expr


class DrvSyntaxError(ValueError):
    pass


_TOK = re.compile(r'''\s+|;[^\n]*|(?P<lp>\()|(?P<rp>\))|(?P<str>"(?:[^"\\]|\\.)*")|(?P<dot>\.(?=[\s(]))|(?P<atom>[^\s()"]+)''')


def _tokens(text: str):
    pos = 0
    while pos < len(text):
        m = _TOK.match(text, pos)
        if not m:
            raise DrvSyntaxError(f"unexpected character {text[pos]!r} at {pos}")
        pos = m.end()
        if m.lastgroup == "str":
            yield ("str", bytes(m.group()[1:-1], "utf-8").decode("unicode_escape"))
        elif m.lastgroup:
            yield (m.lastgroup, m.group())


@dataclass(frozen=True)
class Sym:
    name: str


def read_sexprs(text: str) -> list:
    toks = list(_tokens(text))
    stack = [[]]
    for kind, val in toks:
        if kind == "lp":
            stack.append([])
        elif kind == "rp":
            if len(stack) == 1:
                raise DrvSyntaxError("unbalanced ')'")
            done = stack.pop()
            stack[-1].append(done)
        elif kind == "str":
            stack[-1].append(val)
        elif kind == "dot":
            stack[-1].append(Sym("."))
        else:
            stack[-1].append(Sym(val))
    if len(stack) != 1:
        raise DrvSyntaxError("unbalanced '('")
    return stack[0]


def _subst(form) -> dict:
    out = {}
    if not isinstance(form, list):
        raise DrvSyntaxError(":subst expects a list of (name . \"value\") pairs")
    for pair in form:
        if not (isinstance(pair, list) and len(pair) == 3 and pair[1] == Sym(".")):
            raise DrvSyntaxError(f"bad :subst entry {pair!r}")
        key, val = pair[0], pair[2]
        key = key.name if isinstance(key, Sym) else key
        val = val.name if isinstance(val, Sym) else val
        out[key] = val
    return out


def _node(form) -> tuple:
    if not (isinstance(form, list) and form and form[0] in (Sym("rule"), Sym("premise"))):
        raise DrvSyntaxError(f"expected (rule ...) form, got {form!r}")
    if len(form) < 2 or not isinstance(form[1], Sym):
        raise DrvSyntaxError("rule name missing")
    name = form[1].name
    opts, premises = {}, []
    i = 2
    while i < len(form):
        item = form[i]
        if isinstance(item, Sym) and item.name.startswith(":"):
            if i + 1 >= len(form):
                raise DrvSyntaxError(f"{item.name} has no value")
            opts[item.name[1:]] = form[i + 1]
            i += 2
        elif isinstance(item, list):
            premises.append(_node(item)[0])
            i += 1
        else:
            raise DrvSyntaxError(f"unexpected {item!r} in rule {name}")
    if "conclusion" not in opts:
        raise DrvSyntaxError(f"rule {name} has no :conclusion")
    try:
        concl = parse_triple(opts["conclusion"])
        frame = parse_assertion(opts["frame"]) if "frame" in opts else None
    except (ParseError, ValueError) as e:
        raise DrvSyntaxError(f"in rule {name}: {e}") from e
    exists = ()
    if "exists" in opts:
        raw = opts["exists"]
        raw = raw.name if isinstance(raw, Sym) else raw
        exists = tuple(v for v in re.split(r"[\s,{}]+", raw) if v)
    subst = _subst(opts["subst"]) if "subst" in opts else {}
    logic = None
    if "logic" in opts:
        raw = opts["logic"]
        try:
            logic = LogicId.parse(raw.name if isinstance(raw, Sym) else raw)
        except ValueError as e:
            raise DrvSyntaxError(str(e)) from e
    return Derivation(name, concl, premises, frame, exists, subst), logic


def parse_derivations(text: str) -> list:
    """All top-level derivations in ``text`` as ``(Derivation, LogicId | None)``."""
    return [_node(f) for f in read_sexprs(text)]


def parse_derivation(text: str) -> tuple:
    items = parse_derivations(text)
    if len(items) != 1:
        raise DrvSyntaxError(f"expected one derivation, found {len(items)}")
    return items[0]


def load_derivation(path) -> tuple:
    with open(path, encoding="utf-8") as fh:
        return parse_derivation(fh.read())


def _q(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _value_text(v) -> str:
    if isinstance(v, str):
        return v
    try:
        return show_expr(v)
    except TypeError:
        return show_bexpr(v)


def dump_derivation(d: Derivation, logic: LogicId | None = None, indent: int = 0) -> str:
    pad = "  " * indent
    head = f"{pad}({'rule' if indent == 0 else 'premise'} {d.rule}"
    if logic is not None:
        head += f" :logic {logic}"
    lines = [head, f"{pad}  :conclusion {_q(str(d.conclusion))}"]
    if d.frame is not None:
        lines.append(f"{pad}  :frame {_q(show_assertion(d.frame))}")
    if d.exists:
        lines.append(f"{pad}  :exists {_q(' '.join(d.exists))}")
    if d.subst:
        pairs = " ".join(f"({k} . {_q(_value_text(v))})" for k, v in sorted(d.subst.items()))
        lines.append(f"{pad}  :subst ({pairs})")
    for p in d.premises:
        lines.append(dump_derivation(p, None, indent + 1))
    lines[-1] += ")"
    return "\n".join(lines)
