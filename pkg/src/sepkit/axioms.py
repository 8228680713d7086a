"""Axiom schemas of the four logics over both memory models.

Schemas are written in the ASCII assertion syntax with ``str.format``
placeholders: ``{EMP}`` is ``emp`` over all program variables, ``{EMPX}`` the
same without ``x``; ``{x}``/``{y}`` are program variables, ``{e}`` an
expression (``{ex}`` is ``e`` with ``x'`` for ``x``), ``{b}`` a condition,
``{z}`` a value term and ``{l}`` a location term; ``{LOC}`` and ``{LOCP}``
expand to "``x'`` (resp. ``x``) is a location".

Two catalogues exist.  ``literal`` transcribes the figures.  ``repaired``
replaces the schemas that are not valid as written by their exact
counterparts; every other schema is shared.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Mapping

from .domain import NULL, DomainConfig, mirror
from .syntax import (Add, BAnd, BNot, BTrue, BFalse, Cmp, Const, Sub, Var, bexpr_assertion,
                     parse_assertion, parse_bexpr, parse_command, parse_expr, show_assertion,
                     show_bexpr, show_expr, subst_expr)

LOGICS = ("sl+", "isl+", "sil+", "nc+")


class UnknownRule(KeyError):
    pass


@dataclass(frozen=True)
class AxiomSchema:
    logic: str
    name: str
    models: frozenset
    pre: str
    cmd: str
    post: str
    outcome: str = "ok"
    # metavariable -> sort; sorts: pvar, expr, bexpr, value, loc, locconst
    metavars: tuple = ()

    def applies(self, model: int) -> bool:
        return model in self.models


BOTH, ONE, TWO = frozenset({1, 2}), frozenset({1}), frozenset({2})

_X, _XY = (("x", "pvar"),), (("x", "pvar"), ("y", "pvar"))


def _s(logic, name, models, pre, cmd, post, outcome="ok", metavars=()):
    return AxiomSchema(logic, name, models, pre, cmd, post, outcome, tuple(metavars))


_LITERAL = [
    # SL+
    _s("sl+", "Alloc2", TWO, "{EMP} * {l} !->", "{x} := alloc()",
       "{EMPX} * {l} |-> {z} && {x} = {l}", metavars=_X + (("l", "loc"), ("z", "value"))),
    _s("sl+", "Free", ONE, "{EMP} * {x} |-> {z}", "free({x})", "{EMP}",
       metavars=_X + (("z", "value"),)),
    _s("sl+", "Free2", TWO, "{EMP} * {x} |-> {z}", "free({x})", "{EMP} * {x} !->",
       metavars=_X + (("z", "value"),)),
    _s("sl+", "Alloc", BOTH, "{EMP}", "{x} := alloc()", "{EMPX} * {x} |-> {z}",
       metavars=_X + (("z", "value"),)),
    _s("sl+", "Assign", BOTH, "{EMPX} && {x} = {x}'", "{x} := {e}", "{EMPX} && {x} = {ex}",
       metavars=_X + (("e", "expr"),)),
    _s("sl+", "Assume", BOTH, "{EMP}", "{b}?", "{EMP} && {bA}", metavars=(("b", "bexpr"),)),
    _s("sl+", "Load", BOTH, "{EMP} * {y} |-> {z}", "{x} := [{y}]",
       "{EMPX} * {y} |-> {z} && {x} = {z}", metavars=_XY + (("z", "value"),)),
    _s("sl+", "Store", BOTH, "{EMP} * {x} |-> {z}", "[{x}] := {y}", "{EMP} * {x} |-> {y}",
       metavars=_XY + (("z", "value"),)),
    # ISL+
    _s("isl+", "Alloc2", TWO, "{EMP} * {l} !->", "{x} := alloc()",
       "{EMPX} * {l} |-> {z} && {x} = {l}", metavars=_X + (("l", "loc"), ("z", "value"))),
    _s("isl+", "Free1", ONE, "{EMP} * {x} |-> {z}", "free({x})", "{EMP}",
       metavars=_X + (("z", "value"),)),
    _s("isl+", "Free2", TWO, "{EMP} * {x} |-> {z}", "free({x})", "{EMP} * {x} !->",
       metavars=_X + (("z", "value"),)),
    _s("isl+", "FreeEr3", TWO, "{EMP} * {x} !->", "free({x})", "{EMP} * {x} !->", "er", _X),
    _s("isl+", "LoadEr3", TWO, "{EMP} * {y} !->", "{x} := [{y}]", "{EMP} * {y} !->", "er", _XY),
    _s("isl+", "StoreEr3", TWO, "{EMP} * {x} !->", "[{x}] := {y}", "{EMP} * {x} !->", "er", _XY),
    _s("isl+", "Assign", BOTH, "{EMPX} && {x} = {x}'", "{x} := {e}", "{EMPX} && {x} = {ex}",
       metavars=_X + (("e", "expr"),)),
    _s("isl+", "Assume", BOTH, "{EMP}", "{b}?", "{EMP} && {bA}", metavars=(("b", "bexpr"),)),
    _s("isl+", "Error", BOTH, "{EMP}", "error()", "{EMP}", "er"),
    _s("isl+", "Alloc", BOTH, "{EMP}", "{x} := alloc()", "{EMPX} * {x} |-> {z}",
       metavars=_X + (("z", "value"),)),
    _s("isl+", "Load", BOTH, "{EMP} * {y} |-> {z}", "{x} := [{y}]",
       "{EMPX} * {y} |-> {z} && {x} = {z}", metavars=_XY + (("z", "value"),)),
    _s("isl+", "Store", BOTH, "{EMP} * {x} |-> {z}", "[{x}] := {y}", "{EMP} * {x} |-> {y}",
       metavars=_XY + (("z", "value"),)),
    _s("isl+", "FreeEr1", BOTH, "{EMP} * ({x} = null && emp)", "free({x})",
       "{EMP} * ({x} = null && emp)", "er", _X),
    _s("isl+", "LoadEr1", BOTH, "{EMP} * ({y} = null && emp)", "{x} := [{y}]",
       "{EMP} * ({y} = null && emp)", "er", _XY),
    _s("isl+", "StoreEr1", BOTH, "{EMP} * ({x} = null && emp)", "[{x}] := {y}",
       "{EMP} * ({x} = null && emp)", "er", _XY),
    _s("isl+", "FreeEr2", BOTH, "{EMP} * {x} #->", "free({x})", "{EMP} * {x} #->", "er", _X),
    _s("isl+", "LoadEr2", BOTH, "{EMP} * {y} #->", "{x} := [{y}]", "{EMP} * {y} #->", "er", _XY),
    _s("isl+", "StoreEr2", BOTH, "{EMP} * {x} #->", "[{x}] := {y}", "{EMP} * {x} #->", "er", _XY),
    # SIL+
    _s("sil+", "Alloc2", TWO, "{EMPX} && {x}' = {l} * {l} !->", "{x} := alloc()",
       "{EMPX} && {x} = {x}' * {x} |-> {z}", metavars=_X + (("l", "loc"), ("z", "value"))),
    _s("sil+", "Free1", ONE, "{EMP} * {x} |-> {z}", "free({x})", "{EMP}",
       metavars=_X + (("z", "value"),)),
    _s("sil+", "Free2", TWO, "{EMP} * {x} |-> {z}", "free({x})", "{EMP} * {x} !->",
       metavars=_X + (("z", "value"),)),
    _s("sil+", "Alloc", BOTH, "{EMPX} && {x}' = {l}", "{x} := alloc()",
       "{EMPX} && {x} = {x}' * {x} |-> {z}", metavars=_X + (("l", "locconst"), ("z", "value"))),
    _s("sil+", "Assign", BOTH, "{EMPX} && {x}' = {e}", "{x} := {e}", "{EMPX} && {x} = {x}'",
       metavars=_X + (("e", "expr"),)),
    _s("sil+", "Assume", BOTH, "{EMP} && {bA}", "{b}?", "{EMP}", metavars=(("b", "bexpr"),)),
    _s("sil+", "Load", BOTH, "{EMPX} && {x}' = {z} * {y} |-> {z}", "{x} := [{y}]",
       "{EMPX} && {x} = {x}' * {y} |-> {z}", metavars=_XY + (("z", "value"),)),
    _s("sil+", "Store", BOTH, "{EMP} * {x} |-> {z}", "[{x}] := {y}", "{EMP} * {x} |-> {y}",
       metavars=_XY + (("z", "value"),)),
    # NC+
    _s("nc+", "Alloc2", TWO, "{EMPX} && {x}' = {l} * {l} !->", "{x} := alloc()",
       "{EMPX} && {x} = {x}' * {x} |-> {z}", metavars=_X + (("l", "loc"), ("z", "value"))),
    _s("nc+", "Free1", ONE, "{EMP} * {x} |-> {z}", "free({x})", "{EMP}",
       metavars=_X + (("z", "value"),)),
    _s("nc+", "Free2", TWO, "{EMP} * {x} |-> {z}", "free({x})", "{EMP} * {x} !->",
       metavars=_X + (("z", "value"),)),
    _s("nc+", "Alloc", BOTH, "{EMPX} && {x}' = {l}", "{x} := alloc()",
       "{EMPX} && {x} = {x}' * {x} |-> {z}", metavars=_X + (("l", "loc"), ("z", "value"))),
    _s("nc+", "Assign", BOTH, "{EMPX} && {x}' = {e}", "{x} := {e}", "{EMPX} && {x} = {x}'",
       metavars=_X + (("e", "expr"),)),
    _s("nc+", "Assume", BOTH, "{EMP} && {bA}", "{b}?", "{EMP}", metavars=(("b", "bexpr"),)),
    _s("nc+", "Load", BOTH, "{EMPX} && {x}' = {z} * {y} |-> {z}", "{x} := [{y}]",
       "{EMPX} && {x} = {x}' * {y} |-> {z}", metavars=_XY + (("z", "value"),)),
    _s("nc+", "Store", BOTH, "{EMP} * {x} |-> {z}", "[{x}] := {y}", "{EMP} * {x} |-> {y}",
       metavars=_XY + (("z", "value"),)),
]

# Exact replacements for schemas that are unsound as over-approximations.
_REPAIRS = {
    ("sl+", "Alloc"): dict(post="exists {Z}. {EMPX} * {x} |-> {Z}", metavars=_X),
    ("sl+", "Alloc2"): dict(
        post="exists {Z}. ({EMPX} * {l} |-> {Z} && {x} = {l} || {EMPX} * {x} |-> {Z} * {l} !->)",
        metavars=_X + (("l", "loc"),)),
    ("isl+", "Free1"): dict(post="{EMP} && {LOCP}", metavars=_X + (("z", "value"),)),
    ("nc+", "Free1"): dict(pre="exists {Z}. {EMP} * {x} |-> {Z}", metavars=_X),
    ("nc+", "Free2"): dict(pre="exists {Z}. {EMP} * {x} |-> {Z}", metavars=_X),
    ("nc+", "Store"): dict(pre="exists {Z}. {EMP} * {x} |-> {Z}", metavars=_XY),
    ("nc+", "Alloc"): dict(pre="{EMPX} && {LOC}", models=ONE, metavars=_X + (("z", "value"),)),
    ("nc+", "Alloc2"): dict(pre="{EMPX} && {LOC} || {EMPX} * {x}' !->",
                            metavars=_X + (("z", "value"),)),
}


def _build(kind: str) -> dict:
    out = {}
    for s in _LITERAL:
        if kind == "repaired" and (s.logic, s.name) in _REPAIRS:
            fields = dict(_REPAIRS[(s.logic, s.name)])
            s = AxiomSchema(s.logic, s.name, fields.pop("models", s.models),
                            fields.pop("pre", s.pre), s.cmd, fields.pop("post", s.post),
                            s.outcome, tuple(fields.pop("metavars", s.metavars)))
        out[(s.logic, s.name)] = s
    return out


CATALOGUES = {"literal": _build("literal"), "repaired": _build("repaired")}

REPAIRED_NAMES = tuple(sorted(_REPAIRS))


def schemas(logic: str, model: int, catalogue: str = "repaired",
            overrides: Mapping | None = None) -> list:
    cat = dict(CATALOGUES[catalogue])
    if overrides:
        for key, fields in overrides.items():
            base = cat[key]
            cat[key] = AxiomSchema(base.logic, base.name, base.models,
                                   fields.get("pre", base.pre), base.cmd,
                                   fields.get("post", base.post),
                                   fields.get("outcome", base.outcome), base.metavars)
    return [s for (lg, _), s in sorted(cat.items()) if lg == logic and s.applies(model)]


def get_schema(logic: str, model: int, name: str, catalogue: str = "repaired",
               overrides: Mapping | None = None) -> AxiomSchema:
    for s in schemas(logic, model, catalogue, overrides):
        if s.name == name:
            return s
    raise UnknownRule(f"{logic}{model} has no axiom {name}")


# -------------------------------------------------------------- instantiation

@dataclass(frozen=True)
class Instance:
    schema: AxiomSchema
    subst: tuple           # sorted (metavar, syntax-object) pairs
    pre: object
    cmd: object
    post: object

    @property
    def outcome(self) -> str:
        return self.schema.outcome

    def describe(self) -> str:
        from .syntax import show_command
        args = ", ".join(f"{k}={_show(v)}" for k, v in self.subst)
        return (f"{self.schema.logic} {self.schema.name}[{args}]: "
                f"{{{show_assertion(self.pre)}}} {show_command(self.cmd)} "
                f"{'[' + self.outcome + ']' if self.schema.logic == 'isl+' else ''}"
                f"{{{show_assertion(self.post)}}}")


def _show(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (Var, Const, Add, Sub)):
        return show_expr(v)
    return show_bexpr(v)


def _fresh_logical(cfg: DomainConfig, used: Mapping) -> str:
    taken = {mirror(p) for p in cfg.program_vars}
    taken |= {v.name for v in used.values() if isinstance(v, Var)}
    for i in itertools.count():
        for stem in ("z", "w", "u"):
            name = f"{stem}{i or ''}'"
            if name not in taken:
                return name


def _paren(s: str) -> str:
    return f"({s})"


def instantiate(schema: AxiomSchema, subst: Mapping, cfg: DomainConfig) -> Instance:
    """Fill a schema's placeholders.  ``subst`` maps metavariable names
    (``x``, ``y``, ``e``, ``b``, ``z``/``z'``, ``l``/``l'``) to strings or ASTs."""
    norm = {}
    for k, v in subst.items():
        key = k.rstrip("'")
        if key in ("x", "y"):
            norm[key] = v.name if isinstance(v, Var) else str(v)
        elif key == "b":
            norm[key] = parse_bexpr(v) if isinstance(v, str) else v
        elif key in ("e", "z", "l"):
            norm[key] = parse_expr(v) if isinstance(v, str) else v
    needed = dict(schema.metavars)
    missing = [m for m in needed if m not in norm]
    if missing:
        raise ValueError(f"{schema.name} needs {missing}")
    x = norm.get("x", "x")
    pv = cfg.program_vars
    if x not in pv or norm.get("y", x) not in pv:
        raise ValueError("metavariables x, y must be program variables")
    if "y" in norm and norm["y"] == x:
        raise ValueError("x and y must differ")
    fill = {
        "EMP": "empX{" + ",".join(pv) + "}",
        "EMPX": "empX{" + ",".join(v for v in pv if v != x) + "}",
        "x": x,
        "y": norm.get("y", ""),
        "LOC": _paren(" || ".join(f"{mirror(x)} = {l}" for l in cfg.locations) or "false"),
        "Z": _fresh_logical(cfg, norm),
        "LOCP": _paren(" || ".join(f"{x} = {l}" for l in cfg.locations) or "false"),
    }
    if "e" in norm:
        fill["e"] = _paren(show_expr(norm["e"]))
        fill["ex"] = _paren(show_expr(subst_expr(norm["e"], {x: Var(mirror(x))})))
    if "b" in norm:
        fill["b"] = _paren(show_bexpr(norm["b"]))
        fill["bA"] = _paren(show_assertion(bexpr_assertion(norm["b"])))
    for key in ("z", "l"):
        if key in norm:
            fill[key] = _paren(show_expr(norm[key])) if not isinstance(norm[key], (Var, Const)) \
                else show_expr(norm[key])
    pre = parse_assertion(schema.pre.format(**fill))
    post = parse_assertion(schema.post.format(**fill))
    cmd = parse_command(schema.cmd.format(**fill))
    kept = tuple(sorted((k, norm[k]) for k in needed))
    return Instance(schema, kept, pre, cmd, post)


def expr_pool(cfg: DomainConfig) -> list:
    pv = cfg.program_vars
    out = [Const(v) for v in cfg.values] + [Const(NULL)]
    out += [Var(p) for p in pv]
    out += [Add(Var(p), Const(1)) for p in pv]
    if len(pv) >= 2:
        out.append(Sub(Var(pv[0]), Var(pv[1])))
    return out


def bexpr_pool(cfg: DomainConfig) -> list:
    pv = cfg.program_vars
    a = Var(pv[0])
    b = Var(pv[1]) if len(pv) > 1 else Const(0)
    return [BTrue(), BFalse(), Cmp("=", a, b), Cmp("<", a, b), Cmp("<=", a, Const(1)),
            Cmp("!=", a, Const(NULL)), BNot(Cmp("=", a, b)),
            BAnd(Cmp("=", a, Const(0)), Cmp("!=", b, Const(NULL))), BNot(Cmp("<", a, b))]


def sort_pool(sort: str, cfg: DomainConfig) -> list:
    if sort == "expr":
        return expr_pool(cfg)
    if sort == "bexpr":
        return bexpr_pool(cfg)
    mirrors = {mirror(p) for p in cfg.program_vars}
    if sort == "value":
        return [Var(v) for v in ("z'", "w'", "u'") if v not in mirrors][:2] + [Const(v) for v in cfg.values] + [Const(NULL)]
    if sort == "loc":
        return [Var(v) for v in ("l'", "k'") if v not in mirrors][:1] + [Const(l) for l in cfg.locations] + [Const(0)]
    if sort == "locconst":
        return [Const(l) for l in cfg.locations]
    raise ValueError(sort)


def instances(schema: AxiomSchema, cfg: DomainConfig) -> Iterator[Instance]:
    """Every instantiation of ``schema`` over the metavariable pools of ``cfg``."""
    names = [m for m, _ in schema.metavars]
    pools = []
    for m, sort in schema.metavars:
        pools.append(list(cfg.program_vars) if sort == "pvar" else sort_pool(sort, cfg))
    for combo in itertools.product(*pools):
        sub = dict(zip(names, combo))
        if "y" in sub and sub["y"] == sub.get("x"):
            continue
        yield instantiate(schema, sub, cfg)
