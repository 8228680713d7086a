"""Derivation checking for SL+, ISL+, SIL+ and NC+ over both memory models.

Assertions in a conclusion are compared with the shape a rule prescribes up
to semantic equivalence over the configured domain; commands are compared
modulo associativity of ``;`` and ``+``.  Side conditions use the logical
heap-compatibility predicate and syntactic free-variable checks.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Mapping, Optional

from .assertions import eval_assertion, heap_compat_logical, is_universal_frame, to_dnf
from .axioms import (LOGICS, UnknownRule, get_schema, instantiate, sort_pool)
from .closures import (BACKWARD_OVER, BACKWARD_UNDER, FORWARD_OVER, FORWARD_UNDER_ER,
                       SemTriple, is_valid)
from .domain import DomainConfig, MemorySet, TaggedMemorySet, is_logical_name
from .syntax import (AExists, AFalse, Alloc, Assign, Assume, Assertion, Choice, Command,
                     Error, Free, Load, Seq, Star, StoreCmd, Var, command_vars, disj,
                     flatten_choice, flatten_seq, free_vars, parse_assertion, parse_command,
                     show_assertion, show_command, star)


class SideConditionFailed(Exception):
    pass


class RuleShapeMismatch(Exception):
    pass


@dataclass(frozen=True)
class LogicId:
    logic: str
    model: int

    def __post_init__(self):
        if self.logic not in LOGICS or self.model not in (1, 2):
            raise ValueError(f"unknown logic {self.logic}{self.model}")

    @classmethod
    def parse(cls, text: str) -> "LogicId":
        m = re.fullmatch(r"\s*(sl\+|isl\+|sil\+|nc\+)\s*([12])\s*", text.lower())
        if not m:
            raise ValueError(f"bad logic id {text!r}; expected e.g. sl+1 or isl+2")
        return cls(m.group(1), int(m.group(2)))

    def __str__(self):
        return f"{self.logic}{self.model}"

    @property
    def kind(self):
        return {"sl+": FORWARD_OVER, "isl+": FORWARD_UNDER_ER,
                "sil+": BACKWARD_UNDER, "nc+": BACKWARD_OVER}[self.logic]


@dataclass(frozen=True)
class LogicalTriple:
    pre: Assertion
    cmd: Command
    post: Assertion
    outcome: Optional[str] = None      # "ok" | "er" for ISL+, None otherwise

    def __str__(self):
        tag = f"[{self.outcome}]" if self.outcome else ""
        return f"{{{show_assertion(self.pre)}}} {show_command(self.cmd)} {tag}{{{show_assertion(self.post)}}}"


def _brace_block(text: str, i: int) -> tuple:
    """Parse a ``{...}`` block with nested braces starting at ``text[i]``."""
    if i >= len(text) or text[i] != "{":
        raise ValueError(f"expected '{{' at {i} in {text!r}")
    depth = 0
    for j in range(i, len(text)):
        if text[j] == "{":
            depth += 1
        elif text[j] == "}":
            depth -= 1
            if depth == 0:
                return text[i + 1:j], j + 1
    raise ValueError(f"unbalanced braces in {text!r}")


_TAG_RE = re.compile(r"\[(ok|er)\]\s*$")


def parse_triple(text: str) -> LogicalTriple:
    text = text.strip()
    pre, i = _brace_block(text, 0)
    # the post block is the last top-level brace group
    depth, start = 0, None
    for k in range(len(text) - 1, i - 1, -1):
        if text[k] == "}":
            depth += 1
        elif text[k] == "{":
            depth -= 1
            if depth == 0:
                start = k
                break
    if start is None:
        raise ValueError(f"missing postcondition in {text!r}")
    post, end = _brace_block(text, start)
    if text[end:].strip():
        raise ValueError(f"trailing text after postcondition in {text!r}")
    middle = text[i:start]
    outcome = None
    m = _TAG_RE.search(middle)
    if m:
        outcome = m.group(1)
        middle = middle[:m.start()]
    return LogicalTriple(parse_assertion(pre), parse_command(middle), parse_assertion(post),
                         outcome)


@dataclass
class Derivation:
    rule: str
    conclusion: LogicalTriple
    premises: list = field(default_factory=list)
    frame: Optional[Assertion] = None
    exists: tuple = ()
    subst: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Verdict:
    accepted: bool
    path: tuple = ()
    reason: str = ""
    error: str = ""

    def __bool__(self):
        return self.accepted

    def __str__(self):
        if self.accepted:
            return "accepted"
        where = "/".join(str(p) for p in self.path) or "root"
        return f"rejected at {where}: {self.error}: {self.reason}"


@dataclass(frozen=True)
class CheckerOptions:
    catalogue: str = "repaired"
    frame_compat: bool = True
    model2_alloc_guard: bool = True
    cons_flip: bool = False
    axiom_overrides: tuple = ()        # ((logic, name), {field: text}) pairs

    def overrides(self):
        return {k: dict(v) for k, v in self.axiom_overrides} or None


DEFAULT_OPTIONS = CheckerOptions()

STRUCTURAL = {
    "sl+": {"Frame", "Cons", "Exists", "Disj", "Seq", "Choice", "Iterate", "Empty"},
    "isl+": {"Frame", "Cons", "Exists", "Disj", "Seq", "SeqEr", "Choice", "Iterate",
             "IterateZero", "Empty"},
    "sil+": {"Frame", "Cons", "Exists", "Disj", "Seq", "Choice", "Iterate", "IterateZero",
             "Empty"},
    "nc+": {"Frame", "Cons", "Exists", "Disj", "Seq", "Choice", "Iterate", "Empty"},
}

_ALIASES = {"Iterate-zero": "IterateZero", "Iterate-Zero": "IterateZero", "Free": "Free"}


# ------------------------------------------------------------------ helpers

def _ev(a: Assertion, cfg: DomainConfig) -> MemorySet:
    return eval_assertion(a, cfg)


def _equiv(a, b, cfg) -> bool:
    return a == b or _ev(a, cfg) == _ev(b, cfg)


def _implies(a, b, cfg) -> bool:
    return _ev(a, cfg) <= _ev(b, cfg)


def canonical(c: Command):
    """Normal form modulo associativity of ``;`` and ``+``."""
    if isinstance(c, Seq):
        return ("seq",) + tuple(canonical(p) for p in flatten_seq(c))
    if isinstance(c, Choice):
        return ("choice",) + tuple(canonical(p) for p in flatten_choice(c))
    if isinstance(c, Star):
        return ("star", canonical(c.body))
    return c


def _parts(c: Command, op: str) -> tuple:
    k = canonical(c)
    return k[1:] if isinstance(k, tuple) and k[0] == op else (k,)


def same_command(a: Command, b: Command) -> bool:
    return canonical(a) == canonical(b)


def _need(cond: bool, msg: str, exc=RuleShapeMismatch):
    if not cond:
        raise exc(msg)


def _show(a: Assertion) -> str:
    return show_assertion(a)


def semantic_triple(t: LogicalTriple, logic: LogicId, cfg: DomainConfig) -> SemTriple:
    P, Q = _ev(t.pre, cfg), _ev(t.post, cfg)
    if logic.logic == "isl+":
        empty = MemorySet.empty(cfg)
        post = TaggedMemorySet(Q, empty) if t.outcome != "er" else TaggedMemorySet(empty, Q)
        return SemTriple(P, t.cmd, post, logic.kind)
    return SemTriple(P, t.cmd, Q, logic.kind)


def triple_valid(t: LogicalTriple, logic: LogicId, cfg: DomainConfig) -> bool:
    """Validity of ``t`` under the semantic reading of ``logic``."""
    return is_valid(semantic_triple(t, logic, cfg))


# ------------------------------------------------------------------- axioms

def _infer_command_subst(cmd: Command) -> dict:
    if isinstance(cmd, (Alloc, Free)):
        return {"x": cmd.var}
    if isinstance(cmd, Assign):
        return {"x": cmd.var, "e": cmd.expr}
    if isinstance(cmd, Load):
        return {"x": cmd.var, "y": cmd.addr}
    if isinstance(cmd, StoreCmd):
        return {"x": cmd.addr, "y": cmd.var}
    if isinstance(cmd, Assume):
        return {"b": cmd.cond}
    if isinstance(cmd, Error):
        return {}
    raise RuleShapeMismatch(f"axioms conclude atomic commands, got {show_command(cmd)}")


def _candidates(schema, t: LogicalTriple, subst: Mapping, cfg: DomainConfig):
    import itertools
    base = dict(_infer_command_subst(t.cmd))
    for k, v in subst.items():
        base[k.rstrip("'")] = v
    open_mv = [(m, s) for m, s in schema.metavars if m not in base]
    pools = []
    seen_vars = sorted(v for v in free_vars(t.pre) | free_vars(t.post)
                       if is_logical_name(v) and v not in {f"{p}'" for p in cfg.program_vars})
    for m, sort in open_mv:
        pool = list(sort_pool(sort, cfg))
        if sort in ("value", "loc"):
            pool = [Var(v) for v in seen_vars] + [p for p in pool if p not in
                                                   [Var(v) for v in seen_vars]]
        pools.append(pool)
    for combo in itertools.product(*pools):
        s = dict(base)
        s.update({m: v for (m, _), v in zip(open_mv, combo)})
        try:
            yield instantiate(schema, s, cfg)
        except ValueError:
            continue


def match_axiom(t: LogicalTriple, logic: LogicId, name: str, subst: Mapping,
                cfg: DomainConfig, options: CheckerOptions = DEFAULT_OPTIONS) -> bool:
    """Syntactic match of ``t`` against axiom ``name`` instantiated by ``subst``."""
    schema = get_schema(logic.logic, logic.model, name, options.catalogue, options.overrides())
    full = dict(_infer_command_subst(t.cmd))
    full.update({k.rstrip("'"): v for k, v in subst.items()})
    try:
        inst = instantiate(schema, full, cfg)
    except ValueError:
        return False
    outcome = t.outcome if logic.logic == "isl+" else None
    want = schema.outcome if logic.logic == "isl+" else None
    return (inst.pre == t.pre and inst.post == t.post and inst.cmd == t.cmd
            and outcome == want)


def _check_axiom(node: Derivation, logic: LogicId, cfg, options) -> None:
    t = node.conclusion
    schema = get_schema(logic.logic, logic.model, node.rule, options.catalogue,
                        options.overrides())
    _need(not node.premises, f"axiom {node.rule} takes no premises")
    if logic.logic == "isl+":
        _need(t.outcome == schema.outcome,
              f"{node.rule} concludes [{schema.outcome}], got [{t.outcome}]")
    for inst in _candidates(schema, t, node.subst, cfg):
        if inst.cmd != t.cmd:
            continue
        if _equiv(inst.pre, t.pre, cfg) and _equiv(inst.post, t.post, cfg):
            return
    raise RuleShapeMismatch(f"conclusion is not an instance of {logic.logic} {node.rule}")


# ---------------------------------------------------------------- structure

def _same_outcome(node, prem, logic):
    if logic.logic == "isl+":
        _need(prem.conclusion.outcome == node.conclusion.outcome,
              "premise and conclusion outcome tags differ")


def _check_frame(node, logic, cfg, options):
    _need(len(node.premises) == 1, "Frame takes one premise")
    _need(node.frame is not None, "Frame needs a :frame assertion")
    R = node.frame
    p = node.premises[0].conclusion
    t = node.conclusion
    _need(same_command(p.cmd, t.cmd), "Frame changes the command")
    _same_outcome(node, node.premises[0], logic)
    _need(is_universal_frame(R, cfg),
          f"fv({_show(R)}) is not contained in the logical variables", SideConditionFailed)
    side = p.pre if logic.logic in ("sl+", "isl+") else p.post
    if options.frame_compat:
        _need(heap_compat_logical(side, R, cfg),
              f"{'P' if side is p.pre else 'Q'} and R are not logically heap-compatible",
              SideConditionFailed)
    if (options.model2_alloc_guard and logic.logic == "sl+" and logic.model == 2
            and any(isinstance(a, Alloc) for a in _atoms(t.cmd))):
        _need(not to_dnf(R, cfg).has_dealloc(),
              "frames with deallocated cells cannot be added around alloc in SL+ model 2",
              SideConditionFailed)
    _need(_equiv(t.pre, star([p.pre, R]), cfg), "conclusion pre is not P * R")
    _need(_equiv(t.post, star([p.post, R]), cfg), "conclusion post is not Q * R")


def _atoms(c):
    from .syntax import command_atoms
    return command_atoms(c)


def _check_cons(node, logic, cfg, options):
    _need(len(node.premises) == 1, "Cons takes one premise")
    p = node.premises[0].conclusion
    t = node.conclusion
    _need(same_command(p.cmd, t.cmd), "Cons changes the command")
    _same_outcome(node, node.premises[0], logic)
    shrink_pre = logic.logic in ("sl+", "sil+")
    if options.cons_flip:
        shrink_pre = not shrink_pre
    if shrink_pre:
        _need(_implies(t.pre, p.pre, cfg), "P => P' does not hold", SideConditionFailed)
        _need(_implies(p.post, t.post, cfg), "Q' => Q does not hold", SideConditionFailed)
    else:
        _need(_implies(p.pre, t.pre, cfg), "P' => P does not hold", SideConditionFailed)
        _need(_implies(t.post, p.post, cfg), "Q => Q' does not hold", SideConditionFailed)


def _check_exists(node, logic, cfg, options):
    _need(len(node.premises) == 1, "Exists takes one premise")
    X = tuple(node.exists)
    _need(bool(X), "Exists needs an :exists variable list")
    for v in X:
        _need(is_logical_name(v) and v not in cfg.program_vars,
              f"{v} is not a logical variable", SideConditionFailed)
    p = node.premises[0].conclusion
    t = node.conclusion
    _need(same_command(p.cmd, t.cmd), "Exists changes the command")
    _same_outcome(node, node.premises[0], logic)
    _need(_equiv(t.pre, AExists(X, p.pre), cfg), "conclusion pre is not exists X. P")
    _need(_equiv(t.post, AExists(X, p.post), cfg), "conclusion post is not exists X. Q")


def _check_disj(node, logic, cfg, options):
    _need(len(node.premises) >= 1, "Disj needs premises")
    t = node.conclusion
    for q in node.premises:
        _need(same_command(q.conclusion.cmd, t.cmd), "Disj premises differ in command")
        _same_outcome(node, q, logic)
    _need(_equiv(t.pre, disj(q.conclusion.pre for q in node.premises), cfg),
          "conclusion pre is not the disjunction of premise pres")
    _need(_equiv(t.post, disj(q.conclusion.post for q in node.premises), cfg),
          "conclusion post is not the disjunction of premise posts")


def _check_seq(node, logic, cfg, options):
    ps = [q.conclusion for q in node.premises]
    t = node.conclusion
    _need(len(ps) >= 2, "Seq needs at least two premises")
    joined = tuple(x for p in ps for x in _parts(p.cmd, "seq"))
    _need(joined == _parts(t.cmd, "seq"), "Seq premises do not compose to the command")
    _need(_equiv(t.pre, ps[0].pre, cfg), "conclusion pre differs from the first premise pre")
    _need(_equiv(t.post, ps[-1].post, cfg), "conclusion post differs from the last premise post")
    for a, b in zip(ps, ps[1:]):
        _need(_equiv(a.post, b.pre, cfg), "intermediate assertions do not agree")
    if logic.logic == "isl+":
        _need(all(p.outcome == "ok" for p in ps[:-1]), "only the last Seq premise may be [er]")
        _need(ps[-1].outcome == t.outcome, "conclusion tag differs from the last premise")


def _check_seqer(node, logic, cfg, options):
    _need(logic.logic == "isl+", "SeqEr is an ISL+ rule")
    _need(len(node.premises) == 1, "SeqEr takes one premise")
    p = node.premises[0].conclusion
    t = node.conclusion
    _need(p.outcome == "er" and t.outcome == "er", "SeqEr needs [er] premise and conclusion")
    head, whole = _parts(p.cmd, "seq"), _parts(t.cmd, "seq")
    _need(len(whole) > len(head) and whole[:len(head)] == head,
          "premise command is not a proper prefix of the sequence")
    _need(_equiv(t.pre, p.pre, cfg) and _equiv(t.post, p.post, cfg),
          "SeqEr keeps pre and post")


def _check_choice(node, logic, cfg, options):
    ps = [q.conclusion for q in node.premises]
    t = node.conclusion
    _need(len(ps) >= 2, "Choice needs at least two premises")
    joined = tuple(x for p in ps for x in _parts(p.cmd, "choice"))
    _need(joined == _parts(t.cmd, "choice"), "Choice premises do not cover the branches")
    for q in node.premises:
        _same_outcome(node, q, logic)
    if logic.logic == "isl+":
        _need(all(_equiv(p.pre, t.pre, cfg) for p in ps), "branches must share the pre")
        _need(_equiv(t.post, disj(p.post for p in ps), cfg),
              "conclusion post is not the disjunction of branch posts")
    elif logic.logic == "sil+":
        _need(all(_equiv(p.post, t.post, cfg) for p in ps), "branches must share the post")
        _need(_equiv(t.pre, disj(p.pre for p in ps), cfg),
              "conclusion pre is not the disjunction of branch pres")
    else:
        _need(all(_equiv(p.pre, t.pre, cfg) and _equiv(p.post, t.post, cfg) for p in ps),
              "branches must share pre and post")


def _check_iterate(node, logic, cfg, options):
    t = node.conclusion
    _need(isinstance(t.cmd, Star), "Iterate concludes a starred command")
    _need(len(node.premises) == 1, "Iterate takes one premise")
    p = node.premises[0].conclusion
    if logic.logic in ("sl+", "nc+"):
        _need(same_command(p.cmd, t.cmd.body), "premise command is not the loop body")
        _need(_equiv(p.pre, p.post, cfg), "premise is not an invariant triple")
        _need(_equiv(t.pre, p.pre, cfg) and _equiv(t.post, p.post, cfg),
              "conclusion must restate the invariant")
        return
    _need(same_command(p.cmd, Seq(t.cmd, t.cmd.body)), "premise command is not r*;r")
    _same_outcome(node, node.premises[0], logic)
    _need(_equiv(t.pre, p.pre, cfg) and _equiv(t.post, p.post, cfg),
          "Iterate keeps pre and post")


def _check_iterate_zero(node, logic, cfg, options):
    t = node.conclusion
    _need(not node.premises, "IterateZero takes no premises")
    _need(isinstance(t.cmd, Star), "IterateZero concludes a starred command")
    _need(_equiv(t.pre, t.post, cfg), "IterateZero needs identical pre and post")
    if logic.logic == "isl+":
        _need(t.outcome == "ok", "IterateZero concludes [ok]")


def _check_empty(node, logic, cfg, options):
    t = node.conclusion
    _need(not node.premises, "Empty takes no premises")
    side = t.pre if logic.logic in ("sl+", "sil+") else t.post
    _need(_equiv(side, AFalse(), cfg),
          "Empty needs a false " + ("pre" if side is t.pre else "post"))


_RULES = {
    "Frame": _check_frame, "Cons": _check_cons, "Exists": _check_exists,
    "Disj": _check_disj, "Seq": _check_seq, "SeqEr": _check_seqer,
    "Choice": _check_choice, "Iterate": _check_iterate,
    "IterateZero": _check_iterate_zero, "Empty": _check_empty,
}


def _check_triple_shape(t: LogicalTriple, logic: LogicId, cfg: DomainConfig):
    bad = sorted(v for v in command_vars(t.cmd) if v not in cfg.program_vars)
    _need(not bad, f"command uses non-program variables {bad}")
    if logic.logic == "isl+":
        _need(t.outcome in ("ok", "er"), "ISL+ triples carry an [ok] or [er] tag")
    else:
        _need(t.outcome is None, f"{logic.logic} triples carry no outcome tag")


def check_rule(node: Derivation, logic: LogicId, cfg: DomainConfig,
               options: CheckerOptions = DEFAULT_OPTIONS) -> bool:
    """Check one inference step; premises are assumed checked.

    Raises :class:`SideConditionFailed`, :class:`RuleShapeMismatch` or
    :class:`UnknownRule`.
    """
    rule = _ALIASES.get(node.rule, node.rule)
    _check_triple_shape(node.conclusion, logic, cfg)
    if rule in STRUCTURAL[logic.logic]:
        _RULES[rule](node, logic, cfg, options)
        return True
    if rule in _RULES:
        raise UnknownRule(f"{rule} is not a rule of {logic.logic}")
    node = Derivation(rule, node.conclusion, node.premises, node.frame, node.exists, node.subst)
    _check_axiom(node, logic, cfg, options)
    return True


def check_derivation(d: Derivation, logic: LogicId, cfg: DomainConfig,
                     options: CheckerOptions = DEFAULT_OPTIONS, _path: tuple = ()) -> Verdict:
    for i, p in enumerate(d.premises):
        v = check_derivation(p, logic, cfg, options, _path + (i,))
        if not v:
            return v
    try:
        check_rule(d, logic, cfg, options)
    except (SideConditionFailed, RuleShapeMismatch, UnknownRule, ValueError) as e:
        msg = e.args[0] if e.args else str(e)
        return Verdict(False, _path, f"{d.rule}: {msg}", type(e).__name__)
    return Verdict(True)
