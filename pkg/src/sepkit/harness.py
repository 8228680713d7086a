"""Exhaustive re-verification suites and their mutation controls.

Every suite returns a :class:`SuiteReport`.  Case ids are deterministic and
the rendered lines do not depend on timing, so two runs with the same
configuration and seed produce identical text.
"""

from __future__ import annotations

import itertools
import json
import random
import time
from dataclasses import dataclass, field, replace
from importlib import resources
from typing import Callable, Iterable, Optional

import numpy as np

from . import reference
from .assertions import (eval_assertion, heap_compat_logical, heap_compat_semantic,
                         to_dnf)
from .axioms import instances, schemas
from .checker import (CheckerOptions, Derivation, LogicId, LogicalTriple, check_derivation,
                      check_rule, semantic_triple, triple_valid)
from .closures import Pools, check_normalization, cons_step, disj_tracking_holds, map_post
from .domain import DomainConfig, Heap, MemorySet, memories_compatible, set_join
from .drvfile import parse_derivation
from .semantics import SemanticsKind, run_backward, run_forward
from .syntax import (AAnd, AExists, AFalse, AOr, Alloc, Choice, Seq, Star, free_vars,
                     parse_assertion, parse_command, show_assertion, show_command, star)

ALL_LOGICS = tuple(LogicId(lg, m) for m in (1, 2) for lg in ("sl+", "isl+", "sil+", "nc+"))


@dataclass
class CaseResult:
    case: str
    status: str            # pass | fail | skip
    detail: str = ""


@dataclass
class SuiteReport:
    suite: str
    results: list = field(default_factory=list)
    wall_time: float = 0.0
    params: dict = field(default_factory=dict)

    @property
    def cases(self) -> int:
        return sum(r.status != "skip" for r in self.results)

    @property
    def failures(self) -> list:
        return [r for r in self.results if r.status == "fail"]

    @property
    def skipped(self) -> int:
        return sum(r.status == "skip" for r in self.results)

    @property
    def ok(self) -> bool:
        return not self.failures

    def add(self, case: str, ok: bool, detail: str = ""):
        self.results.append(CaseResult(case, "pass" if ok else "fail", "" if ok else detail))

    def skip(self, case: str, why: str):
        self.results.append(CaseResult(case, "skip", why))

    def lines(self, verbose: bool = False) -> list:
        out = []
        for r in self.results:
            if r.status != "fail" and not verbose:
                continue
            line = f"suite={self.suite} case={r.case} status={r.status}"
            if r.detail:
                line += f" detail={json.dumps(r.detail)}"
            out.append(line)
        out.append(f"suite={self.suite} summary cases={self.cases} failures={len(self.failures)}"
                   f" skipped={self.skipped}")
        return out

    def summary(self) -> dict:
        return {"suite": self.suite, "cases": self.cases, "failures": len(self.failures),
                "skipped": self.skipped, "params": self.params,
                "counterexamples": [{"case": r.case, "detail": r.detail}
                                    for r in self.failures[:20]],
                "wall_time": round(self.wall_time, 3)}


def _timed(fn):
    def wrap(*a, **kw):
        t0 = time.perf_counter()
        rep = fn(*a, **kw)
        rep.wall_time = time.perf_counter() - t0
        return rep
    wrap.__name__ = fn.__name__
    wrap.__doc__ = fn.__doc__
    return wrap


def _cfg_desc(cfg: DomainConfig) -> dict:
    return {"values": list(cfg.values), "locations": list(cfg.locations),
            "program_vars": list(cfg.program_vars), "model": cfg.model}


def _logical(t, logic: LogicId) -> LogicalTriple:
    return LogicalTriple(t.pre, t.cmd, t.post, t.outcome if logic.logic == "isl+" else None)


# ----------------------------------------------------------- axiom soundness

@_timed
def suite_axiom_soundness(logic: Optional[LogicId], cfg: DomainConfig,
                          catalogue: str = "repaired", overrides=None) -> SuiteReport:
    """Every instance of every axiom of ``logic`` (all eight if None) is valid."""
    rep = SuiteReport("axiom-soundness", params={"catalogue": catalogue, **_cfg_desc(cfg)})
    for lg in ([logic] if logic else ALL_LOGICS):
        c = cfg.with_model(lg.model)
        for s in schemas(lg.logic, lg.model, catalogue, overrides):
            for inst in instances(s, c):
                t = _logical(inst, lg)
                case = f"{lg}/{s.name}/" + ",".join(f"{k}={_txt(v)}" for k, v in inst.subst)
                rep.add(case, triple_valid(t, lg, c), str(t))
    return rep


def _txt(v) -> str:
    from .axioms import _show
    return _show(v)


# -------------------------------------------------------------- preservation

FRAME_PURES = ("true", "z' = w'", "z' != w'", "x' != y'", "z' = 0")
FRAME_CELLS = ("x' |-> w'", "y' |-> _", "z' |-> w'", "z' !->", "x' #->")


def frame_pool(cfg: DomainConfig, pures=FRAME_PURES, cells=FRAME_CELLS, max_cells=2) -> list:
    """Universal frames: a pure constraint over logical variables conjoined
    with a separating product of at most ``max_cells`` primed cells."""
    cells = [c for c in cells if cfg.model == 2 or "!->" not in c]
    out = []
    for k in range(max_cells + 1):
        for combo in itertools.combinations(cells, k):
            heap = " * ".join(combo) if combo else "emp"
            for p in pures:
                text = heap if p == "true" else f"({p} && emp) * {heap}" if combo else f"{p} && emp"
                out.append(parse_assertion(text))
    return out


def _corpus_by_command(cfg: DomainConfig, side: str) -> dict:
    """Axiom pre- (or post-) conditions grouped by command, deduplicated."""
    out: dict = {}
    for lg in ("sl+", "isl+", "sil+", "nc+"):
        for s in schemas(lg, cfg.model):
            for inst in instances(s, cfg):
                a = inst.pre if side == "pre" else inst.post
                bucket = out.setdefault(inst.cmd, {})
                S = eval_assertion(a, cfg)
                bucket.setdefault(S.key(), (a, S))
    return {c: list(v.values()) for c, v in out.items()}


@_timed
def suite_preservation(cfg: DomainConfig, gate_compat: bool = True,
                       frames: Optional[list] = None, max_frames: Optional[int] = None) -> SuiteReport:
    """Framing commutes with the semantics of every atomic command.

    Forward: ``⟦c⟧(P∙R) = ⟦c⟧P ∙ R`` when ``⟦c⟧P`` does not abort and ``P ⋉ R``.
    Backward: ``⟦←c⟧(Q∙R) = ⟦←c⟧Q ∙ R`` when ``Q ⋉ R``.  Model 2 alloc with
    a frame holding deallocated cells is skipped: alloc may reuse such a cell.
    """
    rep = SuiteReport("preservation", params={"gate_compat": gate_compat, **_cfg_desc(cfg)})
    for model in (1, 2):
        c = cfg.with_model(model)
        pool = frames if frames is not None else frame_pool(c)
        pool = pool[:max_frames] if max_frames else pool
        Rs = [(R, eval_assertion(R, c), to_dnf(R, c).has_dealloc()) for R in pool]
        for direction, side in (("fw", "pre"), ("bw", "post")):
            corpus = _corpus_by_command(c, side)
            for cmd in sorted(corpus, key=show_command):
                for ai, (a, S) in enumerate(corpus[cmd]):
                    if direction == "fw":
                        base = run_forward(cmd, S, SemanticsKind.FORWARD_SL)
                        if base.abort:
                            rep.skip(f"m{model}/fw/{show_command(cmd)}/{ai}", "aborts")
                            continue
                        base_isl = run_forward(cmd, S, SemanticsKind.FORWARD_ISL)
                    else:
                        base = run_backward(cmd, S)
                    for ri, (R, RS, dealloc) in enumerate(Rs):
                        case = f"m{model}/{direction}/{show_command(cmd)}/{ai}/{ri}"
                        if gate_compat and not memories_compatible(S, RS):
                            rep.skip(case, "not heap-compatible")
                            continue
                        if direction == "fw" and model == 2 and dealloc and isinstance(cmd, Alloc):
                            rep.skip(case, "alloc may reuse a deallocated frame cell")
                            continue
                        joined = set_join(S, RS)
                        if direction == "fw":
                            got = run_forward(cmd, joined, SemanticsKind.FORWARD_SL)
                            ok = got == set_join(base.without_abort(), RS) and not got.abort
                            gi = run_forward(cmd, joined, SemanticsKind.FORWARD_ISL)
                            ok = ok and gi.ok == set_join(base_isl.ok, RS) and gi.er.is_empty()
                        else:
                            ok = run_backward(cmd, joined) == set_join(base, RS)
                        rep.add(case, ok, f"{show_assertion(a)} with frame {show_assertion(R)}")
    return rep


# -------------------------------------------------------- compatibility equiv

_GEN_PURE = ("x = y", "x' != y'", "z' = 0", "x = null", "y = x'", "z' = w'")
_GEN_HEAP = ("x |-> z'", "y |-> _", "x' |-> w'", "z' |-> 1", "x !->", "y' #->", "emp",
             "empX{x}", "empX{x,y}")


def random_assertion(rng: random.Random, cfg: DomainConfig, depth: int = 2):
    heap = [h for h in _GEN_HEAP if cfg.model == 2 or "!->" not in h]
    r = rng.random()
    if depth == 0 or r < 0.3:
        return parse_assertion(rng.choice(heap))
    if r < 0.55:
        return star([random_assertion(rng, cfg, depth - 1), random_assertion(rng, cfg, depth - 1)])
    if r < 0.75:
        return AAnd(random_assertion(rng, cfg, depth - 1), parse_assertion(rng.choice(_GEN_PURE)))
    if r < 0.9:
        return AOr(random_assertion(rng, cfg, depth - 1), random_assertion(rng, cfg, depth - 1))
    return AExists(("z'",), random_assertion(rng, cfg, depth - 1))


def figure_assertions(cfg: DomainConfig, per_schema: int = 2) -> list:
    """Pre/postconditions of axiom instances in both catalogues, plus those
    appearing in the shipped derivations."""
    out = {}
    for cat in ("literal", "repaired"):
        for lg in ("sl+", "isl+", "sil+", "nc+"):
            for s in schemas(lg, cfg.model, cat):
                for inst in itertools.islice(instances(s, cfg), per_schema):
                    out.setdefault(inst.pre, None)
                    out.setdefault(inst.post, None)
    for name in FIXTURES:
        d, _ = parse_derivation(fixture_text(name))
        for node in _nodes(d):
            out.setdefault(node.conclusion.pre, None)
            out.setdefault(node.conclusion.post, None)
            if node.frame is not None:
                out.setdefault(node.frame, None)
    return [a for a in out if cfg.model == 2 or not _mentions_dealloc(a)]


def _mentions_dealloc(a) -> bool:
    return "!->" in show_assertion(a)


@_timed
def suite_compat_equiv(cfg: DomainConfig, seed: int = 0, n_pairs: int = 600,
                       compat: Callable = heap_compat_logical) -> SuiteReport:
    """Logical compatibility agrees with semantic compatibility of denotations."""
    rep = SuiteReport("compat-equiv", params={"seed": seed, "n_pairs": n_pairs, **_cfg_desc(cfg)})
    for model in (1, 2):
        c = cfg.with_model(model)
        rng = random.Random(f"{seed}/{model}")
        figs = figure_assertions(c)
        gen = [random_assertion(rng, c) for _ in range(60)]
        corpus = figs + gen
        # every figure assertion meets a random partner, then seeded pairs fill up
        pairs = [(a, rng.choice(corpus)) for a in figs]
        while len(pairs) < n_pairs:
            pairs.append((rng.choice(corpus), rng.choice(corpus)))
        for i, (a, b) in enumerate(pairs):
            want = heap_compat_semantic(eval_assertion(a, c), eval_assertion(b, c))
            got = compat(a, b, c)
            rep.add(f"m{model}/{i}", got == want,
                    f"{show_assertion(a)} vs {show_assertion(b)}: logical={got} semantic={want}")
    return rep


# ------------------------------------------------------------- normalization

REDUCED = dict(values=(0, 1), locations=(1,))


def _wrong_cons(t, C):
    # grows where the kind only lets the side shrink and vice versa
    k = t.kind
    grow = k.sense != "over"
    if k.direction == "forward":
        move = (lambda s: s | C) if grow else (lambda s: s & C)
        return replace(t, post=map_post(t.post, move))
    return replace(t, pre=(t.pre | C) if grow else (t.pre & C))


@_timed
def suite_normalization(cfg: Optional[DomainConfig] = None, k: int = 3,
                        cons_fn: Callable = cons_step, max_seeds: Optional[int] = None) -> SuiteReport:
    """Closure interleavings of length ≤ k reduce to cons ∘ exists ∘ frame, and
    Disj equals an existential over an indexed family."""
    base = cfg or DomainConfig(**REDUCED)
    rep = SuiteReport("normalization", params={"k": k, **_cfg_desc(base)})
    for model in (1, 2):
        c = base.with_model(model)
        frames = tuple(eval_assertion(parse_assertion(s), c)
                       for s in ("z' |-> w'", "z' = 0 && emp", "x' |-> _"))
        exists = (("z'",), ("x'",))
        cons = tuple(eval_assertion(parse_assertion(s), c) for s in ("x = 0 && true", "emp"))
        pools = Pools(frames, exists, cons, k=k)
        for lg in ("sl+", "isl+", "sil+", "nc+"):
            L = LogicId(lg, model)
            seeds, names = [], []
            for s in schemas(lg, model):
                for inst in instances(s, c):
                    seeds.append(semantic_triple(_logical(inst, L), L, c))
                    names.append(s.name)
            if max_seeds:
                seeds, names = seeds[:max_seeds], names[:max_seeds]
            for i, seed in enumerate(seeds):
                r = check_normalization([seed], pools, c, cons_fn=cons_fn)
                if r.failures:
                    f = r.failures[0]
                    rep.add(f"{L}/{names[i]}/{i}", False, f"{' '.join(f.ops)}: {f.reason}")
                else:
                    rep.add(f"{L}/{names[i]}/{i}", True)
            # disjunction tracking on pairs of seeds sharing a command
            by_cmd: dict = {}
            for s in seeds:
                by_cmd.setdefault(s.cmd, []).append(s)
            for j, (cmd, group) in enumerate(sorted(by_cmd.items(), key=lambda kv: show_command(kv[0]))):
                fam = group[: min(len(group), c.V)]
                rep.add(f"{L}/disj/{show_command(cmd)}", disj_tracking_holds(fam),
                        "disjunction differs from indexed existential")
    return rep


# ------------------------------------------------------------ expressiveness

FIXTURES = ("sl_more_expressive", "isl_more_expressive", "isl_paper_frames", "wrong_frame")


def fixture_text(name: str) -> str:
    return resources.files("sepkit").joinpath("fixtures", f"{name}.drv").read_text()


def _nodes(d: Derivation):
    yield d
    for p in d.premises:
        yield from _nodes(p)


# expected verdicts of the shipped fixtures: (accepted, error class when rejected)
EXPECTED_FIXTURES = {
    "sl_more_expressive": (True, ""),
    "isl_more_expressive": (True, ""),
    "isl_paper_frames": (False, "SideConditionFailed"),
    "wrong_frame": (False, "SideConditionFailed"),
}

# small derivations probing single checker rules: (logic, text, accepted)
PROBES = {
    "nc+-cons-backward-direction": ("nc+1", """
        (rule Cons :conclusion "{(exists z'. empX{x,y} * x |-> z') || x = 0 && emp} free(x) {empX{x,y}}"
          (premise Free1 :conclusion "{exists z'. empX{x,y} * x |-> z'} free(x) {empX{x,y}}"))""", True),
    "nc+-cons-forward-direction": ("nc+1", """
        (rule Cons :conclusion "{empX{x,y} * x |-> 0} free(x) {empX{x,y}}"
          (premise Free1 :conclusion "{exists z'. empX{x,y} * x |-> z'} free(x) {empX{x,y}}"))""", False),
    "sl+2-alloc-dealloc-frame": ("sl+2", """
        (rule Frame :conclusion "{empX{x,y} * l' !->} x := alloc() {(exists z'. empX{y} * x |-> z') * l' !->}"
          :frame "l' !->"
          (premise Alloc :conclusion "{empX{x,y}} x := alloc() {exists z'. empX{y} * x |-> z'}"))""", False),
    "sl+1-cons-weaken-post": ("sl+1", """
        (rule Cons :conclusion "{empX{x,y} * x |-> z'} free(x) {true}"
          (premise Free :conclusion "{empX{x,y} * x |-> z'} free(x) {empX{x,y}}"))""", True),
}


@_timed
def suite_expressiveness(cfg: DomainConfig, options: CheckerOptions = CheckerOptions()) -> SuiteReport:
    """Shipped derivations get their expected verdicts and accepted roots are valid.

    The derivation texts spell out the default location set, so they are
    always checked at the default domain whatever ``cfg`` says.
    """
    cfg = DomainConfig()
    rep = SuiteReport("expressiveness", params=_cfg_desc(cfg))
    items = [(n, fixture_text(n), EXPECTED_FIXTURES[n]) for n in FIXTURES]
    items += [(n, text, (acc, "")) for n, (lg, text, acc) in PROBES.items()]
    for name, text, (want, want_err) in items:
        d, logic = parse_derivation(text)
        if logic is None:
            logic = LogicId.parse(PROBES[name][0])
        c = cfg.with_model(logic.model)
        v = check_derivation(d, logic, c, options)
        ok = bool(v) == want and (want or not want_err or v.error == want_err)
        detail = str(v)
        if v:
            valid = triple_valid(d.conclusion, logic, c)
            ok = ok and valid
            detail += "" if valid else "; root is not valid"
        rep.add(name, ok, detail)
    return rep


# ------------------------------------------------------- random derivations

class DerivationGenerator:
    """Seeded random construction of derivations built rule by rule.

    Each step builds a conclusion in the exact shape its rule prescribes and
    keeps it only if :func:`check_rule` accepts it, so every derivation
    returned is accepted by the checker.
    """

    def __init__(self, logic: LogicId, cfg: DomainConfig, rng: random.Random,
                 options: CheckerOptions = CheckerOptions()):
        self.logic, self.cfg, self.rng, self.options = logic, cfg, rng, options
        self.insts = []
        for s in schemas(logic.logic, logic.model, options.catalogue, options.overrides()):
            self.insts.extend(instances(s, cfg))
        self.frames = frame_pool(cfg, pures=("true", "z' = w'", "x' != y'"),
                                 cells=("x' |-> w'", "y' |-> _", "w' |-> 1", "w' !->", "x' #->"))
        pv = cfg.program_vars
        self.pures = [parse_assertion(t) for t in (f"{pv[0]} = 0", f"{pv[0]} = {pv[1]}",
                                                    "z' = 1", f"{pv[0]} != null")]
        self.extras = [parse_assertion(t) for t in ("emp", f"{pv[0]} |-> 1", "true")]

    # -- helpers
    def _try(self, d: Derivation) -> Optional[Derivation]:
        try:
            check_rule(d, self.logic, self.cfg, self.options)
        except Exception:
            return None
        return d

    def axiom(self) -> Derivation:
        inst = self.rng.choice(self.insts)
        return Derivation(inst.schema.name, _logical(inst, self.logic),
                          subst={k: _txt(v) for k, v in inst.subst})

    def _grow_pre(self) -> bool:
        return self.logic.logic in ("isl+", "nc+")

    def cons(self, d, pre=None, post=None) -> Optional[Derivation]:
        t = d.conclusion
        pre = t.pre if pre is None else pre
        post = t.post if post is None else post
        return self._try(Derivation("Cons", LogicalTriple(pre, t.cmd, post, t.outcome), [d]))

    def random_cons(self, d):
        t = d.conclusion
        rng = self.rng
        grow_pre = self._grow_pre()
        pre, post = t.pre, t.post
        if rng.random() < 0.6:
            pre = AOr(pre, rng.choice(self.extras)) if grow_pre else AAnd(pre, rng.choice(self.pures))
        if rng.random() < 0.6 or pre is t.pre:
            post = AAnd(post, rng.choice(self.pures)) if grow_pre else AOr(post, rng.choice(self.extras))
        return self.cons(d, pre, post)

    def frame(self, d):
        R = self.rng.choice(self.frames)
        t = d.conclusion
        return self._try(Derivation("Frame", LogicalTriple(star([t.pre, R]), t.cmd,
                                                           star([t.post, R]), t.outcome),
                                    [d], frame=R))

    def exists(self, d):
        t = d.conclusion
        cand = sorted(v for v in free_vars(t.pre) | free_vars(t.post)
                      if v.endswith("'") and v not in self.cfg.program_vars)
        if not cand:
            return None
        X = tuple(sorted(self.rng.sample(cand, self.rng.choice([1, min(2, len(cand))]))))
        return self._try(Derivation("Exists", LogicalTriple(AExists(X, t.pre), t.cmd,
                                                            AExists(X, t.post), t.outcome),
                                    [d], exists=X))

    def _same_cmd_partner(self, d):
        t = d.conclusion
        cands = [i for i in self.insts if i.cmd == t.cmd and
                 (self.logic.logic != "isl+" or i.outcome == t.outcome)]
        if not cands:
            return None
        inst = self.rng.choice(cands)
        return Derivation(inst.schema.name, _logical(inst, self.logic),
                          subst={k: _txt(v) for k, v in inst.subst})

    def disj(self, d):
        e = self._same_cmd_partner(d) if isinstance(d.conclusion.cmd, tuple(_atomic())) else None
        if e is None:
            e = self.empty_for(d.conclusion)
        if e is None:
            return None
        a, b = d.conclusion, e.conclusion
        return self._try(Derivation("Disj", LogicalTriple(AOr(a.pre, b.pre), a.cmd,
                                                          AOr(a.post, b.post), a.outcome), [d, e]))

    def empty_for(self, t):
        lg = self.logic.logic
        if lg in ("sl+", "sil+"):
            concl = LogicalTriple(AFalse(), t.cmd, t.post, t.outcome)
        else:
            concl = LogicalTriple(t.pre, t.cmd, AFalse(), t.outcome)
        return self._try(Derivation("Empty", concl))

    def choice(self, d):
        e = self.axiom()
        a, b = d.conclusion, e.conclusion
        lg = self.logic.logic
        if lg == "isl+":
            if a.outcome != b.outcome:
                return None
            P = AOr(a.pre, b.pre)
            d2, e2 = self.cons(d, pre=P), self.cons(e, pre=P)
            if not (d2 and e2):
                return None
            concl = LogicalTriple(P, Choice(a.cmd, b.cmd), AOr(a.post, b.post), a.outcome)
        elif lg == "sil+":
            Q = AOr(a.post, b.post)
            d2, e2 = self.cons(d, post=Q), self.cons(e, post=Q)
            if not (d2 and e2):
                return None
            concl = LogicalTriple(AOr(a.pre, b.pre), Choice(a.cmd, b.cmd), Q)
        else:
            if lg == "sl+":
                P, Q = AAnd(a.pre, b.pre), AOr(a.post, b.post)
            else:
                P, Q = AOr(a.pre, b.pre), AAnd(a.post, b.post)
            d2, e2 = self.cons(d, P, Q), self.cons(e, P, Q)
            if not (d2 and e2):
                return None
            concl = LogicalTriple(P, Choice(a.cmd, b.cmd), Q)
        return self._try(Derivation("Choice", concl, [d2, e2]))

    def seq(self, d):
        t = d.conclusion
        lg = self.logic.logic
        if lg == "isl+" and t.outcome == "er":
            nxt = self.rng.choice(self.insts).cmd
            return self._try(Derivation("SeqEr", LogicalTriple(t.pre, Seq(t.cmd, nxt), t.post, "er"), [d]))
        Q = eval_assertion(t.post, self.cfg)
        cands = list(self.insts)
        self.rng.shuffle(cands)
        for inst in cands[:40]:
            e = Derivation(inst.schema.name, _logical(inst, self.logic),
                           subst={k: _txt(v) for k, v in inst.subst})
            for variant in (e, self.exists(e), self.frame(e)):
                if variant is None:
                    continue
                P2 = eval_assertion(variant.conclusion.pre, self.cfg)
                if lg in ("sl+", "sil+") and Q <= P2:
                    e2 = self.cons(variant, pre=t.post) if Q != P2 else variant
                elif lg in ("isl+", "nc+") and P2 <= Q:
                    e2 = self.cons(variant, pre=t.post) if Q != P2 else variant
                else:
                    continue
                if e2 is None:
                    continue
                u = e2.conclusion
                out = self._try(Derivation("Seq", LogicalTriple(t.pre, Seq(t.cmd, u.cmd), u.post,
                                                                u.outcome), [d, e2]))
                if out:
                    return out
        return None

    def iterate(self, d):
        t = d.conclusion
        lg = self.logic.logic
        star_cmd = Star(t.cmd)
        if lg in ("sl+", "nc+"):
            P, Q = eval_assertion(t.pre, self.cfg), eval_assertion(t.post, self.cfg)
            if lg == "sl+" and Q <= P:
                inv = self.cons(d, post=t.pre) if Q != P else d
            elif lg == "nc+" and P <= Q:
                inv = self.cons(d, pre=t.post) if Q != P else d
                if inv is not None:
                    t = inv.conclusion
            else:
                return None
            if inv is None:
                return None
            I = inv.conclusion.pre
            return self._try(Derivation("Iterate", LogicalTriple(I, star_cmd, I), [inv]))
        zero = self._try(Derivation("IterateZero", LogicalTriple(t.pre, star_cmd, t.pre,
                                                                 "ok" if lg == "isl+" else None)))
        if zero is None:
            return None
        body = self._try(Derivation("Seq", LogicalTriple(t.pre, Seq(star_cmd, t.cmd), t.post,
                                                         t.outcome), [zero, d]))
        if body is None:
            return None
        return self._try(Derivation("Iterate", LogicalTriple(t.pre, star_cmd, t.post, t.outcome),
                                    [body]))

    OPS = ("frame", "exists", "cons", "disj", "choice", "seq", "iterate")

    def derivation(self, steps: int) -> tuple:
        d = self.axiom()
        used = [d.rule]
        for _ in range(steps):
            op = self.rng.choice(self.OPS)
            nxt = getattr(self, op if op != "cons" else "random_cons")(d)
            if nxt:
                d = nxt
                used.append(nxt.rule)
        return d, used


def _atomic():
    from .syntax import ATOMIC
    return ATOMIC


def _size(d: Derivation) -> int:
    return 1 + sum(_size(p) for p in d.premises)


@_timed
def suite_random_derivations(cfg: DomainConfig, seed: int = 0, n: int = 200,
                             options: CheckerOptions = CheckerOptions(),
                             max_steps: int = 4) -> SuiteReport:
    """Seeded random accepted derivations all have semantically valid roots."""
    rep = SuiteReport("random-derivations", params={"seed": seed, "n": n, **_cfg_desc(cfg)})
    gens = {}
    for i in range(n):
        logic = ALL_LOGICS[i % len(ALL_LOGICS)]
        c = cfg.with_model(logic.model)
        rng = random.Random(f"{seed}/{i}")
        if logic not in gens:
            gens[logic] = DerivationGenerator(logic, c, rng, options)
        g = gens[logic]
        g.rng = rng
        d, used = g.derivation(rng.randint(1, max_steps))
        v = check_derivation(d, logic, c, options)
        if not v:
            rep.add(f"{i}/{logic}", False, f"generator produced a rejected derivation: {v}")
            continue
        ok = triple_valid(d.conclusion, logic, c)
        rep.add(f"{i}/{logic}/{'-'.join(used)}", ok, str(d.conclusion))
    return rep


# ------------------------------------------------------- backward adjunction

ADJ_ATOMS = ("x := alloc()", "free(x)", "y := [x]", "[x] := y", "x := y + 1", "(x = y)?",
             "error()")


def commands_up_to(atoms: Iterable, depth: int) -> list:
    """All commands of nesting depth ≤ ``depth`` (atoms have depth 1)."""
    levels = [list(atoms)]
    everything = list(atoms)
    for _ in range(depth - 1):
        prev = everything
        new = []
        for a in prev:
            for b in prev:
                if a in levels[-1] or b in levels[-1]:
                    new.append(Seq(a, b))
                    new.append(Choice(a, b))
        new += [Star(a) for a in levels[-1]]
        levels.append(new)
        everything = prev + new
    return everything


def _dense_to_vec(S: MemorySet, U: reference.Universe, codes) -> np.ndarray:
    S = S.extend(U.vars)
    idx = tuple(codes[:, i] for i in range(codes.shape[1]))
    return S.bits[idx]


def _universe_codes(U: reference.Universe, cfg: DomainConfig, order) -> np.ndarray:
    rows = []
    for s, h in U.states:
        rows.append([cfg.encode_value(s[v]) for v in order] + [cfg.encode_heap(Heap.of(h))])
    return np.array(rows, dtype=np.int64)


def _star_once(r):
    if isinstance(r, Star):
        return Choice(parse_command("true?"), _star_once(r.body))
    if isinstance(r, Seq):
        return Seq(_star_once(r.first), _star_once(r.second))
    if isinstance(r, Choice):
        return Choice(_star_once(r.left), _star_once(r.right))
    return r


def backward_star_once(r, Q):
    """Deliberately wrong backward semantics unrolling each loop once."""
    return run_backward(_star_once(r), Q)


@_timed
def suite_adjunction(cfg: DomainConfig, depth: int = 3, seed: int = 0,
                     backward: Callable = run_backward, atoms=ADJ_ATOMS) -> SuiteReport:
    """``run_backward`` agrees with preimages under an independently built
    transition relation for every command of depth ≤ ``depth``."""
    rep = SuiteReport("adjunction", params={"depth": depth, "seed": seed, **_cfg_desc(cfg)})
    for model in (1, 2):
        c = cfg.with_model(model)
        order = tuple(c.program_vars)
        U = reference.Universe.build(c, order)
        codes = _universe_codes(U, c, order)
        rng = np.random.default_rng(seed + model)
        # several targets at once: an index variable q' selects the target
        targets = [eval_assertion(parse_assertion(t), c) for t in
                   ("emp", f"{order[0]} |-> _ * true")]
        shape = (c.V,) * len(order) + (c.H,)
        while len(targets) < c.V:
            targets.append(MemorySet(c, order, rng.random(shape) < 0.3))
        Qs = [_dense_to_vec(T, U, codes) for T in targets]
        q = "a'"
        combined = None
        for i, T in enumerate(targets):
            tag = eval_assertion(parse_assertion(f"{q} = {i} && true"), c) if i < c.n else \
                eval_assertion(parse_assertion(f"{q} = null && true"), c)
            part = T & tag
            combined = part if combined is None else combined | part
        cache: dict = {}
        cmds = commands_up_to([parse_command(a) for a in atoms], depth)
        for j, r in enumerate(cmds):
            got = backward(r, combined).extend(order + (q,))
            rel = reference.relation(r, U, cache)
            ok = True
            for i, vec in enumerate(Qs):
                want = (rel.ok @ vec.astype(np.int32)) > 0
                sl = got.bits.take(i, axis=got.vars.index(q))
                sub = MemorySet(c, tuple(v for v in got.vars if v != q), sl)
                if not np.array_equal(_dense_to_vec(sub, U, codes), want):
                    ok = False
                    break
            rep.add(f"m{model}/{j}", ok, f"{show_command(r)} target {i}")
    return rep


# ----------------------------------------------------------------- mutations

@dataclass(frozen=True)
class Mutation:
    name: str
    suite: str
    description: str
    kwargs: dict = field(default_factory=dict, hash=False, compare=False)


MUTATIONS = {m.name: m for m in [
    Mutation("free-post", "axiom-soundness", "SL+ Free concludes x |-> z' instead of emp",
             {"overrides": {("sl+", "Free"): {"post": "{EMP} * {x} |-> {z}"}}}),
    Mutation("load-post", "axiom-soundness", "ISL+ Load forgets x = z' in the post",
             {"overrides": {("isl+", "Load"): {"post": "{EMPX} * {y} |-> {z}"}}}),
    Mutation("alloc-reuse", "axiom-soundness", "NC+ Alloc2 ignores reuse of deallocated cells",
             {"overrides": {("nc+", "Alloc2"): {"pre": "{EMPX} && {LOC}"}}}),
    Mutation("frame-no-compat", "expressiveness", "Frame skips the heap-compatibility check",
             {"options": CheckerOptions(frame_compat=False)}),
    Mutation("cons-flip", "expressiveness", "Cons uses the opposite implication directions",
             {"options": CheckerOptions(cons_flip=True)}),
    Mutation("no-alloc-guard", "expressiveness",
             "SL+ model 2 Frame admits deallocated cells around alloc",
             {"options": CheckerOptions(model2_alloc_guard=False)}),
    Mutation("preservation-ungated", "preservation", "framing without heap compatibility",
             {"gate_compat": False, "max_frames": 10}),
    Mutation("broken-compat", "compat-equiv", "logical compatibility always holds",
             {"compat": lambda a, b, c: True}),
    Mutation("cons-wrong-direction", "normalization", "consequence moves the wrong side",
             {"cons_fn": _wrong_cons, "max_seeds": 4}),
    Mutation("backward-star-once", "adjunction", "backward semantics unrolls loops once",
             {"backward": backward_star_once, "depth": 2}),
]}

SUITES = ("axiom-soundness", "preservation", "compat-equiv", "normalization",
          "expressiveness", "random-derivations", "adjunction")


def run_suite(name: str, cfg: DomainConfig, logic: Optional[LogicId] = None, seed: int = 0,
              mutation: Optional[str] = None) -> SuiteReport:
    kw = {}
    if mutation:
        m = MUTATIONS[mutation]
        if m.suite == name:
            kw = dict(m.kwargs)
        elif name == "random-derivations" and "options" in m.kwargs:
            kw = {"options": m.kwargs["options"]}
    if name == "axiom-soundness":
        return suite_axiom_soundness(logic, cfg, **kw)
    if name == "preservation":
        return suite_preservation(cfg, **kw)
    if name == "compat-equiv":
        return suite_compat_equiv(cfg, seed=seed, **kw)
    if name == "normalization":
        return suite_normalization(DomainConfig(**REDUCED, program_vars=cfg.program_vars), **kw)
    if name == "expressiveness":
        return suite_expressiveness(cfg, **kw)
    if name == "random-derivations":
        return suite_random_derivations(cfg, seed=seed, **kw)
    if name == "adjunction":
        return suite_adjunction(cfg, seed=seed, **kw)
    raise KeyError(name)
