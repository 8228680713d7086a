"""Semantic triples, their validity, and the closure operators on them."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence, Union

from .assertions import is_universal_set
from .domain import (DomainConfig, MemorySet, TaggedMemorySet, is_logical_name,
                     memories_compatible, set_join)
from .semantics import SemanticsKind, run_backward, run_forward
from .syntax import Command, show_command


@dataclass(frozen=True)
class TripleKind:
    direction: str          # "forward" | "backward"
    sense: str              # "over" | "under"
    error_handling: bool = False

    def __str__(self):
        return f"{self.direction}-{self.sense}" + ("+er" if self.error_handling else "")


FORWARD_OVER = TripleKind("forward", "over")
FORWARD_UNDER_ER = TripleKind("forward", "under", True)
FORWARD_UNDER = TripleKind("forward", "under")
BACKWARD_OVER = TripleKind("backward", "over")
BACKWARD_UNDER = TripleKind("backward", "under")

Post = Union[MemorySet, TaggedMemorySet]


@dataclass(frozen=True)
class SemTriple:
    """``pre`` is the ok-tagged input for error-handling kinds; ``post`` is then
    a :class:`TaggedMemorySet`."""

    pre: MemorySet
    cmd: Command
    post: Post
    kind: TripleKind

    def __post_init__(self):
        if self.kind.error_handling != isinstance(self.post, TaggedMemorySet):
            raise ValueError("post shape does not match the triple kind")

    def __str__(self):
        return f"<{self.kind}: {self.pre!r} {show_command(self.cmd)} {self.post!r}>"


@dataclass(frozen=True)
class Rejected:
    reason: str

    def __bool__(self):
        return False


class NotUniversalFrame(ValueError):
    pass


class KindMismatch(ValueError):
    pass


def map_post(post: Post, f: Callable[[MemorySet], MemorySet]) -> Post:
    if isinstance(post, TaggedMemorySet):
        return TaggedMemorySet(f(post.ok), f(post.er))
    return f(post)


def _flat_post(post: Post) -> MemorySet:
    return post.ok | post.er if isinstance(post, TaggedMemorySet) else post


def is_valid(t: SemTriple, cfg: DomainConfig | None = None) -> bool:
    k = t.kind
    if k.direction == "forward":
        if k.error_handling:
            got = run_forward(t.cmd, TaggedMemorySet.of_ok(t.pre), SemanticsKind.FORWARD_ISL)
            return got <= t.post if k.sense == "over" else t.post <= got
        got = run_forward(t.cmd, t.pre, SemanticsKind.FORWARD_SL)
        if k.sense == "over":
            return got <= t.post
        return t.post <= got.without_abort()
    pre = run_backward(t.cmd, _flat_post(t.post))
    return pre <= t.pre if k.sense == "over" else t.pre <= pre


def _check_logical(X: Iterable[str], cfg: DomainConfig):
    for v in X:
        if v in cfg.program_vars or not is_logical_name(v):
            raise ValueError(f"{v} is not a logical variable")


def apply_exists(t: SemTriple, X: Iterable[str]) -> SemTriple:
    X = tuple(X)
    _check_logical(X, t.pre.cfg)
    return SemTriple(t.pre.exists(X), t.cmd, map_post(t.post, lambda s: s.exists(X)), t.kind)


def frame_compatible(t: SemTriple, R: MemorySet) -> bool:
    side = t.pre if t.kind.direction == "forward" else _flat_post(t.post)
    return memories_compatible(side, R)


def apply_frame(t: SemTriple, R: MemorySet, check_compat: bool = True) -> Union[SemTriple, Rejected]:
    if not is_universal_set(R):
        raise NotUniversalFrame("frame constrains program variables")
    if check_compat and not frame_compatible(t, R):
        side = "pre" if t.kind.direction == "forward" else "post"
        return Rejected(f"frame is not heap-compatible with the {side}condition")
    return SemTriple(set_join(t.pre, R), t.cmd, map_post(t.post, lambda s: set_join(s, R)), t.kind)


def _post_le(a: Post, b: Post) -> bool:
    return a <= b


def apply_cons(t: SemTriple, new_pre: MemorySet, new_post: Post,
               allow_cons2: bool = False) -> Union[SemTriple, Rejected]:
    k = t.kind
    if k.direction == "forward":
        grows = k.sense == "over"
        ok_post = _post_le(t.post, new_post) if grows else _post_le(new_post, t.post)
        if allow_cons2:
            ok_pre = new_pre <= t.pre if grows else t.pre <= new_pre
        else:
            ok_pre = new_pre == t.pre
        if not ok_post:
            return Rejected("postcondition moves in the wrong direction")
        if not ok_pre:
            return Rejected("precondition change not permitted")
    else:
        grows = k.sense == "over"
        ok_pre = t.pre <= new_pre if grows else new_pre <= t.pre
        if allow_cons2:
            ok_post = _post_le(new_post, t.post) if grows else _post_le(t.post, new_post)
        else:
            ok_post = new_post == t.post
        if not ok_pre:
            return Rejected("precondition moves in the wrong direction")
        if not ok_post:
            return Rejected("postcondition change not permitted")
    return SemTriple(new_pre, t.cmd, new_post, t.kind)


def apply_disj(ts: Sequence[SemTriple]) -> SemTriple:
    ts = list(ts)
    if not ts:
        raise ValueError("empty disjunction")
    first = ts[0]
    for t in ts[1:]:
        if t.kind != first.kind or t.cmd != first.cmd:
            raise KindMismatch("disjuncts differ in kind or command")
    pre, post = first.pre, first.post
    for t in ts[1:]:
        pre = pre | t.pre
        post = post | t.post
    return SemTriple(pre, first.cmd, post, first.kind)


# ------------------------------------------------------------- normalization

@dataclass(frozen=True)
class Pools:
    frames: tuple = ()          # universal MemorySets
    exists: tuple = ()          # tuples of logical variables
    cons: tuple = ()            # MemorySets used to widen/narrow one side
    k: int = 3


def cons_step(t: SemTriple, C: MemorySet) -> Union[SemTriple, Rejected]:
    """One consequence step using ``C``: grow or shrink the side the kind lets move."""
    k = t.kind
    grow = k.sense == "over"
    if k.direction == "forward":
        move = (lambda s: s | C) if grow else (lambda s: s & C)
        return apply_cons(t, t.pre, map_post(t.post, move))
    newP = (t.pre | C) if grow else (t.pre & C)
    return apply_cons(t, newP, t.post)


@dataclass
class NormalizationFailure:
    seed: int
    ops: tuple
    reason: str


@dataclass
class NormalizationReport:
    cases: int = 0
    failures: list = field(default_factory=list)


def _fresh_names(used: set):
    i = 0
    while True:
        name = f"n{i}'"
        if name not in used:
            used.add(name)
            yield name
        i += 1


def _describe(op) -> str:
    kind, arg = op
    return f"{kind}[{arg}]"


def normal_form_witness(seed: SemTriple, ops: Sequence[tuple], pools: Pools,
                        cons_ok: Callable = None):
    """Build the frame-then-exists decomposition of a closure sequence.

    Exists steps rename the bound variables apart in the seed and in every
    frame applied so far, so later frames can reuse the names.  Returns
    ``(renamed seed, frames, bound)``.
    """
    used = set(seed.pre.vars) | set(_flat_post(seed.post).vars)
    for f in pools.frames:
        used |= set(f.vars)
    fresh = _fresh_names(used)
    renaming: dict = {}
    frames: list = []
    bound: list = []
    for kind, arg in ops:
        if kind == "frame":
            frames.append(pools.frames[arg])
        elif kind == "exists":
            X = pools.exists[arg]
            step = {x: next(fresh) for x in X}
            renaming = {k: step.get(v, v) for k, v in renaming.items()}
            for x, y in step.items():
                if x not in renaming:
                    renaming[x] = y
            frames = [f.rename(step) for f in frames]
            bound += list(step.values())
    seed_vars = set(seed.pre.vars) | set(_flat_post(seed.post).vars)
    ren = {k: v for k, v in renaming.items() if k in seed_vars}
    renamed = SemTriple(seed.pre.rename(ren), seed.cmd,
                        map_post(seed.post, lambda s: s.rename(ren)), seed.kind)
    return renamed, frames, tuple(bound)


def check_normalization(seeds: Sequence[SemTriple], pools: Pools,
                        cfg: DomainConfig | None = None,
                        cons_fn: Callable = cons_step,
                        frame_check: bool = True) -> NormalizationReport:
    """Every triple reachable with at most ``pools.k`` closure steps has a
    cons∘exists∘frame witness built from the same seed."""
    report = NormalizationReport()
    ops = ([("frame", i) for i in range(len(pools.frames))]
           + [("exists", i) for i in range(len(pools.exists))]
           + [("cons", i) for i in range(len(pools.cons))])
    for si, seed in enumerate(seeds):
        # breadth-first over op sequences; dead branches are pruned
        layer = [((), seed)]
        for depth in range(pools.k + 1):
            nxt = []
            for seq_ops, t in layer:
                report.cases += 1
                reason = _witness(seed, seq_ops, t, pools)
                if reason:
                    report.failures.append(NormalizationFailure(
                        si, tuple(_describe(o) for o in seq_ops), reason))
                if depth == pools.k:
                    continue
                for op in ops:
                    kind, arg = op
                    if kind == "frame":
                        t2 = apply_frame(t, pools.frames[arg], check_compat=frame_check)
                    elif kind == "exists":
                        t2 = apply_exists(t, pools.exists[arg])
                    else:
                        t2 = cons_fn(t, pools.cons[arg])
                    if isinstance(t2, Rejected):
                        continue
                    nxt.append((seq_ops + (op,), t2))
            layer = nxt
    return report


def _witness(seed, seq_ops, target, pools) -> str:
    renamed, frames, bound = normal_form_witness(seed, seq_ops, pools)
    cur = renamed
    if frames:
        R = frames[0]
        for f in frames[1:]:
            R = set_join(R, f)
        cur = apply_frame(cur, R)
        if isinstance(cur, Rejected):
            return f"normal-form frame rejected: {cur.reason}"
    cur = apply_exists(cur, bound)
    final = apply_cons(cur, target.pre, target.post)
    if isinstance(final, Rejected):
        return f"normal-form consequence fails: {final.reason}"
    return ""


def disj_tracking_holds(ts: Sequence[SemTriple], index_var: str = "d'") -> bool:
    """Disjunction equals an existential over an indexed union.

    For triples ``(P_i, c, Q_i)`` indexed by values ``i`` of a fresh logical
    variable, ``disj`` of the family equals ``∃d'.(⋃ P_i ∧ d'=i, c, ⋃ Q_i ∧ d'=i)``.
    """
    import numpy as np

    ts = list(ts)
    cfg = ts[0].pre.cfg
    if len(ts) > cfg.V:
        raise ValueError("not enough values to index the family")

    def tag(S: MemorySet, i: int) -> MemorySet:
        S = S.extend([index_var])
        ax = S.vars.index(index_var)
        mask = np.zeros(cfg.V, dtype=bool)
        mask[i] = True
        shape = [1] * S.bits.ndim
        shape[ax] = cfg.V
        return MemorySet(cfg, S.vars, S.bits & mask.reshape(shape), S.abort)

    pre = tag(ts[0].pre, 0)
    post = map_post(ts[0].post, lambda s: tag(s, 0))
    for i, t in enumerate(ts[1:], start=1):
        pre = pre | tag(t.pre, i)
        post = post | map_post(t.post, lambda s, i=i: tag(s, i))
    indexed = apply_exists(SemTriple(pre, ts[0].cmd, post, ts[0].kind), [index_var])
    direct = apply_disj(ts)
    return indexed.pre == direct.pre and indexed.post == direct.post
