"""Forward (SL and ISL style) and backward collecting semantics.

Every atomic command is compiled, for a fixed variable tuple, into a list of
transitions ``(enabled, target_store, target_heap)`` over the flat universe
of (store, heap) indices plus a ``fault`` mask.  Forward execution scatters
along transitions, backward execution gathers.  Faults become ``abort``
under SL semantics and ``er`` (state unchanged) under ISL semantics.
"""

from __future__ import annotations

import enum
from functools import lru_cache
from typing import Union

import numpy as np

from .assertions import eval_bexpr_grid, eval_expr_grid
from .domain import (DomainConfig, Memory, MemorySet, TaggedMemorySet,
                     _sorted_vars)
from .syntax import (ATOMIC, Alloc, Assign, Assume, Choice, Command, Error,
                     Free, Load, Seq, Star, StoreCmd, command_vars)


class SemanticsKind(enum.Enum):
    FORWARD_SL = "forward_sl"
    FORWARD_ISL = "forward_isl"
    BACKWARD_SL = "backward_sl"


class _Table:
    __slots__ = ("transitions", "fault")

    def __init__(self, transitions, fault):
        self.transitions = transitions
        self.fault = fault


def _digits(cfg: DomainConfig, k: int):
    S = cfg.V ** k
    s = np.arange(S)
    strides = [cfg.V ** (k - 1 - i) for i in range(k)]
    return s, [(s // st) % cfg.V for st in strides], strides


@lru_cache(maxsize=512)
def _table(c: Command, vs: tuple, cfg: DomainConfig) -> _Table:
    k = len(vs)
    S, H = cfg.V ** k, cfg.H
    s, dig, stride = _digits(cfg, k)
    s_col = s[:, None]
    h_row = np.arange(H)[None, :]
    full = (S, H)
    cells = cfg.heap_cells

    def flat(arr):
        return np.broadcast_to(arr, (cfg.V,) * k).reshape(S)

    def value_cell(cell):
        return (cell >= 1) & (cell <= cfg.V)

    def access(var):
        """(enabled (S,H), li (S,1), cell (S,H)) for the cell addressed by var."""
        li = cfg.loc_index[dig[vs.index(var)]]
        safe = np.maximum(li, 0)
        cell = cells[:, :][np.arange(H)[None, :], safe[:, None]] if cfg.L else np.zeros(full, int)
        ok = (li[:, None] >= 0) & value_cell(cell)
        return ok, safe[:, None], cell

    trans, fault = [], np.zeros(full, dtype=bool)
    if isinstance(c, Assume):
        cond = flat(eval_bexpr_grid(c.cond, vs, cfg))
        trans.append((np.broadcast_to(cond[:, None], full), s_col, h_row))
    elif isinstance(c, Error):
        fault = np.ones(full, dtype=bool)
    elif isinstance(c, Assign):
        i = vs.index(c.var)
        ev = flat(eval_expr_grid(c.expr, vs, cfg))
        ns = s + (ev - dig[i]) * stride[i]
        trans.append((np.ones(full, dtype=bool), ns[:, None], h_row))
    elif isinstance(c, Alloc):
        i = vs.index(c.var)
        for li, loc in enumerate(cfg.locations):
            free = cells[:, li] == 0
            if cfg.model == 2:
                free = free | (cells[:, li] == cfg.bot_code)
            ns = s + (loc - dig[i]) * stride[i]
            for v in range(cfg.V):
                nh = cfg.heap_set[:, li, 1 + v]
                trans.append((np.broadcast_to(free[None, :], full), ns[:, None], nh[None, :]))
    elif isinstance(c, Free):
        ok, li, _ = access(c.var)
        gone = cfg.bot_code if cfg.model == 2 else 0
        nh = cfg.heap_set[np.arange(H)[None, :], li, gone]
        trans.append((ok, s_col, nh))
        fault = ~ok
    elif isinstance(c, Load):
        ok, li, cell = access(c.addr)
        i = vs.index(c.var)
        ns = s_col + (np.clip(cell - 1, 0, cfg.V - 1) - dig[i][:, None]) * stride[i]
        trans.append((ok, ns, h_row))
        fault = ~ok
    elif isinstance(c, StoreCmd):
        ok, li, _ = access(c.addr)
        val = dig[vs.index(c.var)][:, None]
        nh = cfg.heap_set[np.arange(H)[None, :], li, 1 + val]
        trans.append((ok, s_col, nh))
        fault = ~ok
    else:
        raise TypeError(f"not atomic: {c}")
    out = []
    for en, ts, th in trans:
        en, ts, th = np.broadcast_arrays(en, ts, th)
        out.append((np.ascontiguousarray(en), np.ascontiguousarray(ts),
                    np.ascontiguousarray(th)))
    return _Table(out, fault)


def _vars_for(c: Command, extra, cfg: DomainConfig) -> tuple:
    cv = command_vars(c)
    bad = [v for v in cv if v not in cfg.program_vars]
    if bad:
        raise ValueError(f"commands may only use program variables, got {bad}")
    return _sorted_vars(set(cfg.program_vars) | set(extra))


def _flat(P: MemorySet, vs) -> np.ndarray:
    return P.extend(vs).bits.reshape(-1, P.cfg.H)


def _wrap(cfg, vs, flat, abort=False) -> MemorySet:
    return MemorySet(cfg, vs, flat.reshape((cfg.V,) * len(vs) + (cfg.H,)), abort)


def _forward_atomic(c, P: MemorySet, vs):
    cfg = P.cfg
    tab = _table(c, vs, cfg)
    src = _flat(P, vs)
    out = np.zeros_like(src)
    for en, ts, th in tab.transitions:
        sel = src & en
        if sel.any():
            out[ts[sel], th[sel]] = True
    return out, src & tab.fault


def _backward_atomic(c, Q: MemorySet, vs):
    cfg = Q.cfg
    tab = _table(c, vs, cfg)
    tgt = _flat(Q, vs)
    out = np.zeros_like(tgt)
    for en, ts, th in tab.transitions:
        out |= en & tgt[ts, th]
    return out


def _fw_sl(r: Command, P: MemorySet, vs) -> MemorySet:
    cfg = P.cfg
    if isinstance(r, ATOMIC):
        out, faults = _forward_atomic(r, P.without_abort(), vs)
        return _wrap(cfg, vs, out, P.abort or bool(faults.any()))
    if isinstance(r, Seq):
        return _fw_sl(r.second, _fw_sl(r.first, P, vs), vs)
    if isinstance(r, Choice):
        return _fw_sl(r.left, P, vs) | _fw_sl(r.right, P, vs)
    if isinstance(r, Star):
        acc = P.extend(vs)
        frontier = acc
        while True:
            step = _fw_sl(r.body, frontier.without_abort(), vs)
            new = step - acc
            merged = acc | step
            if not new.bits.any() and merged.abort == acc.abort:
                return merged
            acc, frontier = merged, new
    raise TypeError(r)


def _fw_isl(r: Command, T: TaggedMemorySet, vs) -> TaggedMemorySet:
    cfg = T.ok.cfg
    if isinstance(r, ATOMIC):
        out, faults = _forward_atomic(r, T.ok, vs)
        return TaggedMemorySet(_wrap(cfg, vs, out), T.er | _wrap(cfg, vs, faults))
    if isinstance(r, Seq):
        mid = _fw_isl(r.first, T, vs)
        return _fw_isl(r.second, mid, vs)
    if isinstance(r, Choice):
        return _fw_isl(r.left, T, vs) | _fw_isl(r.right, T, vs)
    if isinstance(r, Star):
        acc = TaggedMemorySet(T.ok.extend(vs), T.er.extend(vs))
        frontier = acc
        while True:
            step = _fw_isl(r.body, TaggedMemorySet(frontier.ok, MemorySet.empty(cfg)), vs)
            new_ok = step.ok - acc.ok
            merged = acc | step
            if not new_ok.bits.any() and merged == acc:
                return merged
            acc = merged
            frontier = TaggedMemorySet(new_ok, MemorySet.empty(cfg))
    raise TypeError(r)


def _bw(r: Command, Q: MemorySet, vs) -> MemorySet:
    cfg = Q.cfg
    if isinstance(r, ATOMIC):
        return _wrap(cfg, vs, _backward_atomic(r, Q, vs))
    if isinstance(r, Seq):
        return _bw(r.first, _bw(r.second, Q, vs), vs)
    if isinstance(r, Choice):
        return _bw(r.left, Q, vs) | _bw(r.right, Q, vs)
    if isinstance(r, Star):
        acc = Q.extend(vs)
        while True:
            merged = acc | _bw(r.body, acc, vs)
            if merged == acc:
                return merged
            acc = merged
    raise TypeError(r)


def run_forward(r: Command, P: Union[MemorySet, TaggedMemorySet],
                kind: SemanticsKind = SemanticsKind.FORWARD_SL,
                cfg: DomainConfig | None = None):
    if kind is SemanticsKind.FORWARD_ISL:
        T = P if isinstance(P, TaggedMemorySet) else TaggedMemorySet.of_ok(P)
        vs = _vars_for(r, set(T.ok.vars) | set(T.er.vars), T.ok.cfg)
        T = TaggedMemorySet(T.ok.extend(vs), T.er.extend(vs))
        return _fw_isl(r, T, vs)
    if kind is SemanticsKind.FORWARD_SL:
        if isinstance(P, TaggedMemorySet):
            raise TypeError("SL semantics takes an untagged set")
        vs = _vars_for(r, P.vars, P.cfg)
        return _fw_sl(r, P.extend(vs), vs)
    raise ValueError("use run_backward for backward semantics")


def run_backward(r: Command, Q: MemorySet, cfg: DomainConfig | None = None) -> MemorySet:
    """Memories with at least one non-aborting execution of ``r`` ending in ``Q``."""
    if Q.abort:
        raise ValueError("backward postconditions cannot contain abort")
    vs = _vars_for(r, Q.vars, Q.cfg)
    return _bw(r, Q.extend(vs), vs)


def _single(m: Memory, cfg: DomainConfig) -> MemorySet:
    return MemorySet.from_memories(cfg, [m])


def step_atomic_sl(c: Command, m: Memory, cfg: DomainConfig) -> MemorySet:
    if not isinstance(c, ATOMIC):
        raise TypeError("step_atomic_sl needs an atomic command")
    return run_forward(c, _single(m, cfg), SemanticsKind.FORWARD_SL)


def step_atomic_isl(c: Command, tagged: tuple, cfg: DomainConfig) -> TaggedMemorySet:
    if not isinstance(c, ATOMIC):
        raise TypeError("step_atomic_isl needs an atomic command")
    tag, m = tagged
    one = _single(m, cfg)
    none = MemorySet.empty(cfg).extend(one.vars)
    T = TaggedMemorySet(one, none) if tag == "ok" else TaggedMemorySet(none, one)
    return run_forward(c, T, SemanticsKind.FORWARD_ISL)
