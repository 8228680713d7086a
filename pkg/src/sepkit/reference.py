"""Reference interpreter used as an oracle.

Written directly from the state-transformer clauses with explicit Python
dictionaries, sharing no code with :mod:`sepkit.semantics`.  Composite
commands are interpreted as boolean relations (scipy sparse matrices) over
an explicitly enumerated universe of memories.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .domain import DEALLOC, NULL, RESERVED, DomainConfig
from .syntax import (Add, Alloc, Assign, Assume, BAnd, BFalse, BNot, BOr, BTrue, Choice,
                     Const, Error, Free, Load, Seq, Star, StoreCmd, Var)


def ev(e, s: dict, n: int):
    if isinstance(e, Const):
        return e.value if e.value is NULL else e.value % n
    if isinstance(e, Var):
        return s[e.name]
    a, b = ev(e.left, s, n), ev(e.right, s, n)
    if a is NULL or b is NULL:
        return NULL
    return (a + b) % n if isinstance(e, Add) else (a - b) % n


def bev(b, s: dict, n: int) -> bool:
    if isinstance(b, BTrue):
        return True
    if isinstance(b, BFalse):
        return False
    if isinstance(b, BNot):
        return not bev(b.arg, s, n)
    if isinstance(b, BAnd):
        return bev(b.left, s, n) and bev(b.right, s, n)
    if isinstance(b, BOr):
        return bev(b.left, s, n) or bev(b.right, s, n)
    x, y = ev(b.left, s, n), ev(b.right, s, n)
    if b.op == "=":
        return x is y if NULL in (x, y) else x == y
    if b.op == "!=":
        return not (x is y if NULL in (x, y) else x == y)
    if NULL in (x, y):
        return False
    return x < y if b.op == "<" else x <= y


def _is_value(cell) -> bool:
    return cell is not DEALLOC and cell is not RESERVED


ABORT = "abort"


def step(c, s: dict, h: dict, cfg: DomainConfig):
    """Outcomes of an atomic command: list of ("ok"|"fault", store, heap)."""
    n = cfg.n
    if isinstance(c, Assume):
        return [("ok", s, h)] if bev(c.cond, s, n) else []
    if isinstance(c, Error):
        return [("fault", s, h)]
    if isinstance(c, Assign):
        return [("ok", {**s, c.var: ev(c.expr, s, n)}, h)]
    if isinstance(c, Alloc):
        out = []
        for l in cfg.locations:
            if l not in h or (cfg.model == 2 and h[l] is DEALLOC):
                for v in cfg.all_values:
                    out.append(("ok", {**s, c.var: l}, {**h, l: v}))
        return out
    addr = s[c.addr] if isinstance(c, (Load, StoreCmd)) else s[c.var]
    if addr not in h or not _is_value(h[addr]):
        return [("fault", s, h)]
    if isinstance(c, Free):
        h2 = dict(h)
        if cfg.model == 2:
            h2[addr] = DEALLOC
        else:
            del h2[addr]
        return [("ok", s, h2)]
    if isinstance(c, Load):
        return [("ok", {**s, c.var: h[addr]}, h)]
    if isinstance(c, StoreCmd):
        return [("ok", s, {**h, addr: s[c.var]})]
    raise TypeError(c)


def all_heaps(cfg: DomainConfig):
    cells = [None] + list(cfg.all_values)
    if cfg.model == 2:
        cells.append(DEALLOC)
    if cfg.reserved_enabled:
        cells.append(RESERVED)
    for combo in itertools.product(cells, repeat=len(cfg.locations)):
        yield {l: c for l, c in zip(cfg.locations, combo) if c is not None}


def _key(s: dict, h: dict, vs):
    return tuple(s[v] for v in vs), tuple(sorted(h.items()))


@dataclass
class Universe:
    cfg: DomainConfig
    vars: tuple
    states: list
    index: dict

    @classmethod
    def build(cls, cfg: DomainConfig, vars) -> "Universe":
        vars = tuple(vars)
        states, index = [], {}
        heaps = list(all_heaps(cfg))
        for vals in itertools.product(cfg.all_values, repeat=len(vars)):
            s = dict(zip(vars, vals))
            for h in heaps:
                index[_key(s, h, vars)] = len(states)
                states.append((s, h))
        return cls(cfg, vars, states, index)

    def __len__(self):
        return len(self.states)


@dataclass
class Relation:
    ok: sp.csr_matrix      # (U, U) normal-termination relation
    er: sp.csr_matrix      # (U, U) faulting executions, ending in the faulting state

    @property
    def fault(self) -> np.ndarray:
        return np.asarray(self.er.sum(axis=1)).ravel() > 0


def atomic_relation(c, U: Universe) -> Relation:
    rows, cols = [], []
    fault = np.zeros(len(U), dtype=bool)
    for i, (s, h) in enumerate(U.states):
        for tag, s2, h2 in step(c, s, h, U.cfg):
            if tag == "fault":
                fault[i] = True
            else:
                rows.append(i)
                cols.append(U.index[_key(s2, h2, U.vars)])
    data = np.ones(len(rows), dtype=np.int32)
    m = sp.csr_matrix((data, (rows, cols)), shape=(len(U), len(U)))
    er = sp.diags(fault.astype(np.int32), format="csr")
    return Relation(_bool(m), _bool(er))


def _bool(m):
    m = m.tocsr()
    m.data = (m.data > 0).astype(np.int32)
    m.eliminate_zeros()
    return m


def relation(r, U: Universe, cache: dict | None = None) -> Relation:
    """Big-step relation of a regular command; faults propagate as in SL."""
    cache = {} if cache is None else cache
    if r in cache:
        return cache[r]
    if isinstance(r, Seq):
        a, b = relation(r.first, U, cache), relation(r.second, U, cache)
        out = Relation(_bool(a.ok @ b.ok), _bool(a.er + a.ok @ b.er))
    elif isinstance(r, Choice):
        a, b = relation(r.left, U, cache), relation(r.right, U, cache)
        out = Relation(_bool(a.ok + b.ok), _bool(a.er + b.er))
    elif isinstance(r, Star):
        body = relation(r.body, U, cache)
        closure = sp.identity(len(U), dtype=np.int32, format="csr")
        while True:
            nxt = _bool(closure + closure @ body.ok)
            if (nxt != closure).nnz == 0:
                break
            closure = nxt
        out = Relation(closure, _bool(closure @ body.er))
    else:
        out = atomic_relation(r, U)
    cache[r] = out
    return out


def preimage(r, U: Universe, target: np.ndarray, cache=None) -> np.ndarray:
    rel = relation(r, U, cache)
    return (rel.ok @ target.astype(np.int32)) > 0


def image(r, U: Universe, source: np.ndarray, cache=None):
    """(ok states reached, er states reached, some execution faults)."""
    rel = relation(r, U, cache)
    src = source.astype(np.int32)
    er = (rel.er.T @ src) > 0
    return (rel.ok.T @ src) > 0, er, bool(er.any())
