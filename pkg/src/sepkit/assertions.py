"""Denotations of assertions, disjunctive normal forms and heap compatibility."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .domain import (DomainConfig, MemorySet, ModelMismatch, _sorted_vars,
                     memories_compatible, set_join)
from .syntax import (AAnd, ACmp, AExists, AFalse, AOr, ATrue, Add, Assertion, BAnd, BFalse,
                     BNot, BTrue, BoolExpr, Cmp, Const, Emp, EmpVars, Expr, NotPointsTo,
                     PointsTo, Reserved, Sep, Sub, Var, conj, disj, expand_emp_vars,
                     free_vars, star, subst_expr)

# ------------------------------------------------------------ grid evaluation

def _axis_values(cfg: DomainConfig, k: int, i: int) -> np.ndarray:
    shape = [1] * k
    shape[i] = cfg.V
    return np.arange(cfg.V).reshape(shape)


def eval_expr_grid(e: Expr, vars: Sequence[str], cfg: DomainConfig) -> np.ndarray:
    """Value codes of ``e`` over the store grid of ``vars`` (broadcastable)."""
    if isinstance(e, Const):
        return np.array(cfg.encode_value(e.value))
    if isinstance(e, Var):
        if e.name not in vars:
            raise ValueError(f"unknown variable {e.name}")
        return _axis_values(cfg, len(vars), list(vars).index(e.name))
    a = eval_expr_grid(e.left, vars, cfg)
    b = eval_expr_grid(e.right, vars, cfg)
    n = cfg.n
    raw = a + b if isinstance(e, Add) else a - b
    return np.where((a == n) | (b == n), n, raw % n)


def cmp_grid(op: str, a: np.ndarray, b: np.ndarray, n: int) -> np.ndarray:
    if op == "=":
        return a == b
    if op == "!=":
        return a != b
    both = (a != n) & (b != n)
    if op == "<":
        return (a < b) & both
    if op == "<=":
        return (a <= b) & both
    raise ValueError(op)


def eval_bexpr_grid(b: BoolExpr, vars: Sequence[str], cfg: DomainConfig) -> np.ndarray:
    if isinstance(b, BTrue):
        return np.array(True)
    if isinstance(b, BFalse):
        return np.array(False)
    if isinstance(b, Cmp):
        return cmp_grid(b.op, eval_expr_grid(b.left, vars, cfg),
                        eval_expr_grid(b.right, vars, cfg), cfg.n)
    if isinstance(b, BNot):
        return ~eval_bexpr_grid(b.arg, vars, cfg)
    l = eval_bexpr_grid(b.left, vars, cfg)
    r = eval_bexpr_grid(b.right, vars, cfg)
    return (l & r) if isinstance(b, BAnd) else (l | r)


def _full(arr: np.ndarray, cfg: DomainConfig, k: int) -> np.ndarray:
    return np.broadcast_to(arr, (cfg.V,) * k)


def _check_vars(names, cfg: DomainConfig):
    for v in names:
        if not cfg.is_var(v):
            raise ValueError(f"{v} is not a configured variable")


# ------------------------------------------------------------ eval_assertion

def _pure_set(mask_fn, names, cfg) -> MemorySet:
    vs = _sorted_vars(names)
    mask = _full(mask_fn(vs), cfg, len(vs))
    bits = np.broadcast_to(mask[..., None], mask.shape + (cfg.H,))
    return MemorySet(cfg, vs, bits)


def _cell_set(addr: Expr, cell_fn, cfg: DomainConfig, names) -> MemorySet:
    vs = _sorted_vars(names)
    k = len(vs)
    a = _full(eval_expr_grid(addr, vs, cfg), cfg, k)
    cell = _full(cell_fn(vs), cfg, k)
    li = cfg.loc_index[a]
    ok = li >= 0
    h = np.where(ok, cell * cfg.C ** np.maximum(li, 0), 0)
    bits = np.zeros((cfg.V,) * k + (cfg.H,), dtype=bool)
    if k == 0:
        if ok:
            bits[int(h)] = True
    else:
        idx = np.nonzero(ok)
        bits[idx + (h[idx],)] = True
    return MemorySet(cfg, vs, bits)


def eval_assertion(a: Assertion, cfg: DomainConfig) -> MemorySet:
    """Exact denotation of ``a`` as a set of memories of ``cfg``."""
    return _eval(a, cfg)


@lru_cache(maxsize=8192)
def _eval(a: Assertion, cfg: DomainConfig) -> MemorySet:
    if isinstance(a, AFalse):
        return MemorySet.empty(cfg)
    if isinstance(a, ATrue):
        return MemorySet.universe(cfg)
    if isinstance(a, Emp):
        bits = np.zeros(cfg.H, dtype=bool)
        bits[0] = True
        return MemorySet(cfg, (), bits)
    if isinstance(a, EmpVars):
        return _eval(expand_emp_vars(a), cfg)
    if isinstance(a, ACmp):
        names = free_vars(a)
        _check_vars(names, cfg)
        return _pure_set(lambda vs: cmp_grid(a.op, eval_expr_grid(a.left, vs, cfg),
                                             eval_expr_grid(a.right, vs, cfg), cfg.n),
                         names, cfg)
    if isinstance(a, PointsTo):
        names = free_vars(a)
        _check_vars(names, cfg)
        return _cell_set(a.addr, lambda vs: 1 + eval_expr_grid(a.value, vs, cfg), cfg, names)
    if isinstance(a, NotPointsTo):
        if cfg.model != 2:
            raise ModelMismatch("deallocated-cell assertions need model 2")
        names = free_vars(a)
        _check_vars(names, cfg)
        return _cell_set(a.addr, lambda vs: np.array(cfg.bot_code), cfg, names)
    if isinstance(a, Reserved):
        if not cfg.reserved_enabled:
            raise ModelMismatch("reserved cells are disabled")
        names = free_vars(a)
        _check_vars(names, cfg)
        return _cell_set(a.addr, lambda vs: np.array(cfg.res_code), cfg, names)
    if isinstance(a, AAnd):
        return _eval(a.left, cfg) & _eval(a.right, cfg)
    if isinstance(a, AOr):
        return _eval(a.left, cfg) | _eval(a.right, cfg)
    if isinstance(a, Sep):
        return set_join(_eval(a.left, cfg), _eval(a.right, cfg))
    if isinstance(a, AExists):
        return _eval(a.body, cfg).exists(a.vars)
    raise TypeError(a)


def implies(a: Assertion, b: Assertion, cfg: DomainConfig) -> bool:
    return eval_assertion(a, cfg) <= eval_assertion(b, cfg)


def equivalent(a: Assertion, b: Assertion, cfg: DomainConfig) -> bool:
    return eval_assertion(a, cfg) == eval_assertion(b, cfg)


def is_universal_frame(a: Assertion, cfg: DomainConfig, semantic: bool = False) -> bool:
    """Syntactic mode: fv(a) ⊆ logical variables.  Semantic mode: the
    denotation is closed under reassigning program variables."""
    if not semantic:
        return all(v not in cfg.program_vars and v.endswith("'") for v in free_vars(a))
    return is_universal_set(eval_assertion(a, cfg))


def is_universal_set(R: MemorySet) -> bool:
    return R.exists(R.cfg.program_vars) == R


def heap_compat_semantic(P: MemorySet, Q: MemorySet) -> bool:
    return memories_compatible(P, Q)


# --------------------------------------------------------------------- DNF

@dataclass(frozen=True)
class Disjunct:
    pure: tuple      # ACmp atoms
    heap: tuple      # PointsTo / NotPointsTo / Reserved atoms

    def assertion(self) -> Assertion:
        s = star(self.heap)
        return conj(list(self.pure) + [s]) if self.pure else s

    @property
    def vars(self) -> frozenset:
        out = frozenset()
        for p in self.pure:
            out |= free_vars(p)
        for h in self.heap:
            out |= free_vars(h)
        return out


@dataclass(frozen=True)
class DnfAssertion:
    disjuncts: tuple
    cfg: DomainConfig

    def assertion(self) -> Assertion:
        return disj(d.assertion() for d in self.disjuncts)

    def has_dealloc(self) -> bool:
        return any(isinstance(h, NotPointsTo) for d in self.disjuncts for h in d.heap)


def _subst_atom(x, m):
    if isinstance(x, ACmp):
        return ACmp(x.op, subst_expr(x.left, m), subst_expr(x.right, m))
    if isinstance(x, PointsTo):
        return PointsTo(subst_expr(x.addr, m), subst_expr(x.value, m))
    return type(x)(subst_expr(x.addr, m))


def _const_code(e: Expr, cfg):
    if isinstance(e, Const):
        return cfg.encode_value(e.value)
    if isinstance(e, (Add, Sub)):
        a, b = _const_code(e.left, cfg), _const_code(e.right, cfg)
        if a is None or b is None:
            return None
        if cfg.n in (a, b):
            return cfg.n
        return (a + b) % cfg.n if isinstance(e, Add) else (a - b) % cfg.n
    return None


def _pure_false(p: ACmp, cfg) -> bool:
    a, b = _const_code(p.left, cfg), _const_code(p.right, cfg)
    if a is None or b is None:
        return False
    return not bool(cmp_grid(p.op, np.array(a), np.array(b), cfg.n))


def _cell_terms(cfg: DomainConfig):
    """Atoms describing a single cell at constant location ``l``."""
    def make(loc):
        out = [PointsTo(Const(loc), Const(v)) for v in cfg.all_values]
        if cfg.model == 2:
            out.append(NotPointsTo(Const(loc)))
        if cfg.reserved_enabled:
            out.append(Reserved(Const(loc)))
        return out
    return make


def _close(pure, heap, cfg):
    """Expand an open disjunct (heap part ∗ true) into closed disjuncts."""
    make = _cell_terms(cfg)
    out = []
    choices = [[None] + make(l) for l in cfg.locations]
    for combo in itertools.product(*choices):
        extra = tuple(c for c in combo if c is not None)
        out.append((pure, heap + extra, False))
    return out


def _match(h1, h2):
    """Equalities making atom h1 describe the same cell as h2, or None."""
    if type(h1) is not type(h2):
        return None
    eqs = [ACmp("=", h1.addr, h2.addr)]
    if isinstance(h1, PointsTo):
        eqs.append(ACmp("=", h1.value, h2.value))
    return eqs


def _conj_closed(d1, d2):
    p1, h1, _ = d1
    p2, h2, _ = d2
    if len(h1) != len(h2):
        return []
    out = []
    for perm in itertools.permutations(range(len(h2))):
        eqs = []
        for i, j in enumerate(perm):
            m = _match(h1[i], h2[j])
            if m is None:
                break
            eqs += m
        else:
            out.append((p1 + p2 + tuple(eqs), h1, False))
    return out


def _conj_open(closed, opened):
    """closed ∧ (atoms ∗ true): inject the open atoms into the closed heap."""
    pc, hc, _ = closed
    po, ho, _ = opened
    out = []
    for targets in itertools.permutations(range(len(hc)), len(ho)):
        eqs = []
        for i, j in enumerate(targets):
            m = _match(ho[i], hc[j])
            if m is None:
                break
            eqs += m
        else:
            out.append((pc + po + tuple(eqs), hc, False))
    return out


def _dnf(a: Assertion, cfg: DomainConfig) -> list:
    if isinstance(a, AFalse):
        return []
    if isinstance(a, ATrue):
        return [((), (), True)]
    if isinstance(a, ACmp):
        return [((a,), (), True)]
    if isinstance(a, Emp):
        return [((), (), False)]
    if isinstance(a, (PointsTo, NotPointsTo, Reserved)):
        if isinstance(a, NotPointsTo) and cfg.model != 2:
            raise ModelMismatch("deallocated-cell assertions need model 2")
        if isinstance(a, Reserved) and not cfg.reserved_enabled:
            raise ModelMismatch("reserved cells are disabled")
        return [((), (a,), False)]
    if isinstance(a, EmpVars):
        return _dnf(expand_emp_vars(a), cfg)
    if isinstance(a, AOr):
        return _dnf(a.left, cfg) + _dnf(a.right, cfg)
    if isinstance(a, Sep):
        return [(p1 + p2, h1 + h2, o1 or o2)
                for p1, h1, o1 in _dnf(a.left, cfg) for p2, h2, o2 in _dnf(a.right, cfg)]
    if isinstance(a, AAnd):
        out = []
        for d1 in _dnf(a.left, cfg):
            for d2 in _dnf(a.right, cfg):
                out += _conj(d1, d2, cfg)
        return out
    if isinstance(a, AExists):
        body = _dnf(a.body, cfg)
        out = []
        for combo in itertools.product(cfg.all_values, repeat=len(a.vars)):
            m = {v: Const(c) for v, c in zip(a.vars, combo)}
            for p, h, o in body:
                out.append((tuple(_subst_atom(x, m) for x in p),
                            tuple(_subst_atom(x, m) for x in h), o))
        return out
    raise TypeError(a)


def _conj(d1, d2, cfg):
    p1, h1, o1 = d1
    p2, h2, o2 = d2
    if o1 and not h1:
        return [(p1 + p2, h2, o2)]
    if o2 and not h2:
        return [(p1 + p2, h1, o1)]
    if not o1 and not o2:
        return _conj_closed(d1, d2)
    if o1 and o2:
        out = []
        for c in _close(p1, h1, cfg):
            out += _conj_open(c, d2)
        return out
    return _conj_open(d1, d2) if o2 else _conj_open(d2, d1)


def to_dnf(a: Assertion, cfg: DomainConfig) -> DnfAssertion:
    """Finite DNF: ∃ expanded over the configured values, ``true`` heaps
    expanded over the configured locations."""
    raw = []
    for p, h, o in _dnf(a, cfg):
        raw += _close(p, h, cfg) if o else [(p, h, o)]
    out, seen = [], set()
    for p, h, _ in raw:
        if any(_pure_false(x, cfg) for x in p):
            continue
        d = Disjunct(tuple(dict.fromkeys(p)), h)
        if d not in seen:
            seen.add(d)
            out.append(d)
    return DnfAssertion(tuple(out), cfg)


def _disjunct_owner(d: Disjunct, cfg: DomainConfig):
    """(vars, array (V,)*k + (L,)): stores where d holds and owns location i."""
    vs = _sorted_vars(d.vars)
    k = len(vs)
    sat = np.ones((cfg.V,) * k, dtype=bool)
    for p in d.pure:
        sat &= _full(cmp_grid(p.op, eval_expr_grid(p.left, vs, cfg),
                              eval_expr_grid(p.right, vs, cfg), cfg.n), cfg, k)
    addrs = [_full(eval_expr_grid(h.addr, vs, cfg), cfg, k) for h in d.heap]
    for a in addrs:
        sat &= cfg.loc_index[a] >= 0
    for a, b in itertools.combinations(addrs, 2):
        sat &= a != b
    own = np.zeros((cfg.V,) * k + (cfg.L,), dtype=bool)
    for a in addrs:
        li = cfg.loc_index[a]
        for i in range(cfg.L):
            own[..., i] |= sat & (li == i)
    return vs, own


def _reduce_to(vs, own, shared):
    axes = tuple(i for i, v in enumerate(vs) if v not in shared)
    return own.any(axis=axes) if axes else own


def dnf_compatible(da: DnfAssertion, db: DnfAssertion) -> bool:
    """Pairwise disjunct check: whenever both pure parts hold and both heaps
    are defined, their footprints are disjoint."""
    cfg = da.cfg
    left = [_disjunct_owner(d, cfg) for d in da.disjuncts]
    right = [_disjunct_owner(d, cfg) for d in db.disjuncts]
    for vi, oi in left:
        if not oi.any():
            continue
        for vj, oj in right:
            shared = set(vi) & set(vj)
            ri = _reduce_to(vi, oi, shared)
            rj = _reduce_to(vj, oj, shared)
            if (ri & rj).any():
                return False
    return True


def heap_compat_logical(a: Assertion, b: Assertion, cfg: DomainConfig) -> bool:
    return dnf_compatible(to_dnf(a, cfg), to_dnf(b, cfg))
