"""Finite memory domains for both memory models.

Memories are (store, heap) pairs over a :class:`DomainConfig`.  Sets of
memories are stored densely as boolean arrays over a *cylinder*: a tuple of
variables whose values are enumerated, with every other variable left
unconstrained.  Two sets over different variable tuples are compared by first
broadcasting both to the union of their variables.

Value codes: ``0..n-1`` are the integers and ``n`` is ``null``.  A heap is a
mixed-radix integer over the configured locations whose digits are cell codes
(see :class:`DomainConfig`).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Sequence, Union

import numpy as np


class _Sentinel:
    __slots__ = ("name",)

    def __init__(self, name: str):
        self.name = name

    def __repr__(self) -> str:
        return self.name

    def __reduce__(self):
        return self.name


NULL = _Sentinel("null")
DEALLOC = _Sentinel("⊥")
RESERVED = _Sentinel("⊠")

Value = Union[int, _Sentinel]
Cell = Union[int, _Sentinel]


class NotDisjoint(ValueError):
    pass


class ModelMismatch(ValueError):
    pass


def mirror(name: str) -> str:
    return name + "'"


def is_logical_name(name: str) -> bool:
    return name.endswith("'")


DEFAULT_SPARES = ("z'", "l'", "w'", "d'", "k1'", "k2'", "a'")


@dataclass(frozen=True)
class DomainConfig:
    """Finite universes of values, locations and variables.

    Cell codes per location: 0 = absent, ``1 + v`` for value code ``v``
    (null included), then ``⊥`` when ``model == 2``, then ``⊠`` when
    ``reserved_enabled``.
    """

    values: tuple = (0, 1, 2)
    locations: tuple = (1, 2)
    program_vars: tuple = ("x", "y")
    logical_vars: tuple = ()
    model: int = 1
    reserved_enabled: bool = True

    def __post_init__(self):
        vals = tuple(self.values)
        if vals != tuple(range(len(vals))) or not vals:
            raise ValueError("values must be the range 0..n-1")
        object.__setattr__(self, "values", vals)
        locs = tuple(sorted(set(self.locations)))
        if not set(locs) <= set(vals):
            raise ValueError("locations must be a subset of values")
        object.__setattr__(self, "locations", locs)
        pv = tuple(self.program_vars)
        if any(is_logical_name(p) for p in pv):
            raise ValueError("program variables must not be primed")
        lv = tuple(self.logical_vars) or tuple(mirror(p) for p in pv) + DEFAULT_SPARES
        lv = tuple(dict.fromkeys(lv))
        for p in pv:
            if mirror(p) not in lv:
                lv = lv + (mirror(p),)
        if set(pv) & set(lv):
            raise ValueError("program and logical variables overlap")
        if any(not is_logical_name(v) for v in lv):
            raise ValueError("logical variables must be primed")
        object.__setattr__(self, "program_vars", pv)
        object.__setattr__(self, "logical_vars", lv)
        if self.model not in (1, 2):
            raise ValueError("model must be 1 or 2")

    # ----- value coding -------------------------------------------------
    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def null_code(self) -> int:
        return self.n

    @property
    def V(self) -> int:
        """Number of value codes (integers plus null)."""
        return self.n + 1

    def encode_value(self, v: Value) -> int:
        if v is NULL:
            return self.n
        return int(v) % self.n

    def decode_value(self, c: int) -> Value:
        return NULL if c == self.n else int(c)

    @property
    def all_values(self) -> tuple:
        return self.values + (NULL,)

    def with_model(self, model: int) -> "DomainConfig":
        return DomainConfig(self.values, self.locations, self.program_vars,
                            self.logical_vars, model, self.reserved_enabled)

    def including(self, names: Iterable[str]) -> "DomainConfig":
        extra = [v for v in names if is_logical_name(v) and v not in self.logical_vars]
        if not extra:
            return self
        return DomainConfig(self.values, self.locations, self.program_vars,
                            self.logical_vars + tuple(sorted(extra)), self.model,
                            self.reserved_enabled)

    def is_var(self, name: str) -> bool:
        # logical names not declared are treated as spares
        return name in self.program_vars or is_logical_name(name)

    # ----- cell and heap coding -----------------------------------------
    @property
    def L(self) -> int:
        return len(self.locations)

    @property
    def bot_code(self) -> int:
        return self.V + 1 if self.model == 2 else -1

    @property
    def res_code(self) -> int:
        if not self.reserved_enabled:
            return -1
        return self.V + (2 if self.model == 2 else 1)

    @property
    def C(self) -> int:
        return 1 + self.V + (self.model == 2) + bool(self.reserved_enabled)

    @property
    def H(self) -> int:
        return self.C ** self.L

    def encode_cell(self, cell: Cell) -> int:
        if cell is DEALLOC:
            if self.model != 2:
                raise ModelMismatch("deallocated cells need model 2")
            return self.bot_code
        if cell is RESERVED:
            if not self.reserved_enabled:
                raise ModelMismatch("reserved cells are disabled")
            return self.res_code
        return 1 + self.encode_value(cell)

    def decode_cell(self, c: int) -> Cell:
        if c == self.bot_code:
            return DEALLOC
        if c == self.res_code:
            return RESERVED
        return self.decode_value(c - 1)

    @cached_property
    def loc_index(self) -> np.ndarray:
        """Value code -> location index, or -1."""
        out = np.full(self.V, -1, dtype=np.int64)
        for i, l in enumerate(self.locations):
            out[l] = i
        return out

    @cached_property
    def loc_code(self) -> np.ndarray:
        """Location index -> value code."""
        return np.array(self.locations, dtype=np.int64)

    @cached_property
    def heap_cells(self) -> np.ndarray:
        """(H, L) cell codes of every heap."""
        h = np.arange(self.H)
        return np.stack([(h // self.C ** i) % self.C for i in range(self.L)], axis=1) \
            if self.L else np.zeros((1, 0), dtype=np.int64)

    @cached_property
    def heap_dom(self) -> np.ndarray:
        """(H,) bitmask of allocated locations (including ⊥ and ⊠ cells)."""
        bits = (self.heap_cells != 0).astype(np.int64)
        return (bits << np.arange(self.L)).sum(axis=1) if self.L else np.zeros(1, np.int64)

    @cached_property
    def heap_set(self) -> np.ndarray:
        """(H, L, C): heap with location ``i`` overwritten by cell code ``c``."""
        cells = self.heap_cells
        out = np.empty((self.H, self.L, self.C), dtype=np.int64)
        h = np.arange(self.H)
        for i in range(self.L):
            base = h - cells[:, i] * self.C ** i
            for c in range(self.C):
                out[:, i, c] = base + c * self.C ** i
        return out

    @cached_property
    def join_pairs(self) -> tuple:
        """Arrays (h1, h2, h1•h2) over all disjoint heap pairs."""
        dom = self.heap_dom
        h1, h2 = np.nonzero((dom[:, None] & dom[None, :]) == 0)
        return h1, h2, h1 + h2  # disjoint digits add without carry

    def encode_heap(self, heap: "Heap") -> int:
        idx = 0
        for loc, cell in heap.cells:
            if loc not in self.locations:
                raise ValueError(f"{loc} is not a configured location")
            idx += self.encode_cell(cell) * self.C ** self.locations.index(loc)
        return idx

    def decode_heap(self, idx: int) -> "Heap":
        cells = []
        for i, loc in enumerate(self.locations):
            c = (idx // self.C ** i) % self.C
            if c:
                cells.append((loc, self.decode_cell(int(c))))
        return Heap(tuple(cells))


@dataclass(frozen=True)
class Store:
    program: tuple = ()
    logical: tuple = ()

    @staticmethod
    def of(mapping: Mapping[str, Value]) -> "Store":
        items = sorted(mapping.items())
        return Store(tuple((k, v) for k, v in items if not is_logical_name(k)),
                     tuple((k, v) for k, v in items if is_logical_name(k)))

    def as_dict(self) -> dict:
        return dict(self.program + self.logical)

    def __getitem__(self, name: str) -> Value:
        return self.as_dict()[name]

    def __str__(self) -> str:
        return ", ".join(f"{k}={v}" for k, v in self.program + self.logical)


@dataclass(frozen=True)
class Heap:
    cells: tuple = ()

    def __post_init__(self):
        cells = tuple(sorted(self.cells, key=lambda kv: kv[0]))
        if len({k for k, _ in cells}) != len(cells):
            raise ValueError("duplicate location in heap")
        object.__setattr__(self, "cells", cells)

    @staticmethod
    def of(mapping: Mapping[int, Cell]) -> "Heap":
        return Heap(tuple(mapping.items()))

    @property
    def dom(self) -> frozenset:
        return frozenset(k for k, _ in self.cells)

    def as_dict(self) -> dict:
        return dict(self.cells)

    def __str__(self) -> str:
        return "[" + ", ".join(f"{k}↦{v}" for k, v in self.cells) + "]"


@dataclass(frozen=True)
class Memory:
    store: Store
    heap: Heap

    def __str__(self) -> str:
        return f"({{{self.store}}}, {self.heap})"


def heap_disjoint(h1: Heap, h2: Heap) -> bool:
    return not (h1.dom & h2.dom)


def heap_join(h1: Heap, h2: Heap) -> Heap:
    if not heap_disjoint(h1, h2):
        raise NotDisjoint(f"{h1} and {h2} share {sorted(h1.dom & h2.dom)}")
    return Heap(h1.cells + h2.cells)


def _sorted_vars(vs: Iterable[str]) -> tuple:
    # program variables first, then logical ones, each alphabetically
    return tuple(sorted(set(vs), key=lambda v: (is_logical_name(v), v)))


class MemorySet:
    """A set of memories over ``cfg`` stored as a dense cylinder.

    ``bits`` has shape ``(V,)*len(vars) + (H,)``; variables outside ``vars``
    are unconstrained.  ``abort`` marks the presence of the abort sentinel
    (forward SL semantics only).
    """

    __slots__ = ("cfg", "vars", "bits", "abort", "_key")

    def __init__(self, cfg: DomainConfig, vars: Sequence[str], bits: np.ndarray,
                 abort: bool = False):
        vars = tuple(vars)
        if list(vars) != list(_sorted_vars(vars)):
            order = _sorted_vars(vars)
            perm = [vars.index(v) for v in order] + [len(vars)]
            bits = np.transpose(bits, perm)
            vars = order
        expected = (cfg.V,) * len(vars) + (cfg.H,)
        if bits.shape != expected:
            raise ValueError(f"bad shape {bits.shape}, expected {expected}")
        self.cfg = cfg
        self.vars = vars
        self.bits = np.ascontiguousarray(bits, dtype=bool)
        self.bits.flags.writeable = False
        self.abort = bool(abort)
        self._key = None

    # ----- constructors -------------------------------------------------
    @classmethod
    def empty(cls, cfg: DomainConfig, abort: bool = False) -> "MemorySet":
        return cls(cfg, (), np.zeros(cfg.H, dtype=bool), abort)

    @classmethod
    def universe(cls, cfg: DomainConfig) -> "MemorySet":
        return cls(cfg, (), np.ones(cfg.H, dtype=bool))

    @classmethod
    def from_memories(cls, cfg: DomainConfig, memories: Iterable[Memory],
                      vars: Sequence[str] | None = None, abort: bool = False) -> "MemorySet":
        memories = list(memories)
        if vars is None:
            vs = set()
            for m in memories:
                vs |= set(m.store.as_dict())
            vars = vs
        vars = _sorted_vars(vars)
        bits = np.zeros((cfg.V,) * len(vars) + (cfg.H,), dtype=bool)
        for m in memories:
            s = m.store.as_dict()
            idx = tuple(cfg.encode_value(s[v]) for v in vars)
            bits[idx + (cfg.encode_heap(m.heap),)] = True
        return cls(cfg, vars, bits, abort)

    # ----- shape management --------------------------------------------
    def extend(self, vars: Iterable[str]) -> "MemorySet":
        target = _sorted_vars(set(vars) | set(self.vars))
        if target == self.vars:
            return self
        k = len(target)
        src_axes = [target.index(v) for v in self.vars]
        shape = [1] * k + [self.cfg.H]
        for ax in src_axes:
            shape[ax] = self.cfg.V
        b = self.bits.reshape(shape)  # own axes are already in target order
        b = np.broadcast_to(b, (self.cfg.V,) * k + (self.cfg.H,))
        return MemorySet(self.cfg, target, b, self.abort)

    def align(self, other: "MemorySet") -> tuple:
        vs = set(self.vars) | set(other.vars)
        return self.extend(vs), other.extend(vs)

    def minimize(self) -> "MemorySet":
        """Drop variables the set does not depend on."""
        cur = self
        for v in list(cur.vars):
            ax = cur.vars.index(v)
            b = cur.bits
            if np.array_equal(b.any(axis=ax), b.all(axis=ax)):
                cur = MemorySet(cur.cfg, cur.vars[:ax] + cur.vars[ax + 1:],
                                b.any(axis=ax), cur.abort)
        return cur

    def key(self):
        if self._key is None:
            m = self.minimize()
            self._key = (m.vars, m.bits.tobytes(), m.abort)
        return self._key

    # ----- set algebra ---------------------------------------------------
    def _binop(self, other: "MemorySet", op, abort: bool) -> "MemorySet":
        a, b = self.align(other)
        return MemorySet(self.cfg, a.vars, op(a.bits, b.bits), abort)

    def __or__(self, other):
        return self._binop(other, np.logical_or, self.abort or other.abort)

    def __and__(self, other):
        return self._binop(other, np.logical_and, self.abort and other.abort)

    def __sub__(self, other):
        return self._binop(other, lambda x, y: x & ~y, self.abort and not other.abort)

    def __le__(self, other) -> bool:
        a, b = self.align(other)
        return bool(not (a.bits & ~b.bits).any()) and (not self.abort or other.abort)

    def __ge__(self, other) -> bool:
        return other <= self

    def __eq__(self, other) -> bool:
        if not isinstance(other, MemorySet):
            return NotImplemented
        return self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def without_abort(self) -> "MemorySet":
        return MemorySet(self.cfg, self.vars, self.bits, False) if self.abort else self

    def is_empty(self) -> bool:
        return not self.abort and not self.bits.any()

    def count(self) -> int:
        """Number of memories over this set's own variables."""
        return int(self.bits.sum())

    def __len__(self) -> int:
        return self.count()

    def complement(self) -> "MemorySet":
        return MemorySet(self.cfg, self.vars, ~self.bits, False)

    def exists(self, X: Iterable[str]) -> "MemorySet":
        cur = self
        for v in X:
            if v in cur.vars:
                ax = cur.vars.index(v)
                cur = MemorySet(cur.cfg, cur.vars[:ax] + cur.vars[ax + 1:],
                                cur.bits.any(axis=ax), cur.abort)
        return cur

    def rename(self, mapping: Mapping[str, str]) -> "MemorySet":
        """Relabel variables (``mapping`` must be injective on ``vars``)."""
        new = tuple(mapping.get(v, v) for v in self.vars)
        if len(set(new)) != len(new):
            raise ValueError("renaming is not injective")
        return MemorySet(self.cfg, new, self.bits, self.abort)

    def project_store(self) -> np.ndarray:
        """Stores (over ``vars``) that have at least one heap."""
        return self.bits.any(axis=-1)

    # ----- enumeration -------------------------------------------------
    def memories(self, vars: Sequence[str] | None = None) -> Iterator[Memory]:
        src = self if vars is None else self.extend(vars)
        cfg = self.cfg
        for idx in zip(*np.nonzero(src.bits)):
            store = {v: cfg.decode_value(int(c)) for v, c in zip(src.vars, idx[:-1])}
            yield Memory(Store.of(store), cfg.decode_heap(int(idx[-1])))

    def __iter__(self):
        return self.memories()

    def __contains__(self, m: Memory) -> bool:
        s = m.store.as_dict()
        idx = tuple(self.cfg.encode_value(s[v]) for v in self.vars)
        return bool(self.bits[idx + (self.cfg.encode_heap(m.heap),)])

    def __repr__(self) -> str:
        m = self.minimize()
        return f"MemorySet(vars={m.vars}, size={m.count()}, abort={m.abort})"


@dataclass(frozen=True)
class TaggedMemorySet:
    ok: MemorySet
    er: MemorySet

    @classmethod
    def of_ok(cls, P: MemorySet) -> "TaggedMemorySet":
        return cls(P, MemorySet.empty(P.cfg))

    @property
    def members(self) -> frozenset:
        return frozenset(("ok", m) for m in self.ok) | frozenset(("er", m) for m in self.er)

    def __or__(self, other):
        return TaggedMemorySet(self.ok | other.ok, self.er | other.er)

    def __le__(self, other) -> bool:
        return self.ok <= other.ok and self.er <= other.er

    def __eq__(self, other) -> bool:
        if not isinstance(other, TaggedMemorySet):
            return NotImplemented
        return self.ok == other.ok and self.er == other.er

    def __hash__(self):
        return hash((self.ok, self.er))


def set_join(P: MemorySet, Q: MemorySet) -> MemorySet:
    """Pointwise ∙ on sets: same store, disjoint heaps."""
    a, b = P.align(Q)
    cfg = P.cfg
    out = np.zeros_like(a.bits)
    h1, h2, h12 = cfg.join_pairs
    live1 = a.bits.reshape(-1, cfg.H).any(axis=0)
    live2 = b.bits.reshape(-1, cfg.H).any(axis=0)
    keep = live1[h1] & live2[h2]
    for i, j, k in zip(h1[keep], h2[keep], h12[keep]):
        out[..., k] |= a.bits[..., i] & b.bits[..., j]
    return MemorySet(cfg, a.vars, out, False)


def exists_lift(X: Iterable[str], P: MemorySet) -> MemorySet:
    return P.exists(X)


def footprint_bits(P: MemorySet) -> np.ndarray:
    """(stores..., L) array: does some heap of P at this store own location i."""
    cfg = P.cfg
    own = (cfg.heap_cells != 0)  # (H, L)
    flat = P.bits.reshape(-1, cfg.H).astype(np.uint8)
    has = (flat @ own.astype(np.uint8)) > 0
    return has.reshape(P.bits.shape[:-1] + (cfg.L,))


def memories_compatible(P: MemorySet, Q: MemorySet) -> bool:
    """Semantic heap compatibility: equal stores imply disjoint heaps."""
    fp, fq = footprint_bits(P), footprint_bits(Q)
    vs = _sorted_vars(set(P.vars) | set(Q.vars))
    cfg = P.cfg

    def lift(f, own):
        shape = [1] * len(vs) + [cfg.L]
        for v in own:
            shape[vs.index(v)] = cfg.V
        return f.reshape(shape)

    return not (lift(fp, P.vars) & lift(fq, Q.vars)).any()


def store_grid(cfg: DomainConfig, vars: Sequence[str]) -> Iterator[dict]:
    for combo in itertools.product(range(cfg.V), repeat=len(vars)):
        yield dict(zip(vars, combo))
