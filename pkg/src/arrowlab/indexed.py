"""Y-indexed operations: one conservative r-ary table per k-subset Y.

Each per-subset table is stored over the local enumeration of Y (its
elements in increasing order), so a table has k**r entries.  Everything
public speaks global element indices.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Optional, Sequence, Union

import numpy as np

from .choice import elements, fmt_subset, ksubsets, subset_position, to_mask
from .operations import (
    Operation,
    Permutation,
    all_tuples,
    compose,
    injective_mask,
    is_conservative,
    place_values,
)


class IndexedError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class IndexedOperation:
    n: int
    k: int
    r: int
    tables: tuple[np.ndarray, ...] = field(repr=False)

    def __post_init__(self):
        subsets = ksubsets(self.n, self.k)
        if len(self.tables) != len(subsets):
            raise IndexedError(f"expected {len(subsets)} per-subset tables, got {len(self.tables)}")
        local = all_tuples(self.k, self.r)
        frozen = []
        for mask, t in zip(subsets, self.tables):
            t = np.array(t, dtype=np.int64)
            if t.shape != (self.k**self.r,):
                raise IndexedError(f"table at {fmt_subset(mask)} needs {self.k ** self.r} entries")
            if t.min() < 0 or t.max() >= self.k:
                raise IndexedError(f"local index out of range at {fmt_subset(mask)}")
            if not np.all(np.any(local == t[:, None], axis=1)):
                raise IndexedError(f"value outside its argument list at {fmt_subset(mask)}")
            t.flags.writeable = False
            frozen.append(t)
        object.__setattr__(self, "tables", tuple(frozen))

    @property
    def key(self):
        return (self.n, self.k, self.r, b"".join(t.astype(np.uint8).tobytes() for t in self.tables))

    def __eq__(self, other):
        if not isinstance(other, IndexedOperation):
            return NotImplemented
        return self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def at(self, subset: int) -> Operation:
        """The table at Y as an operation on a k-element carrier."""
        return Operation(self.k, self.r, self.tables[subset_position(self.n, self.k)[subset]])

    def __call__(self, subset: int, *xs: int) -> int:
        elems = elements(subset)
        try:
            local = [elems.index(x) for x in xs]
        except ValueError:
            raise IndexedError(f"arguments {xs} not inside {fmt_subset(subset)}") from None
        if len(local) != self.r:
            raise IndexedError(f"arity mismatch: r={self.r}, got {len(local)} arguments")
        t = self.tables[subset_position(self.n, self.k)[subset]]
        return elems[int(t[int(np.dot(local, place_values(self.k, self.r)))])]


def from_callable(n: int, k: int, r: int, fn: Callable[..., int]) -> IndexedOperation:
    """Tabulate fn(Y_elements, x_1, ..., x_r) -> global element."""
    tables = []
    for mask in ksubsets(n, k):
        elems = elements(mask)
        pos = {x: i for i, x in enumerate(elems)}
        tables.append([pos[fn(elems, *(elems[i] for i in local))]
                       for local in itertools.product(range(k), repeat=r)])
    return IndexedOperation(n, k, r, tuple(np.array(t) for t in tables))


def lift_simple(f: Operation, k: int) -> IndexedOperation:
    """Restrict a conservative operation to every k-subset."""
    if not is_conservative(f):
        raise IndexedError("lift_simple needs a conservative operation")
    local = all_tuples(k, f.r)
    tables = []
    for mask in ksubsets(f.n, k):
        elems = np.array(elements(mask), dtype=np.int64)
        values = f.table[elems[local] @ place_values(f.n, f.r)]
        tables.append(np.searchsorted(elems, values))
    return IndexedOperation(f.n, k, f.r, tuple(tables))


def binary_indexed(n: int, k: int, shape: Mapping[int, Union[str, tuple[int, int], frozenset]],
                   default: str = "first") -> IndexedOperation:
    """Binary indexed op built per subset from ``"first"``, ``"second"`` or an exceptional pair.

    An ordered pair (a, b) at Y means f_Y(a, b) = b and f_Y(x, y) = x for
    every other pair, including (b, a).  A frozenset {a, b} returns the
    second argument in both orientations.
    """
    def fn(elems, x, y):
        mode = shape.get(to_mask(elems), default)
        if x == y or mode == "first":
            return x
        if mode == "second":
            return y
        if isinstance(mode, frozenset):
            return y if {x, y} == mode else x
        return y if (x, y) == tuple(mode) else x
    for mask, mode in shape.items():
        if not isinstance(mode, str):
            a, b = sorted(mode) if isinstance(mode, frozenset) else mode
            if a == b or not (mask >> a & 1 and mask >> b & 1):
                raise IndexedError(f"exceptional pair {mode} must be two elements of {fmt_subset(mask)}")
    return from_callable(n, k, 2, fn)


def compose_indexed(outer: IndexedOperation, inners: Sequence[IndexedOperation]) -> IndexedOperation:
    """Subset-wise composition: (f o g)_Y = f_Y o (g_1)_Y, ..., (g_m)_Y."""
    if len(inners) != outer.r or not inners:
        raise IndexedError(f"outer arity {outer.r} needs that many inner operations")
    r = inners[0].r
    for g in inners:
        if (g.n, g.k, g.r) != (outer.n, outer.k, r):
            raise IndexedError("indexed operations must share (n, k) and inner arity")
    tables = []
    for i, mask in enumerate(ksubsets(outer.n, outer.k)):
        o = Operation(outer.k, outer.r, outer.tables[i])
        tables.append(compose(o, [Operation(g.k, r, g.tables[i]) for g in inners]).table)
    return IndexedOperation(outer.n, outer.k, r, tuple(tables))


def conjugate_indexed(f: IndexedOperation, pi: Permutation) -> IndexedOperation:
    """(pi * f)_Y(x_1..x_r) = pi^-1(f_{pi(Y)}(pi(x_1), ..., pi(x_r)))."""
    if pi.n != f.n:
        raise IndexedError("permutation size does not match the carrier")
    inv = pi.inverse()
    return from_callable(f.n, f.k, f.r, lambda elems, *xs: inv(
        f(to_mask(pi(x) for x in elems), *(pi(x) for x in xs))))


def permute_variables_indexed(f: IndexedOperation, sigma: Sequence[int]) -> IndexedOperation:
    cols = [s - 1 for s in sigma]
    local = all_tuples(f.k, f.r)[:, cols] @ place_values(f.k, f.r)
    return IndexedOperation(f.n, f.k, f.r, tuple(t[local] for t in f.tables))


def restrict_clone(fs: Iterable[IndexedOperation], subset: int) -> set[Operation]:
    """F[Y]: the tables at Y, re-indexed to a k-element carrier."""
    return {f.at(subset) for f in fs}


def restriction_commutes(outer: IndexedOperation, inners: Sequence[IndexedOperation],
                         subset: int) -> bool:
    """Spot check that restriction to Y is a clone homomorphism."""
    lhs = compose_indexed(outer, inners).at(subset)
    rhs = compose(outer.at(subset), [g.at(subset) for g in inners])
    return lhs == rhs


def is_monarchy_indexed(f: IndexedOperation) -> Optional[int]:
    local = all_tuples(f.k, f.r)
    for pos in range(f.r):
        if all(np.array_equal(t, local[:, pos]) for t in f.tables):
            return pos + 1
    return None


def is_simple_indexed(f: IndexedOperation) -> bool:
    """True when the tables agree on every tuple shared by two subsets."""
    seen: dict[tuple[int, ...], int] = {}
    for mask in ksubsets(f.n, f.k):
        elems = elements(mask)
        t = f.tables[subset_position(f.n, f.k)[mask]]
        for local, v in zip(itertools.product(range(f.k), repeat=f.r), t):
            xs = tuple(elems[i] for i in local)
            value = elems[int(v)]
            if seen.setdefault(xs, value) != value:
                return False
    return True


def simple_members_are_monarchies(ops: Iterable[IndexedOperation]) -> bool:
    """Checkable form of the standing hypothesis on an explicit op set."""
    return all(is_monarchy_indexed(f) is not None for f in ops if is_simple_indexed(f))


# ---------------------------------------------------------------------------
# r >= 4: one coordinate on every non-injective tuple


@dataclass(frozen=True)
class DominanceReport:
    position: Optional[int]
    witness: tuple[tuple[int, tuple[int, ...]], ...] = ()


def classify_16_2(f: IndexedOperation) -> DominanceReport:
    """Find the coordinate returned on every non-injective tuple, in every Y."""
    if f.r < 4:
        raise IndexedError(f"needs r >= 4, got r={f.r}")
    if f.k < f.r:
        raise IndexedError(f"needs k >= r, got k={f.k} r={f.r}")
    local = all_tuples(f.k, f.r)
    rows = np.flatnonzero(~injective_mask(f.k, f.r))
    alive = np.ones(f.r, dtype=bool)
    witness = []
    for mask, t in zip(ksubsets(f.n, f.k), f.tables):
        hits = local[rows] == t[rows][:, None]
        for row, h in zip(rows, hits):
            narrowed = alive & h
            if not np.array_equal(narrowed, alive):
                elems = elements(mask)
                witness.append((mask, tuple(elems[i] for i in local[row])))
                alive = narrowed
                if not alive.any():
                    return DominanceReport(None, tuple(witness))
    return DominanceReport(int(np.argmax(alive)) + 1)


# ---------------------------------------------------------------------------
# r = 2: dom_1 and the P1 / P2 / P± partition


@dataclass(frozen=True)
class Dom1Profile:
    dom1: frozenset
    count: int


def dom1_profile(f: IndexedOperation) -> Dom1Profile:
    """All (Y, a, b) with f_Y(a, b) = a != b."""
    if f.r != 2:
        raise IndexedError("dom1 is defined for binary indexed operations")
    out = set()
    for mask, t in zip(ksubsets(f.n, f.k), f.tables):
        elems = elements(mask)
        for i, j in itertools.permutations(range(f.k), 2):
            if t[i * f.k + j] == i:
                out.add((mask, elems[i], elems[j]))
    return Dom1Profile(frozenset(out), len(out))


@dataclass(frozen=True)
class PmPartitionReport:
    P1: tuple[int, ...]
    P2: tuple[int, ...]
    Ppm: tuple[int, ...]
    pairs: Mapping[int, tuple[int, int]]
    ambiguous: tuple[int, ...] = ()
    ill_formed: tuple[int, ...] = ()
    p2_shape: Optional[str] = None
    pm_shape: Optional[str] = None

    def summary(self) -> str:
        parts = [f"P1={len(self.P1)}", f"P2={len(self.P2)}", f"Ppm={len(self.Ppm)}"]
        if self.p2_shape:
            parts.append(f"p2_shape={self.p2_shape}")
        if self.pm_shape:
            parts.append(f"pm_shape={self.pm_shape}")
        if self.ill_formed:
            parts.append("ill_formed=" + ";".join(fmt_subset(m) for m in self.ill_formed))
        return " ".join(parts)


def _p2_shape(n: int, k: int, P2: Sequence[int], Ppm: Sequence[int]) -> Optional[str]:
    if not P2:
        return None
    if len(P2) == 1 and not Ppm:
        return "singleton"
    full = (1 << n) - 1
    if len(P2) == 2 and not Ppm and 2 * k == n and P2[0] | P2[1] == full:
        return "complement-pair"
    return "violated"


def _pm_shape(n: int, k: int, Ppm: Sequence[int], pairs: Mapping[int, tuple[int, int]]) -> Optional[str]:
    if not Ppm:
        return None
    if len(Ppm) == 1:
        return "alpha"
    full = (1 << n) - 1
    for ystar in Ppm:
        ab = to_mask(pairs[ystar])
        if set(Ppm) == {m for m in ksubsets(n, k) if m & ab == ab} and all(
                to_mask(pairs[m]) == ab for m in Ppm):
            return "beta"
        if len(Ppm) == 2 and n == 2 * k - 2:
            other = next(m for m in Ppm if m != ystar)
            if other == (full & ~ystar) | ab:
                return "gamma"
    return "none"


def pm_partition(fstar: IndexedOperation) -> PmPartitionReport:
    """Split the k-subsets by how f*_Y acts on pairs of distinct elements."""
    if fstar.r != 2:
        raise IndexedError("pm_partition needs a binary indexed operation")
    n, k = fstar.n, fstar.k
    P1, P2, Ppm, ambiguous, ill = [], [], [], [], []
    pairs: dict[int, tuple[int, int]] = {}
    for mask, t in zip(ksubsets(n, k), fstar.tables):
        elems = elements(mask)
        second = [(elems[i], elems[j]) for i, j in itertools.permutations(range(k), 2)
                  if t[i * k + j] == j]
        if not second:
            P1.append(mask)
            continue
        if len(second) == k * (k - 1):
            P2.append(mask)
            continue
        Ppm.append(mask)
        unordered = {frozenset(p) for p in second}
        if len(unordered) != 1:
            ill.append(mask)
            continue
        pair = min(second)
        pairs[mask] = pair
        if len(second) == 2:
            ambiguous.append(mask)
    return PmPartitionReport(
        tuple(P1), tuple(P2), tuple(Ppm), pairs, tuple(ambiguous), tuple(ill),
        _p2_shape(n, k, P2, Ppm),
        _pm_shape(n, k, [m for m in Ppm if m in pairs], pairs) if not ill else None,
    )
