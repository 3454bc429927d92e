"""Finite operations on the carrier {0, ..., n-1} stored as dense lookup tables.

Argument positions are 1-based in the public API (x_1, ..., x_r); carrier
elements are 0-based.  Tables are row-major with x_1 most significant, so the
tuple (x_1, ..., x_r) lives at index sum(x_i * n**(r - i)).
"""
from __future__ import annotations

import itertools
import os
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

DEBUG = bool(os.environ.get("ARROWLAB_DEBUG"))


class OperationError(ValueError):
    pass


class GuardError(RuntimeError):
    """An instance exceeds a size guard; ``guard`` names the limit."""

    def __init__(self, message: str, guard: str):
        super().__init__(message)
        self.guard = guard


@lru_cache(maxsize=None)
def all_tuples(n: int, r: int) -> np.ndarray:
    """Every r-tuple over range(n), one per row, in table order."""
    if r == 0:
        return np.zeros((1, 0), dtype=np.int64)
    grid = np.indices((n,) * r).reshape(r, -1).T
    grid = np.ascontiguousarray(grid, dtype=np.int64)
    grid.flags.writeable = False
    return grid


@lru_cache(maxsize=None)
def place_values(n: int, r: int) -> np.ndarray:
    w = n ** np.arange(r - 1, -1, -1, dtype=np.int64)
    w.flags.writeable = False
    return w


@lru_cache(maxsize=None)
def injective_mask(n: int, r: int) -> np.ndarray:
    """True at table positions whose tuple has pairwise distinct entries."""
    t = all_tuples(n, r)
    if r <= 1:
        mask = np.ones(len(t), dtype=bool)
    else:
        s = np.sort(t, axis=1)
        mask = np.all(s[:, 1:] != s[:, :-1], axis=1)
    mask.flags.writeable = False
    return mask


def tuple_index(n: int, xs: Sequence[int]) -> int:
    idx = 0
    for x in xs:
        idx = idx * n + int(x)
    return idx


def index_tuple(n: int, r: int, idx: int) -> tuple[int, ...]:
    out = []
    for _ in range(r):
        idx, x = divmod(idx, n)
        out.append(x)
    return tuple(reversed(out))


@dataclass(frozen=True, eq=False)
class Operation:
    """An r-ary operation on an n-element carrier."""

    n: int
    r: int
    table: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.n < 1 or self.r < 1:
            raise OperationError(f"need n >= 1 and r >= 1, got n={self.n} r={self.r}")
        table = np.asarray(self.table)
        if table.shape != (self.n**self.r,):
            raise OperationError(
                f"table has {table.size} entries, expected n^r = {self.n ** self.r}")
        if table.size and (table.min() < 0 or table.max() >= self.n):
            raise OperationError("table entry outside 0..n-1")
        table = np.array(table, dtype=np.uint8 if self.n <= 256 else np.int64)
        table.flags.writeable = False
        object.__setattr__(self, "table", table)

    @property
    def key(self) -> tuple[int, bytes]:
        return (self.r, self.table.tobytes())

    def __eq__(self, other):
        if not isinstance(other, Operation):
            return NotImplemented
        return self.n == other.n and self.key == other.key

    def __hash__(self):
        return hash((self.n, self.key))

    def __lt__(self, other: "Operation"):
        return self.key < other.key

    def __call__(self, *xs: int) -> int:
        return evaluate(self, xs)

    def values(self) -> list[int]:
        return [int(v) for v in self.table]


@dataclass(frozen=True)
class Permutation:
    """A bijection of the carrier, given by its image list."""

    image: tuple[int, ...]

    def __post_init__(self):
        image = tuple(int(x) for x in self.image)
        if sorted(image) != list(range(len(image))):
            raise OperationError(f"not a permutation: {image}")
        object.__setattr__(self, "image", image)

    @property
    def n(self) -> int:
        return len(self.image)

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(n)))

    @classmethod
    def transposition(cls, n: int, a: int = 0, b: int = 1) -> "Permutation":
        image = list(range(n))
        image[a], image[b] = image[b], image[a]
        return cls(tuple(image))

    @classmethod
    def cycle(cls, n: int) -> "Permutation":
        return cls(tuple((i + 1) % n for i in range(n)))

    def __call__(self, x: int) -> int:
        return self.image[x]

    def inverse(self) -> "Permutation":
        inv = [0] * self.n
        for i, y in enumerate(self.image):
            inv[y] = i
        return Permutation(tuple(inv))

    def then(self, other: "Permutation") -> "Permutation":
        """x -> other(self(x))."""
        return Permutation(tuple(other.image[y] for y in self.image))

    def array(self) -> np.ndarray:
        return np.array(self.image, dtype=np.int64)


def per_generators(n: int) -> list[Permutation]:
    """Transposition (0 1) and the full cycle; together they generate Per(X)."""
    if n < 2:
        return []
    gens = [Permutation.transposition(n, 0, 1)]
    if n > 2:
        gens.append(Permutation.cycle(n))
    return gens


def from_function(n: int, r: int, fn) -> Operation:
    """Tabulate a Python callable taking r positional elements."""
    table = [fn(*xs) for xs in itertools.product(range(n), repeat=r)]
    return Operation(n, r, np.array(table))


def make_projection(n: int, r: int, t: int) -> Operation:
    if not 1 <= t <= r:
        raise OperationError(f"projection position t={t} outside 1..{r}")
    return Operation(n, r, all_tuples(n, r)[:, t - 1])


def evaluate(f: Operation, xs: Sequence[int]) -> int:
    if len(xs) != f.r:
        raise OperationError(f"arity mismatch: operation has r={f.r}, got {len(xs)} arguments")
    for x in xs:
        if not 0 <= x < f.n:
            raise OperationError(f"element {x} outside carrier of size {f.n}")
    return int(f.table[tuple_index(f.n, xs)])


def _lookup(f: Operation, args: np.ndarray) -> np.ndarray:
    """Evaluate f row-wise on an (N, f.r) array of arguments."""
    return f.table[args @ place_values(f.n, f.r)]


def compose(outer: Operation, inners: Sequence[Operation]) -> Operation:
    """result(xs) = outer(inner_1(xs), ..., inner_m(xs))."""
    if len(inners) != outer.r:
        raise OperationError(f"outer has arity {outer.r}, got {len(inners)} inner operations")
    if not inners:
        raise OperationError("compose needs at least one inner operation")
    n, r = outer.n, inners[0].r
    for g in inners:
        if g.n != n:
            raise OperationError("carrier mismatch in compose")
        if g.r != r:
            raise OperationError("inner operations must share one arity")
    idx = np.zeros(n**r, dtype=np.int64)
    for g in inners:
        idx = idx * n + g.table
    out = Operation(n, r, outer.table[idx])
    if DEBUG and all(is_conservative(g) for g in (outer, *inners)) and not is_conservative(out):
        raise AssertionError("composition of conservative operations is not conservative")
    return out


def conjugate(f: Operation, pi: Permutation) -> Operation:
    """result(x_1..x_r) = pi^-1(f(pi(x_1), ..., pi(x_r)))."""
    if pi.n != f.n:
        raise OperationError(f"permutation size {pi.n} != carrier size {f.n}")
    p = pi.array()
    pinv = pi.inverse().array()
    mapped = p[all_tuples(f.n, f.r)]
    return Operation(f.n, f.r, pinv[_lookup(f, mapped)])


def permute_variables(f: Operation, sigma: Sequence[int]) -> Operation:
    """f_sigma(x_1..x_r) = f(x_sigma(1), ..., x_sigma(r)); sigma is 1-based."""
    if sorted(sigma) != list(range(1, f.r + 1)):
        raise OperationError(f"not a permutation of 1..{f.r}: {sigma}")
    cols = [s - 1 for s in sigma]
    return Operation(f.n, f.r, _lookup(f, all_tuples(f.n, f.r)[:, cols]))


def is_conservative(f: Operation) -> bool:
    t = all_tuples(f.n, f.r)
    return bool(np.all(np.any(t == f.table[:, None], axis=1)))


def is_monarchy(f: Operation) -> Optional[int]:
    t = all_tuples(f.n, f.r)
    for pos in range(f.r):
        if np.array_equal(t[:, pos], f.table):
            return pos + 1
    return None


def make_f_rlk(n: int, r: int, l: int, k: int) -> Operation:
    """x_l on tuples with a repetition, x_k on one-to-one tuples."""
    if not (1 <= l <= r and 1 <= k <= r):
        raise OperationError(f"positions l={l}, k={k} must lie in 1..{r}")
    if l == k:
        raise OperationError("f_{r;l,k} needs l != k")
    t = all_tuples(n, r)
    return Operation(n, r, np.where(injective_mask(n, r), t[:, k - 1], t[:, l - 1]))


def make_g_r12(n: int, r: int) -> Operation:
    """x_2 when x_2 = x_3 = ... = x_r, otherwise x_1."""
    if r < 2:
        raise OperationError("g_{r;1,2} needs r >= 2")
    t = all_tuples(n, r)
    tail_const = np.all(t[:, 1:] == t[:, 1:2], axis=1)
    return Operation(n, r, np.where(tail_const, t[:, 1], t[:, 0]))


def minors(f: Operation) -> set[Operation]:
    """All (r-1)-ary operations obtained by identifying two argument positions."""
    if f.r < 2:
        raise OperationError("minors need arity >= 2")
    t = all_tuples(f.n, f.r - 1)
    out = set()
    for i, j in itertools.combinations(range(f.r), 2):
        # position j takes the value of position i; the others keep their order
        cols = []
        src = 0
        for pos in range(f.r):
            if pos == j:
                cols.append(i if i < j else i - 1)
            else:
                cols.append(src)
                src += 1
        out.add(Operation(f.n, f.r - 1, _lookup(f, t[:, cols])))
    return out


# ---------------------------------------------------------------------------
# behaviour on tuples with a repetition


@dataclass(frozen=True)
class NonInjectiveClassification:
    """How an operation acts on its non-injective tuples.

    ``kind`` is one of ``projection``, ``g-like``, ``eta-table`` or
    ``irregular``.  ``eta`` is filled for ternary operations whose behaviour
    depends only on the repetition pattern.  ``witness`` holds tuples that
    rule out a single dominating coordinate.
    """

    kind: str
    position: Optional[int] = None
    eta: Optional[tuple[int, int, int]] = None
    witness: tuple[tuple[int, ...], ...] = ()


def equality_pattern(xs: Sequence[int]) -> tuple[int, ...]:
    """Canonical restricted-growth labelling, e.g. (5, 2, 2) -> (0, 1, 1)."""
    seen: dict[int, int] = {}
    return tuple(seen.setdefault(x, len(seen)) for x in xs)


def _coordinate_sets(f: Operation, rows: np.ndarray) -> np.ndarray:
    """Boolean (N, r): which coordinates of each tuple equal the output."""
    t = all_tuples(f.n, f.r)[rows]
    return t == f.table[rows][:, None]


def dominance_witness(tuples: np.ndarray, hits: np.ndarray) -> tuple[tuple[int, ...], ...]:
    """Greedy set of tuples whose admissible-coordinate sets have empty intersection.

    ``hits[i, j]`` says coordinate j of tuple i equals the output.  Returns an
    empty tuple when some coordinate is admissible everywhere.
    """
    alive = np.ones(hits.shape[1], dtype=bool)
    chosen = []
    for i in range(len(hits)):
        narrowed = alive & hits[i]
        if not np.array_equal(narrowed, alive):
            chosen.append(tuple(int(x) for x in tuples[i]))
            alive = narrowed
            if not alive.any():
                return tuple(chosen)
    return ()


def _eta_of_ternary(f: Operation) -> Optional[tuple[int, int, int]]:
    """Eta table for a ternary conservative op if it depends only on the pattern.

    eta(1): f(x,y,y), eta(2): f(x,y,x), eta(3): f(x,x,y); value 1 means the
    output is the first distinct value x, value 2 means y.
    """
    n = f.n
    eta = []
    for shape in ((0, 1, 1), (0, 1, 0), (0, 0, 1)):
        seen = set()
        for x in range(n):
            for y in range(n):
                if x == y:
                    continue
                xs = tuple(x if s == 0 else y for s in shape)
                v = evaluate(f, xs)
                if v not in (x, y):
                    return None
                seen.add(1 if v == x else 2)
        if len(seen) != 1:
            return None
        eta.append(seen.pop())
    return tuple(eta)


def _pattern_witness(f: Operation) -> tuple[tuple[int, ...], ...]:
    """Two tuples with the same equality pattern whose outputs sit in different classes."""
    rows = np.flatnonzero(~injective_mask(f.n, f.r))
    t = all_tuples(f.n, f.r)
    first: dict[tuple[int, ...], tuple[tuple[int, ...], frozenset]] = {}
    for i in rows:
        xs = tuple(int(x) for x in t[i])
        v = int(f.table[i])
        where = frozenset(p for p, x in enumerate(xs) if x == v)
        if not where:
            return (xs, xs)
        pat = equality_pattern(xs)
        if pat in first:
            other, owhere = first[pat]
            if owhere != where:
                return (other, xs)
        else:
            first[pat] = (xs, where)
    return ()


def classify_on_noninjective(f: Operation) -> NonInjectiveClassification:
    if f.r < 2:
        raise OperationError("classification needs arity >= 2")
    rows = np.flatnonzero(~injective_mask(f.n, f.r))
    hits = _coordinate_sets(f, rows)
    full = np.all(hits, axis=0)
    if full.any():
        return NonInjectiveClassification("projection", position=int(np.argmax(full)) + 1)
    g = make_g_r12(f.n, f.r)
    eta = _eta_of_ternary(f) if (f.r == 3 and f.n >= 3) else None
    if np.array_equal(f.table[rows], g.table[rows]):
        return NonInjectiveClassification("g-like", eta=eta)
    if eta is not None:
        return NonInjectiveClassification("eta-table", eta=eta)
    witness = _pattern_witness(f)
    if not witness:
        witness = dominance_witness(all_tuples(f.n, f.r)[rows], hits)
    return NonInjectiveClassification("irregular", witness=witness)

