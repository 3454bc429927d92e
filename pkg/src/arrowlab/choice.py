"""Choice functions on k-subsets, families of them, and closure under averaging."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb
from typing import Iterable, Optional, Sequence

import numpy as np

from .operations import (
    GuardError,
    Operation,
    Permutation,
    classify_on_noninjective,
    is_conservative,
    per_generators,
)
from .parallel import chunks, ordered_map, worker_count

MAX_SUBSETS = 64
DEFAULT_MAX_FAMILY = 10**6


class FamilyError(ValueError):
    pass


class AveragingError(FamilyError):
    def __init__(self, message: str, subset: Optional[int] = None):
        super().__init__(message)
        self.subset = subset


# ---------------------------------------------------------------------------
# k-subsets as bitmasks


def _check_nk(n: int, k: int) -> None:
    if n < 2:
        raise FamilyError(f"carrier needs n >= 2, got {n}")
    # k = n is admitted as the degenerate one-subset case
    if not 1 <= k <= n:
        raise FamilyError(f"k must satisfy 1 <= k <= n, got n={n} k={k}")


@lru_cache(maxsize=None)
def ksubsets(n: int, k: int) -> tuple[int, ...]:
    """All k-subsets of range(n) as bitmasks, increasing."""
    _check_nk(n, k)
    masks = [sum(1 << i for i in c) for c in itertools.combinations(range(n), k)]
    return tuple(sorted(masks))


@lru_cache(maxsize=None)
def subset_position(n: int, k: int) -> dict[int, int]:
    return {m: i for i, m in enumerate(ksubsets(n, k))}


def elements(mask: int) -> tuple[int, ...]:
    out, i = [], 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def to_mask(xs: Iterable[int]) -> int:
    m = 0
    for x in xs:
        m |= 1 << x
    return m


def image_mask(mask: int, pi: Permutation) -> int:
    return to_mask(pi(x) for x in elements(mask))


def fmt_subset(mask: int) -> str:
    return "{" + ",".join(map(str, elements(mask))) + "}"


# ---------------------------------------------------------------------------


@dataclass(frozen=True, order=False)
class ChoiceFunction:
    """One chosen element per k-subset, subsets in increasing bitmask order."""

    n: int
    k: int
    choices: tuple[int, ...]

    def __post_init__(self):
        subsets = ksubsets(self.n, self.k)
        choices = tuple(int(x) for x in self.choices)
        if len(choices) != len(subsets):
            raise FamilyError(f"expected {len(subsets)} choices, got {len(choices)}")
        for mask, x in zip(subsets, choices):
            if not (0 <= x < self.n and mask >> x & 1):
                raise FamilyError(f"choice {x} not in subset {fmt_subset(mask)}")
        object.__setattr__(self, "choices", choices)

    def __call__(self, subset: int | Iterable[int]) -> int:
        mask = subset if isinstance(subset, int) else to_mask(subset)
        return self.choices[subset_position(self.n, self.k)[mask]]

    def __lt__(self, other: "ChoiceFunction") -> bool:
        return self.choices < other.choices

    def agreement(self, other: "ChoiceFunction") -> int:
        return sum(a == b for a, b in zip(self.choices, other.choices))


@dataclass(frozen=True)
class Family:
    """A deduplicated, canonically ordered set of choice functions."""

    n: int
    k: int
    members: tuple[ChoiceFunction, ...] = ()
    complete: bool = True

    def __post_init__(self):
        _check_nk(self.n, self.k)
        for c in self.members:
            if (c.n, c.k) != (self.n, self.k):
                raise FamilyError("member shape does not match the family")
        object.__setattr__(self, "members", tuple(sorted(set(self.members))))

    @classmethod
    def of(cls, n: int, k: int, choices: Iterable[Sequence[int]], complete: bool = True) -> "Family":
        return cls(n, k, tuple(ChoiceFunction(n, k, tuple(c)) for c in choices), complete)

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __contains__(self, c: ChoiceFunction) -> bool:
        return c in self._index

    @property
    def _index(self) -> frozenset:
        cached = self.__dict__.get("_index_cache")
        if cached is None:
            cached = frozenset(self.members)
            object.__setattr__(self, "_index_cache", cached)
        return cached

    def matrix(self) -> np.ndarray:
        return np.array([c.choices for c in self.members], dtype=np.int64).reshape(
            len(self.members), len(ksubsets(self.n, self.k)))


def full_size(n: int, k: int) -> int:
    return k ** comb(n, k)


# ---------------------------------------------------------------------------


def conjugate_choice(c: ChoiceFunction, pi: Permutation) -> ChoiceFunction:
    """(pi * c)(Y) = pi^-1(c(pi(Y)))."""
    if pi.n != c.n:
        raise FamilyError(f"permutation size {pi.n} != carrier size {c.n}")
    inv = pi.inverse()
    return ChoiceFunction(c.n, c.k, tuple(inv(c(image_mask(m, pi))) for m in ksubsets(c.n, c.k)))


def symmetric_close_family(F: Family) -> Family:
    gens = per_generators(F.n)
    seen = set(F.members)
    todo = list(F.members)
    while todo:
        c = todo.pop()
        for pi in gens:
            d = conjugate_choice(c, pi)
            if d not in seen:
                seen.add(d)
                todo.append(d)
    return Family(F.n, F.k, tuple(seen), F.complete)


def apply_averaging(f: Operation, cs: Sequence[ChoiceFunction]) -> ChoiceFunction:
    """result(Y) = f(c_1(Y), ..., c_r(Y))."""
    if len(cs) != f.r:
        raise FamilyError(f"operation has arity {f.r}, got {len(cs)} choice functions")
    n, k = cs[0].n, cs[0].k
    if f.n != n or any((c.n, c.k) != (n, k) for c in cs):
        raise FamilyError("choice functions and operation must share (n, k)")
    idx = np.zeros(len(ksubsets(n, k)), dtype=np.int64)
    for c in cs:
        idx = idx * n + np.asarray(c.choices)
    values = f.table[idx]
    for mask, x in zip(ksubsets(n, k), values):
        if not mask >> int(x) & 1:
            raise AveragingError(
                f"value {int(x)} escapes subset {fmt_subset(mask)}; operation is not conservative",
                subset=mask)
    return ChoiceFunction(n, k, tuple(int(x) for x in values))


def _apply_heads(f: Operation, heads, M: np.ndarray, frontier_start: int) -> list[tuple[int, ...]]:
    n = f.n
    out = []
    for head in heads:
        idx = np.zeros(M.shape[1], dtype=np.int64)
        for h in head:
            idx = idx * n + M[h]
        lasts = M if any(h >= frontier_start for h in head) else M[frontier_start:]
        if len(lasts):
            res = f.table[idx[None, :] * n + lasts]
            out.extend(tuple(int(v) for v in row) for row in res)
    return out


def close_family(F: Family, ops: Iterable[Operation], max_size: int = DEFAULT_MAX_FAMILY,
                 workers: Optional[int] = None) -> Family:
    """Least superset of F closed under every op, or a truncated family flagged incomplete."""
    ops = sorted(set(ops))
    n, k = F.n, F.k
    if len(ksubsets(n, k)) > MAX_SUBSETS:
        raise GuardError(f"C(n,k) = {len(ksubsets(n, k))} exceeds {MAX_SUBSETS}", "MAX_SUBSETS")
    for f in ops:
        if f.n != n:
            raise FamilyError("operation carrier does not match the family")
        if not is_conservative(f):
            raise FamilyError("close_family needs conservative operations")
    workers = worker_count(workers)
    keys = {c.choices for c in F.members}
    M = F.matrix()
    frontier_start = 0
    complete = True
    while frontier_start < len(M) and ops:
        work = []
        for f in ops:
            heads = list(itertools.product(range(len(M)), repeat=f.r - 1))
            for block in chunks(heads, workers):
                work.append((f, block))
        results = ordered_map(lambda w: _apply_heads(w[0], w[1], M, frontier_start), work, workers)
        fresh = set()
        for batch in results:
            fresh.update(v for v in batch if v not in keys)
        fresh = sorted(fresh)
        if len(keys) + len(fresh) > max_size:
            fresh = fresh[: max(0, max_size - len(keys))]
            complete = False
        frontier_start = len(M)
        if fresh:
            keys.update(fresh)
            M = np.vstack([M, np.array(fresh, dtype=np.int64)])
        if not complete:
            break
    return Family.of(n, k, keys, complete=complete and F.complete)


def is_simple_averaging(f: Operation, F: Family) -> bool:
    """f is conservative and F is closed under it."""
    if f.n != F.n or not is_conservative(f):
        return False
    if not F.members:
        return True
    M = F.matrix()
    keys = {c.choices for c in F.members}
    heads = itertools.product(range(len(M)), repeat=f.r - 1)
    for head in heads:
        idx = np.zeros(M.shape[1], dtype=np.int64)
        for h in head:
            idx = idx * f.n + M[h]
        res = f.table[idx[None, :] * f.n + M]
        for row in res:
            if tuple(int(v) for v in row) not in keys:
                return False
    return True


def is_full(F: Family) -> bool:
    return len(F) == full_size(F.n, F.k)


# ---------------------------------------------------------------------------
# seeds

SEED_KINDS = ("rational", "second_largest", "median", "full", "singleton")


def _selector(kind: str, k: int):
    if kind == "rational":
        return lambda ranked: ranked[-1]
    if kind == "second_largest":
        if k < 2:
            raise FamilyError("second_largest needs k >= 2")
        return lambda ranked: ranked[-2]
    if kind == "median":
        if k % 2 == 0:
            raise FamilyError(f"median needs odd k, got k={k}")
        return lambda ranked: ranked[k // 2]
    raise FamilyError(f"unknown seed kind {kind!r}")


def order_choice(n: int, k: int, order: Sequence[int], kind: str = "rational") -> ChoiceFunction:
    """Choice function induced by a linear order listed from lowest to highest."""
    if sorted(order) != list(range(n)):
        raise FamilyError(f"not a linear order of range({n}): {order}")
    rank = {x: i for i, x in enumerate(order)}
    pick = _selector(kind, k)
    return ChoiceFunction(n, k, tuple(
        pick(sorted(elements(m), key=rank.__getitem__)) for m in ksubsets(n, k)))


def seed_family(kind: str, n: int, k: int, order: Optional[Sequence[int]] = None) -> Family:
    _check_nk(n, k)
    if kind == "full":
        if full_size(n, k) > DEFAULT_MAX_FAMILY:
            raise GuardError(f"full family has {full_size(n, k)} members", "DEFAULT_MAX_FAMILY")
        return Family.of(n, k, itertools.product(*(elements(m) for m in ksubsets(n, k))))
    if kind == "singleton":
        return Family(n, k, (order_choice(n, k, order if order is not None else range(n)),))
    _selector(kind, k)  # validates kind and k before enumerating n! orders
    return Family(n, k, tuple(order_choice(n, k, o, kind) for o in itertools.permutations(range(n))))


# ---------------------------------------------------------------------------
# improvement step of the fullness argument


@dataclass(frozen=True)
class ImprovementOutcome:
    positive: bool
    best: Optional[ChoiceFunction]
    agreement: int
    total: int
    blocked: tuple[int, ...] = ()
    closure_violation: Optional[ChoiceFunction] = None
    transcript: tuple[str, ...] = field(default=(), repr=False)


def improvement_search(F: Family, c1: ChoiceFunction, ystar: int, a2: int,
                       ops: Iterable[Operation] = (), max_tuples: int = 200_000) -> ImprovementOutcome:
    """Look for a member that moves c1's choice at ystar to a2 and agrees elsewhere.

    Among members choosing a2 at ystar, the one agreeing with c1 on the most
    subsets is taken (ties: smallest choices vector).  Each op whose action
    on tuples with a repetition is the first projection is then applied to
    (best, d_2, ..., d_r) for members d_i, looking for a strictly better
    composite; one that is missing from F is reported as a closure violation.
    """
    if c1 not in F:
        raise FamilyError("c1 must be a member of the family")
    if ystar not in subset_position(F.n, F.k):
        raise FamilyError(f"{ystar:#b} is not a {F.k}-subset")
    if not ystar >> a2 & 1 or a2 == c1(ystar):
        raise FamilyError("a2 must be an element of ystar other than c1(ystar)")
    total = len(ksubsets(F.n, F.k))
    log = [f"target: move {fmt_subset(ystar)} from {c1(ystar)} to {a2}, keep the other {total - 1} subsets"]
    candidates = [c for c in F.members if c(ystar) == a2]
    if not candidates:
        log.append("no member chooses a2 at ystar")
        return ImprovementOutcome(False, None, 0, total, transcript=tuple(log))
    best = min(candidates, key=lambda c: (-c.agreement(c1), c.choices))
    score = best.agreement(c1)
    log.append(f"best member {list(best.choices)} agrees on {score}/{total}")
    violation = None
    if score < total - 1:
        for op in sorted(set(ops)):
            cls = classify_on_noninjective(op) if op.r >= 2 else None
            if cls is None or cls.kind != "projection" or cls.position != 1:
                log.append(f"op r={op.r}: skipped, not first-projection on repetitions")
                continue
            tried = 0
            for rest in itertools.product(F.members, repeat=op.r - 1):
                if tried >= max_tuples:
                    log.append(f"op r={op.r}: tuple budget {max_tuples} reached")
                    break
                tried += 1
                c = apply_averaging(op, (best, *rest))
                if c(ystar) != a2 or c.agreement(c1) <= score:
                    continue
                if c not in F:
                    violation = c
                    log.append(f"op r={op.r}: composite {list(c.choices)} improves but is not a member")
                    break
                best, score = c, c.agreement(c1)
                log.append(f"op r={op.r}: improved to {score}/{total}")
            else:
                log.append(f"op r={op.r}: no improving composite among {tried} tuples")
            if violation is not None or score == total - 1:
                break
    blocked = tuple(m for m in ksubsets(F.n, F.k) if m != ystar and best(m) != c1(m))
    for m in blocked:
        log.append(f"blocked {fmt_subset(m)}: c1 chooses {c1(m)}, best chooses {best(m)}")
    positive = not blocked
    log.append("positive" if positive else "negative")
    return ImprovementOutcome(positive, best, score, total, blocked, violation, tuple(log))
