"""Clone closure up to an arity cap, membership, r(F) and orbits."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .operations import (
    GuardError,
    Operation,
    conjugate,
    is_monarchy,
    make_projection,
    per_generators,
    permute_variables,
)
from .parallel import chunks, ordered_map, worker_count

MAX_SYMMETRIC_N = 12


class CloneError(ValueError):
    pass


@dataclass(frozen=True)
class Clone:
    n: int
    arity_cap: int
    members: tuple[Operation, ...]
    symmetric: bool = False
    complete: bool = True

    def of_arity(self, r: int) -> tuple[Operation, ...]:
        return tuple(f for f in self.members if f.r == r)

    def __len__(self):
        return len(self.members)

    def __contains__(self, f: Operation) -> bool:
        return f in self._index

    @property
    def _index(self) -> frozenset:
        cached = self.__dict__.get("_index_cache")
        if cached is None:
            cached = frozenset(self.members)
            object.__setattr__(self, "_index_cache", cached)
        return cached


def conjugation_closure(ops: Iterable[Operation]) -> list[Operation]:
    """Smallest superset of ``ops`` closed under conjugation by Per(X)."""
    ops = list(ops)
    if not ops:
        return []
    n = ops[0].n
    if n > MAX_SYMMETRIC_N:
        raise GuardError(f"symmetric closure needs n <= {MAX_SYMMETRIC_N}", "MAX_SYMMETRIC_N")
    gens = per_generators(n)
    seen = set(ops)
    todo = list(ops)
    while todo:
        f = todo.pop()
        for pi in gens:
            g = conjugate(f, pi)
            if g not in seen:
                seen.add(g)
                todo.append(g)
    return sorted(seen)


def _apply_block(outer: Operation, heads: Sequence[tuple[int, ...]], M: np.ndarray,
                 frontier_start: int) -> list[bytes]:
    """Apply ``outer`` to every argument tuple starting with one of ``heads``.

    The last argument ranges over all members when the head already touches
    the frontier, else only over frontier members (semi-naive evaluation).
    """
    n = outer.n
    out = []
    for head in heads:
        idx = np.zeros(M.shape[1], dtype=np.int64)
        for c in head:
            idx = idx * n + M[c]
        lasts = M if any(c >= frontier_start for c in head) else M[frontier_start:]
        if not len(lasts):
            continue
        res = outer.table[idx[None, :] * n + lasts]
        out.extend(row.tobytes() for row in res)
    return out


def _close_arity(n: int, r: int, outers: Sequence[Operation], symmetric: bool,
                 room: int, workers: int) -> tuple[list[Operation], bool]:
    """Term operations of arity r generated by ``outers``; returns (members, complete)."""
    start = [make_projection(n, r, t) for t in range(1, r + 1)]
    if symmetric:
        start = conjugation_closure(start)
    start = sorted(set(start))
    keys = {f.table.tobytes() for f in start}
    tables = [f.table for f in start]
    M = np.array(tables, dtype=np.int64)
    frontier_start = 0
    gens = per_generators(n) if symmetric else []
    while frontier_start < len(M):
        work = []
        for g in outers:
            heads = list(itertools.product(range(len(M)), repeat=g.r - 1))
            for block in chunks(heads, max(1, workers)):
                work.append((g, block))
        results = ordered_map(lambda w: _apply_block(w[0], w[1], M, frontier_start), work, workers)
        fresh = set()
        for batch in results:
            fresh.update(b for b in batch if b not in keys)
        if gens:
            for row in M[frontier_start:]:
                f = Operation(n, r, row)
                for pi in gens:
                    b = conjugate(f, pi).table.tobytes()
                    if b not in keys:
                        fresh.add(b)
        fresh = sorted(fresh)
        complete = True
        if len(keys) + len(fresh) > room:
            fresh = fresh[: max(0, room - len(keys))]
            complete = False
        frontier_start = len(M)
        if fresh:
            keys.update(fresh)
            new = np.array([np.frombuffer(b, dtype=np.uint8) for b in fresh], dtype=np.int64)
            M = np.vstack([M, new])
        if not complete:
            break
    members = sorted(Operation(n, r, row) for row in M)
    return members, complete


def close(generators: Iterable[Operation], arity_cap: int, *, n: Optional[int] = None,
          symmetric: bool = False, budget: int = 100_000,
          workers: Optional[int] = None) -> Clone:
    """Least clone containing ``generators``, materialised for arities 1..arity_cap.

    The r-ary part is computed as the closure of the r-ary projections under
    the generators applied coordinatewise; with ``symmetric`` the generators
    are first closed under conjugation.  Generators above the cap still act
    as outer operations; only members up to the cap are stored.  Member
    order is canonical (arity, then table bytes) whatever the worker count.
    """
    generators = list(generators)
    if generators:
        n = generators[0].n if n is None else n
        if any(g.n != n for g in generators):
            raise CloneError("generators must share one carrier")
    if n is None:
        raise CloneError("carrier size needed when there are no generators")
    if arity_cap < 1:
        raise CloneError("arity cap must be positive")
    workers = worker_count(workers)
    outers = conjugation_closure(generators) if symmetric else sorted(set(generators))
    members: list[Operation] = []
    complete = True
    for r in range(1, arity_cap + 1):
        part, complete = _close_arity(n, r, outers, symmetric, budget - len(members), workers)
        members.extend(part)
        if not complete:
            break
    return Clone(n, arity_cap, tuple(members), symmetric, complete)


def contains(c: Clone, f: Operation) -> Optional[bool]:
    """Membership; ``None`` means "not found within budget" on a truncated clone."""
    if f.n != c.n:
        raise CloneError("carrier mismatch")
    if f.r > c.arity_cap:
        raise CloneError(f"arity {f.r} above the clone's cap {c.arity_cap}")
    if f in c:
        return True
    return False if c.complete else None


def r_of(c: Clone) -> float:
    """Smallest arity with a non-monarchy member, or ``math.inf`` within the cap."""
    if not c.complete:
        raise CloneError("r(F) needs a complete closure")
    for f in c.members:
        if is_monarchy(f) is None:
            return f.r
    return math.inf


def orbit(f: Operation, *, variables: bool = True, carrier: bool = False) -> set[Operation]:
    moves = []
    if variables:
        moves.extend(lambda g, s=s: permute_variables(g, s)
                     for s in itertools.permutations(range(1, f.r + 1)))
    if carrier:
        if f.n > MAX_SYMMETRIC_N:
            raise GuardError(f"carrier orbits need n <= {MAX_SYMMETRIC_N}", "MAX_SYMMETRIC_N")
        moves.extend(lambda g, p=p: conjugate(g, p) for p in per_generators(f.n))
    seen = {f}
    todo = [f]
    while todo:
        g = todo.pop()
        for move in moves:
            h = move(g)
            if h not in seen:
                seen.add(h)
                todo.append(h)
    return seen
