"""Exhaustive checks of the explicit term constructions and combinatorial lemmas.

Every verifier builds the terms exactly as written (same nesting) and
compares them against the claimed target over the whole finite domain.
"""
from __future__ import annotations

import itertools
import time
from collections import deque
from dataclasses import dataclass, field
from math import comb
from typing import Callable, Optional, Sequence

import numpy as np

from .choice import elements, ksubsets
from .indexed import compose_indexed, lift_simple
from .operations import (
    Operation,
    all_tuples,
    classify_on_noninjective,
    compose,
    dominance_witness,
    from_function,
    injective_mask,
    make_f_rlk,
    make_g_r12,
    make_projection,
    permute_variables,
)


class PreconditionError(ValueError):
    pass


@dataclass(frozen=True)
class VerificationReport:
    claim: str
    verdict: str
    scanned: int
    params: tuple[tuple[str, object], ...] = ()
    witness: Optional[tuple] = None
    detail: str = ""
    time_ms: float = field(default=0.0, compare=False)
    parts: tuple["VerificationReport", ...] = ()

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def line(self, timing: bool = True) -> str:
        out = [self.claim, self.verdict, f"scanned={self.scanned}"]
        if timing:
            out.append(f"time_ms={self.time_ms:.1f}")
        if self.witness is not None:
            out.append("witness=" + _fmt(self.witness))
        out.extend(f"{k}={_fmt(v)}" for k, v in self.params)
        if self.detail:
            out.append(self.detail)
        return " ".join(out)


def _fmt(v) -> str:
    if isinstance(v, (tuple, list)):
        return "(" + ",".join(_fmt(x) for x in v) + ")"
    return str(v)


class _Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.ms = (time.perf_counter() - self.t0) * 1000.0


def _first_difference(a: Operation, b: Operation, rows: Optional[np.ndarray] = None):
    diff = a.table != b.table
    if rows is not None:
        keep = np.zeros_like(diff)
        keep[rows] = True
        diff &= keep
    bad = np.flatnonzero(diff)
    if not len(bad):
        return None
    return tuple(int(x) for x in all_tuples(a.n, a.r)[bad[0]])


def _proj(n: int, r: int) -> list[Operation]:
    return [make_projection(n, r, t) for t in range(1, r + 1)]


# ---------------------------------------------------------------------------
# r >= 4: dominance on tuples with a repetition


def verify_2_5(f: Operation) -> VerificationReport:
    if f.r < 4:
        raise PreconditionError(f"needs arity >= 4, got {f.r}")
    with _Timer() as t:
        cls = classify_on_noninjective(f)
        scanned = int((~injective_mask(f.n, f.r)).sum())
    if cls.kind == "projection":
        return VerificationReport("2.5", "pass", scanned, (("n", f.n), ("r", f.r)),
                                  detail=f"ell={cls.position}", time_ms=t.ms)
    # tuples whose sets of matching coordinates have empty intersection
    rows = np.flatnonzero(~injective_mask(f.n, f.r))
    tuples = all_tuples(f.n, f.r)[rows]
    witness = dominance_witness(tuples, tuples == f.table[rows][:, None])
    return VerificationReport("2.5", "fail", scanned, (("n", f.n), ("r", f.r)),
                              witness=witness, detail=f"kind={cls.kind}", time_ms=t.ms)


# ---------------------------------------------------------------------------
# f_{r;1,2} in F  =>  f_{r+1;1,2} in F


def term_2_7(r: int, f: Callable[[int, int], object], p: Callable[[int], object],
             c: Callable[[object, Sequence[object]], object]):
    """The (r+1)-ary composite built from f_{r;1,m} members.

    ``f(l, k)`` returns f_{r;l,k}, ``p(j)`` the j-th projection of arity r+1
    and ``c`` composes; the same term serves simple and indexed operations.
    """
    if r >= 5:
        taus = []
        for m in range(3, r + 1):
            # x_{m+1} is omitted
            args = [p(j) for j in range(1, m + 1)] + [p(j) for j in range(m + 2, r + 2)]
            taus.append(c(f(1, m), args))
        return c(f(1, 2), [p(1), p(2), *taus])
    if r == 4:
        tau1 = p(1)
        tau2 = c(f(1, 2), [p(1), p(2), p(3), p(4)])
        tau3 = c(f(1, 3), [p(1), p(2), p(3), p(5)])
        tau4 = c(f(1, 3), [p(1), p(2), p(4), p(5)])
        return c(f(1, 2), [tau1, tau2, tau3, tau4])
    if r == 3:
        tau2 = c(f(1, 2), [p(1), p(2), p(4)])
        tau3 = c(f(1, 2), [p(2), p(3), p(4)])
        return c(f(1, 2), [p(1), tau2, tau3])
    raise PreconditionError(f"needs r >= 3, got {r}")


def _check_2_7_params(n: int, r: int) -> None:
    if r < 3:
        raise PreconditionError(f"needs r >= 3, got {r}")
    if n < r + 1:
        raise PreconditionError(f"needs n >= r+1 for one-to-one (r+1)-tuples, got n={n} r={r}")


def verify_2_7(n: int, r: int) -> VerificationReport:
    _check_2_7_params(n, r)
    with _Timer() as t:
        g = term_2_7(r, lambda l, k: make_f_rlk(n, r, l, k), lambda j: make_projection(n, r + 1, j),
                     compose)
        target = make_f_rlk(n, r + 1, 1, 2)
        witness = _first_difference(g, target)
    return VerificationReport("2.7", "pass" if witness is None else "fail", n ** (r + 1),
                              (("n", n), ("r", r)), witness=witness, time_ms=t.ms)


def verify_16_4(n: int, k: int, r: int) -> VerificationReport:
    _check_2_7_params(n, r)
    if k < r + 1:
        raise PreconditionError(f"needs k >= r+1 so one-to-one (r+1)-tuples fit inside Y, got k={k}")
    if k > n:
        raise PreconditionError(f"needs k <= n, got k={k}")
    with _Timer() as t:
        g = term_2_7(r, lambda l, m: lift_simple(make_f_rlk(n, r, l, m), k),
                     lambda j: lift_simple(make_projection(n, r + 1, j), k), compose_indexed)
        target = lift_simple(make_f_rlk(n, r + 1, 1, 2), k)
        witness = None
        for mask, a, b in zip(ksubsets(n, k), g.tables, target.tables):
            bad = np.flatnonzero(a != b)
            if len(bad):
                elems = elements(mask)
                local = all_tuples(k, r + 1)[bad[0]]
                witness = (mask, tuple(elems[i] for i in local))
                break
    scanned = comb(n, k) * k ** (r + 1)
    return VerificationReport("16.4", "pass" if witness is None else "fail", scanned,
                              (("n", n), ("k", k), ("r", r)), witness=witness, time_ms=t.ms)


# ---------------------------------------------------------------------------
# ternary diagram on W


def eta_value(eta: Sequence[int], xs: Sequence[int], abar: Sequence[int]) -> int:
    """f_eta on W: first coordinate on permutations of abar, eta on repetitions."""
    x1, x2, x3 = xs
    if len({x1, x2, x3}) == 3:
        if sorted(xs) != sorted(abar):
            raise PreconditionError(f"{tuple(xs)} lies outside W")
        return x1
    if x1 == x2 == x3:
        return x1
    if x2 == x3:          # (x, y, y)
        return x1 if eta[0] == 1 else x2
    if x1 == x3:          # (x, y, x)
        return x1 if eta[1] == 1 else x2
    return x1 if eta[2] == 1 else x3   # (x, x, y)


def domain_w(n: int, abar: Sequence[int], noninjective_only: bool = False) -> list[tuple[int, int, int]]:
    out = []
    for xs in itertools.product(range(n), repeat=3):
        if len(set(xs)) < 3 or (not noninjective_only and sorted(xs) == sorted(abar)):
            out.append(xs)
    return out


def _diagram_steps(abar):
    def F(eta):
        return lambda x, y, z: eta_value(eta, (x, y, z), abar)

    f222, f122, f212 = F((2, 2, 2)), F((1, 2, 2)), F((2, 1, 2))
    f221, f121, f112, f211 = F((2, 2, 1)), F((1, 2, 1)), F((1, 1, 2)), F((2, 1, 1))

    def f_331(x, y, z):
        return x if len({x, y, z}) == 3 else z

    def g_312(x, y, z):
        return y if y == z else x

    steps = [
        ("(*)3", lambda x, y, z: f222(x, f222(y, x, z), f222(z, x, y)), f122),
        ("(*)4", lambda x, y, z: f122(x, y, f122(z, x, y)), f212),
        ("(*)5", f212, f_331),
        ("(*)7", lambda x, y, z: f212(x, z, y), f221),
        ("(*)7'", lambda x, y, z: f221(x, z, y), f212),
        ("(*)8", lambda x, y, z: f121(x, z, y), f112),
        ("(*)8'", lambda x, y, z: f112(x, z, y), f121),
        ("(*)9", lambda x, y, z: f121(x, f121(y, z, x), f121(z, x, y)), f221),
        ("(*)0", g_312, f211),
        ("(*)1", F((1, 1, 1)), lambda x, y, z: x),
    ]
    # (*)2: exchanging y and z maps f_eta to f_nu with nu = (eta1, eta3, eta2)
    for eta in itertools.product((1, 2), repeat=3):
        nu = (eta[0], eta[2], eta[1])
        steps.append((f"(*)2{''.join(map(str, eta))}",
                      lambda x, y, z, e=eta: F(e)(x, z, y), F(nu)))
    return steps


def verify_2_9A_diagram(n: int, abar: Sequence[int] = (0, 1, 2),
                        noninjective_only: bool = False) -> VerificationReport:
    """All composition identities of the ternary diagram, each checked on W.

    With ``noninjective_only`` the domain drops the permutations of abar,
    which is the reduced check used for the non-injective classification.
    """
    claim = "7.8" if noninjective_only else "2.9A"
    if n < 3:
        raise PreconditionError("needs n >= 3 for a one-to-one triple")
    if len(set(abar)) != 3 or any(not 0 <= a < n for a in abar):
        raise PreconditionError(f"abar must be three distinct elements of range({n})")
    with _Timer() as t:
        W = domain_w(n, abar, noninjective_only)
        parts = []
        for name, lhs, rhs in _diagram_steps(tuple(abar)):
            t0 = time.perf_counter()
            witness = next((xs for xs in W if lhs(*xs) != rhs(*xs)), None)
            parts.append(VerificationReport(
                f"{claim}{name}", "pass" if witness is None else "fail", len(W),
                witness=witness, time_ms=(time.perf_counter() - t0) * 1000.0))
    failed = [p for p in parts if not p.passed]
    return VerificationReport(
        claim, "fail" if failed else "pass", sum(p.scanned for p in parts),
        (("n", n), ("abar", tuple(abar)), ("W", len(W))),
        witness=failed[0].witness if failed else None,
        detail=f"steps={len(parts)}" + (f" failed={failed[0].claim}" if failed else ""),
        time_ms=t.ms, parts=tuple(parts))


# ---------------------------------------------------------------------------


def term_7_10(n: int, r: int) -> Operation:
    """g(x_1..x_{r+1}) = g_r(x_1, g_r(x_1, ..., x_r), x_4, ..., x_{r+1})."""
    g = make_g_r12(n, r)
    p = _proj(n, r + 1)
    inner = compose(g, p[:r])
    return compose(g, [p[0], inner, *p[3:]])


def verify_7_10(n: int, r: int) -> VerificationReport:
    if r < 3:
        raise PreconditionError(f"needs r >= 3, got {r}")
    if n < 2:
        raise PreconditionError(f"needs n >= 2, got {n}")
    with _Timer() as t:
        witness = _first_difference(term_7_10(n, r), make_g_r12(n, r + 1))
    return VerificationReport("7.10", "pass" if witness is None else "fail", n ** (r + 1),
                              (("n", n), ("r", r)), witness=witness, time_ms=t.ms)


# ---------------------------------------------------------------------------
# k-subset intersection graph


@dataclass(frozen=True)
class IntersectionComponents:
    components: tuple[tuple[int, ...], ...]
    edges_checked: int


def intersection_components(n: int, k: int, kstar: int) -> IntersectionComponents:
    """Connected components of the graph joining Y, Z with |Y & Z| = kstar."""
    vertices = ksubsets(n, k)
    adj = {v: [w for w in vertices if w != v and bin(v & w).count("1") == kstar] for v in vertices}
    seen, comps = set(), []
    for v in vertices:
        if v in seen:
            continue
        comp, queue = [], deque([v])
        seen.add(v)
        while queue:
            u = queue.popleft()
            comp.append(u)
            for w in adj[u]:
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
        comps.append(tuple(sorted(comp)))
    return IntersectionComponents(tuple(comps), len(vertices) * (len(vertices) - 1))


def admissible_12_3(n: int, k: int, kstar: int) -> bool:
    return 0 <= kstar < k < n and 2 * k - kstar <= n


def verify_12_3(n: int, k: int, kstar: int) -> VerificationReport:
    if not admissible_12_3(n, k, kstar):
        raise PreconditionError(f"needs 0 <= k* < k < n and 2k - k* <= n, got n={n} k={k} k*={kstar}")
    with _Timer() as t:
        ic = intersection_components(n, k, kstar)
        comps = ic.components
        full = (1 << n) - 1
        # at n = 2, k = 1 the single class is also a complement doubleton; report beta there
        if n == 2 * k and kstar == 0 and all(
                len(c) == 2 and c[0] | c[1] == full for c in comps):
            verdict, case = "pass", "case-beta"
        elif len(comps) == 1:
            verdict, case = "pass", "case-alpha"
        else:
            verdict, case = "fail", "case-none"
    witness = None
    if verdict == "fail":
        witness = (comps[0][0], comps[1][0])
    return VerificationReport("12.3", verdict, ic.edges_checked,
                              (("n", n), ("k", k), ("kstar", kstar)), witness=witness,
                              detail=f"{case} components={len(comps)}", time_ms=t.ms)


def propagate_class(n: int, k: int, kstar: int, seed: int) -> frozenset:
    """Smallest vertex set containing seed and closed under |Y & Z| = kstar."""
    comps = intersection_components(n, k, kstar).components
    return frozenset(next(c for c in comps if seed in c))


# ---------------------------------------------------------------------------
# the r = 2 constructions


def make_f_bc(n: int, b: int, c: int) -> Operation:
    """Second argument on the two orderings of {b, c}, first argument elsewhere."""
    if b == c:
        raise PreconditionError("f_{b,c} needs b != c")
    return from_function(n, 2, lambda x, y: y if x != y and {x, y} == {b, c} else x)


def verify_13_4_shape(f: Operation, astar: Sequence[int]) -> VerificationReport:
    a1, a2 = astar
    if f.r != 2:
        raise PreconditionError("needs a binary operation")
    if a1 == a2:
        raise PreconditionError("astar must be one-to-one")
    if f.n < 3:
        raise PreconditionError("needs n >= 3")
    with _Timer() as t:
        witness, clause = None, ""
        for b1, b2 in ((a1, a2), (a2, a1)):
            if f(b1, b2) != b2:
                witness, clause = (b1, b2), "b"
                break
        if witness is None:
            for b1, b2 in itertools.permutations(range(f.n), 2):
                if not {b1, b2} <= {a1, a2} and f(b1, b2) != b1:
                    witness, clause = (b1, b2), "c"
                    break
    return VerificationReport("13.4", "pass" if witness is None else "fail", f.n * (f.n - 1),
                              (("n", f.n), ("astar", (a1, a2))), witness=witness,
                              detail=f"clause={clause}" if clause else "", time_ms=t.ms)


def _check_distinct(n: int, xs: Sequence[int], need: int) -> None:
    if len(set(xs)) != len(xs):
        raise PreconditionError(f"elements must be pairwise distinct, got {tuple(xs)}")
    if any(not 0 <= x < n for x in xs):
        raise PreconditionError(f"elements must lie in range({n})")
    if n < need:
        raise PreconditionError(f"needs n >= {need}, got {n}")


def term_13_6_literal(n: int, a1: int, a2: int, a3: int) -> Operation:
    """h_4 of the construction; satisfies h_4(a1, a2, a3) = a3."""
    p1, p2, p3 = _proj(n, 3)
    h1 = compose(make_f_bc(n, a1, a2), [p1, p2])
    h2 = compose(make_f_bc(n, a1, a3), [p1, p3])
    h3 = compose(make_f_bc(n, a2, a3), [h1, h2])
    return compose(make_f_bc(n, a1, a3), [p1, h3])


def term_13_6(n: int, a1: int, a2: int, a3: int) -> Operation:
    """Ternary g with g = x_1 on repetitions and g(a1, a2, a3) = a2."""
    return permute_variables(term_13_6_literal(n, a1, a3, a2), (1, 3, 2))


def _check_first_on_repetitions_and(g: Operation, abar: Sequence[int], value: int):
    rows = np.flatnonzero(~injective_mask(g.n, g.r))
    t = all_tuples(g.n, g.r)
    bad = rows[g.table[rows] != t[rows, 0]]
    if len(bad):
        return tuple(int(x) for x in t[bad[0]]), "i"
    if g(*abar) != value:
        return tuple(abar), "ii"
    return None, ""


def verify_13_6(n: int, a1: int, a2: int, a3: int) -> VerificationReport:
    _check_distinct(n, (a1, a2, a3), 5)
    with _Timer() as t:
        literal = term_13_6_literal(n, a1, a2, a3)
        w1, c1 = _check_first_on_repetitions_and(literal, (a1, a2, a3), a3)
        stated = term_13_6(n, a1, a2, a3)
        w2, c2 = _check_first_on_repetitions_and(stated, (a1, a2, a3), a2)
    parts = (
        VerificationReport("13.6-literal", "pass" if w1 is None else "fail", n**3, witness=w1,
                           detail=f"clause={c1}" if c1 else ""),
        VerificationReport("13.6-stated", "pass" if w2 is None else "fail", n**3, witness=w2,
                           detail=f"clause={c2}" if c2 else ""),
    )
    witness = w1 if w1 is not None else w2
    clause = c1 or c2
    return VerificationReport("13.6", "pass" if witness is None else "fail", 2 * n**3,
                              (("n", n), ("a", (a1, a2, a3))), witness=witness,
                              detail=f"clause={clause}" if clause else "", time_ms=t.ms, parts=parts)


def term_13_7(n: int, astar: Sequence[int]) -> Operation:
    """g(x) = g0(x1, g2(x1, x2, x4), g3(x1, x3, x4))."""
    a1, a2, a3, a4 = astar
    p1, p2, p3, p4 = _proj(n, 4)
    g0 = term_13_6(n, a1, a2, a3)
    g2 = term_13_6(n, a1, a2, a4)
    g3 = term_13_6(n, a1, a3, a4)
    return compose(g0, [p1, compose(g2, [p1, p2, p4]), compose(g3, [p1, p3, p4])])


def verify_13_7(n: int, astar: Sequence[int]) -> VerificationReport:
    astar = tuple(astar)
    if len(astar) != 4:
        raise PreconditionError("astar must have four entries")
    _check_distinct(n, astar, 5)
    with _Timer() as t:
        g = term_13_7(n, astar)
        witness, clause = _check_first_on_repetitions_and(g, astar, astar[1])
        cases = {"B": 0, "C": 0, "D": 0}
        for xs in all_tuples(n, 4)[~injective_mask(n, 4)]:
            b1, b2, b3, b4 = (int(x) for x in xs)
            if len({b1, b2, b4}) < 3:
                cases["B"] += 1
            elif len({b1, b3, b4}) < 3:
                cases["C"] += 1
            else:
                cases["D"] += 1
    detail = " ".join(f"case{k}={v}" for k, v in cases.items())
    if clause:
        detail += f" clause={clause}"
    return VerificationReport("13.7", "pass" if witness is None else "fail", n**4,
                              (("n", n), ("astar", astar)), witness=witness, detail=detail,
                              time_ms=t.ms)


CLAIMS = ("2.5", "2.7", "2.9A", "7.8", "7.10", "12.3", "13.4", "13.6", "13.7", "16.4")
