"""Fixed verification grids behind ``arrowlab suite``."""
from __future__ import annotations

import contextlib
import math
from dataclasses import dataclass
from typing import Callable, Iterator, Optional
from unittest import mock

from . import verify
from .choice import close_family, is_full, seed_family
from .clone import close, r_of
from .operations import Operation, make_f_rlk, tuple_index
from .parallel import ordered_map, worker_count
from .verify import VerificationReport

PROFILES = ("quick", "full")
FAULTS = ("g3",)

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3


@dataclass(frozen=True)
class SuiteResult:
    profile: str
    reports: tuple[VerificationReport, ...]
    statuses: tuple[int, ...]

    @property
    def status(self) -> int:
        return max(self.statuses, default=EXIT_PASS)

    def canonical(self) -> str:
        """Report without timings; identical across runs and worker counts."""
        lines = [f"suite profile={self.profile} checks={len(self.reports)} "
                 f"failed={sum(not r.passed for r in self.reports)} status={self.status}"]
        for rep in self.reports:
            lines.append(rep.line(timing=False))
            lines.extend("  " + p.line(timing=False) for p in rep.parts)
        return "\n".join(lines) + "\n"


def condorcet_check(n: int, k: int, workers: Optional[int] = None,
                    max_size: int = 10**6) -> tuple[VerificationReport, int]:
    """Close the rational seed under g_{3;1,2}; pass when the result is full."""
    g = verify.make_g_r12(n, 3)
    seed = seed_family("rational", n, k)
    closed = close_family(seed, [g], max_size=max_size, workers=workers)
    full = is_full(closed)
    status = EXIT_PASS if full else EXIT_FAIL
    if not closed.complete:
        status = EXIT_BUDGET
    detail = f"seed={len(seed)} closed={len(closed)} full={str(full).lower()}"
    if not closed.complete:
        detail += " guard=max_size"
    return VerificationReport("condorcet", "pass" if full else "fail", len(closed),
                              (("n", n), ("k", k)), detail=detail), status


def r_of_check(gen: Operation, cap: int, expected: float,
               workers: Optional[int] = None) -> tuple[VerificationReport, int]:
    c = close([gen], cap, workers=workers)
    if not c.complete:
        return VerificationReport("r-of", "skip", len(c), (("n", gen.n), ("cap", cap)),
                                  detail="guard=budget"), EXIT_BUDGET
    r = r_of(c)
    shown = "infinity-within-cap" if r == math.inf else str(r)
    ok = r == expected
    return VerificationReport("r-of", "pass" if ok else "fail", len(c),
                              (("n", gen.n), ("gen_r", gen.r), ("cap", cap)),
                              detail=f"r={shown} members={len(c)}"), EXIT_PASS if ok else EXIT_FAIL


def _grid_12_3(max_n: int) -> list[tuple[int, int, int]]:
    return [(n, k, ks) for n in range(2, max_n + 1) for k in range(1, n) for ks in range(k)
            if verify.admissible_12_3(n, k, ks)]


def tasks(profile: str) -> list[Callable[[Optional[int]], tuple[VerificationReport, int]]]:
    """The fixed task list of a profile, in report order."""
    if profile not in PROFILES:
        raise ValueError(f"unknown profile {profile!r}; choose from {', '.join(PROFILES)}")

    def plain(fn, *args):
        def run(workers):
            rep = fn(*args)
            return rep, EXIT_PASS if rep.passed else EXIT_FAIL
        return run

    out = [plain(verify.verify_2_7, n, r) for n, r in ((5, 3), (5, 4), (6, 5))]
    out += [plain(verify.verify_7_10, n, r) for n, r in ((5, 3), (3, 4), (2, 3))]
    out += [plain(verify.verify_12_3, *p) for p in _grid_12_3(8 if profile == "quick" else 10)]
    out += [plain(verify.verify_13_6, *p) for p in ((5, 0, 1, 2), (6, 3, 4, 5))]
    out += [plain(verify.verify_13_7, n, a) for n, a in ((5, (0, 1, 2, 3)), (6, (1, 2, 4, 5)))]
    if profile == "full":
        out += [plain(verify.verify_2_9A_diagram, n) for n in (3, 4)]
        out += [plain(verify.verify_2_9A_diagram, n, (0, 1, 2), True) for n in (3, 4)]
        out += [plain(verify.verify_16_4, n, k, r) for n, k, r in ((6, 5, 3), (6, 4, 3))]
        out.append(plain(verify.verify_13_4_shape, verify.make_f_bc(5, 0, 1), (0, 1)))
        out += [lambda w, n=n: condorcet_check(n, 2, w) for n in (3, 4)]
        out.append(lambda w: r_of_check(verify.make_g_r12(3, 3), 3, 3, w))
        out.append(lambda w: r_of_check(make_f_rlk(5, 4, 1, 2), 3, math.inf, w))
        out.append(lambda w: r_of_check(make_f_rlk(5, 4, 1, 2), 4, 4, w))
    return out


def run_suite(profile: str, workers: Optional[int] = None) -> SuiteResult:
    """Run every task; independent tasks fan out, results keep task order."""
    workers = worker_count(workers)
    results = ordered_map(lambda t: t(workers), tasks(profile), workers)
    return SuiteResult(profile, tuple(r for r, _ in results), tuple(s for _, s in results))


@contextlib.contextmanager
def inject_fault(name: str) -> Iterator[None]:
    """Swap in a deliberately broken constructor for the duration of the block.

    ``g3`` flips g_{3;1,2}(0, 1, 1) from 1 to 0, which keeps the table
    conservative but breaks every identity built on it.
    """
    if name not in FAULTS:
        raise ValueError(f"unknown fault {name!r}; choose from {', '.join(FAULTS)}")
    real = verify.make_g_r12

    def broken(n: int, r: int) -> Operation:
        g = real(n, r)
        if r != 3:
            return g
        table = g.table.copy()
        table[tuple_index(n, (0, 1, 1))] = 0
        return Operation(n, r, table)

    with mock.patch.object(verify, "make_g_r12", broken):
        yield
