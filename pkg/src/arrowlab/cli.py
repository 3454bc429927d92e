"""Command-line front end: ``arrowlab <group> <action> ...``.

Exit codes: 0 pass/success, 1 verification failure, 2 usage or parse
error, 3 a size guard or budget was hit.
"""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import io, verify
from .choice import (
    SEED_KINDS,
    close_family,
    fmt_subset,
    full_size,
    improvement_search,
    is_full,
    seed_family,
    symmetric_close_family,
    to_mask,
)
from .clone import close, contains, r_of
from .indexed import classify_16_2, dom1_profile, lift_simple, pm_partition
from .operations import (
    GuardError,
    all_tuples,
    classify_on_noninjective,
    is_conservative,
    is_monarchy,
    make_f_rlk,
    make_g_r12,
    make_projection,
)
from .parallel import worker_count
from .suite import (
    EXIT_BUDGET,
    EXIT_FAIL,
    EXIT_PASS,
    EXIT_USAGE,
    FAULTS,
    PROFILES,
    inject_fault,
    run_suite,
)

CLAIM_CHOICES = ("2.5", "2.7", "2.9A", "7.8", "7.10", "12.3", "13.4", "13.6", "13.7", "16.4")


class UsageError(ValueError):
    pass


def _emit(obj, out: Optional[str]) -> None:
    if out:
        io.write_file(out, obj)
        print(f"wrote {out}")
    else:
        sys.stdout.write(io.serialize(obj))


def _need(args, *names: str) -> None:
    missing = [f"--{n.replace('_', '-')}" for n in names if getattr(args, n, None) is None]
    if missing:
        raise UsageError(f"missing required option(s): {', '.join(missing)}")


def _bool(v: bool) -> str:
    return "true" if v else "false"


# ---------------------------------------------------------------------------
# ops


def cmd_ops_make(args) -> int:
    _need(args, "n")
    kind = args.kind
    if kind == "proj":
        _need(args, "r", "t")
        op = make_projection(args.n, args.r, args.t)
    elif kind == "frlk":
        _need(args, "r", "l", "k")
        op = make_f_rlk(args.n, args.r, args.l, args.k)
    elif kind == "gr12":
        _need(args, "r")
        op = make_g_r12(args.n, args.r)
    else:
        _need(args, "b", "c")
        op = verify.make_f_bc(args.n, args.b, args.c)
    _emit(op, args.output)
    return EXIT_PASS


def cmd_ops_show(args) -> int:
    op = io.read_file(args.file, "op")
    mon = is_monarchy(op)
    print(f"op n={op.n} r={op.r} entries={len(op.table)} conservative={_bool(is_conservative(op))} "
          f"monarchy={mon if mon else 'none'}")
    if op.r >= 2:
        cls = classify_on_noninjective(op)
        extra = f" position={cls.position}" if cls.position else ""
        if cls.eta:
            extra += " eta=" + "".join(map(str, cls.eta))
        print(f"noninjective kind={cls.kind}{extra}")
    for xs, v in zip(all_tuples(op.n, op.r), op.table):
        print(" ".join(map(str, xs)), "->", int(v))
    return EXIT_PASS


# ---------------------------------------------------------------------------
# clone


def _load_or_close(args):
    if args.clone:
        return io.read_file(args.clone, "clone")
    if not args.gen:
        raise UsageError("give a clone file or --gen operation files")
    _need(args, "cap")
    gens = [io.read_file(p, "op") for p in args.gen]
    return close(gens, args.cap, symmetric=args.symmetric, budget=args.budget, workers=args.workers)


def cmd_clone_close(args) -> int:
    if not args.gen:
        raise UsageError("clone close needs at least one --gen operation file")
    c = _load_or_close(args)
    by_arity = " ".join(f"r{r}={len(c.of_arity(r))}" for r in range(1, c.arity_cap + 1))
    print(f"clone n={c.n} cap={c.arity_cap} members={len(c)} complete={_bool(c.complete)} {by_arity}")
    if args.output:
        io.write_file(args.output, c)
        print(f"wrote {args.output}")
    if not c.complete:
        print(f"guard=budget ({args.budget})", file=sys.stderr)
        return EXIT_BUDGET
    return EXIT_PASS


def cmd_clone_r_of(args) -> int:
    c = _load_or_close(args)
    if not c.complete:
        print("guard=budget: r(F) needs a complete closure", file=sys.stderr)
        return EXIT_BUDGET
    r = r_of(c)
    print(f"r={'infinity-within-cap' if r == math.inf else r} cap={c.arity_cap}")
    return EXIT_PASS


def cmd_clone_contains(args) -> int:
    c = _load_or_close(args)
    op = io.read_file(args.op, "op")
    found = contains(c, op)
    print(f"contains={'unknown' if found is None else _bool(found)}")
    if found is None:
        print("guard=budget: not found within a truncated closure", file=sys.stderr)
        return EXIT_BUDGET
    return EXIT_PASS


# ---------------------------------------------------------------------------
# fcf


def cmd_fcf_seed(args) -> int:
    _need(args, "n", "k")
    F = seed_family(args.kind, args.n, args.k, args.order)
    if args.symmetric:
        F = symmetric_close_family(F)
    _emit(F, args.output)
    return EXIT_PASS


def cmd_fcf_close(args) -> int:
    F = io.read_file(args.family, "fam")
    ops = [io.read_file(p, "op") for p in args.op]
    if args.symmetric:
        F = symmetric_close_family(F)
    closed = close_family(F, ops, max_size=args.max_size, workers=args.workers)
    print(f"members={len(closed)} full={_bool(is_full(closed))} complete={_bool(closed.complete)}",
          file=sys.stderr if not args.output else sys.stdout)
    _emit(closed, args.output)
    if not closed.complete:
        print(f"guard=max_size ({args.max_size})", file=sys.stderr)
        return EXIT_BUDGET
    return EXIT_PASS


def cmd_fcf_full(args) -> int:
    F = io.read_file(args.family, "fam")
    print(f"full={_bool(is_full(F))} members={len(F)} of={full_size(F.n, F.k)}")
    return EXIT_PASS


def cmd_fcf_improve(args) -> int:
    F = io.read_file(args.family, "fam")
    if args.c1:
        c1 = io.read_file(args.c1, "cf")
    else:
        _need(args, "c1_index")
        if not 0 <= args.c1_index < len(F):
            raise UsageError(f"--c1-index must lie in [0, {len(F)})")
        c1 = F.members[args.c1_index]
    ops = [io.read_file(p, "op") for p in args.op]
    out = improvement_search(F, c1, to_mask(args.ystar), args.a2, ops)
    for line in out.transcript:
        print(line)
    print(f"outcome={'positive' if out.positive else 'negative'} agreement={out.agreement}/{out.total}")
    return EXIT_PASS


# ---------------------------------------------------------------------------
# iop


def cmd_iop_lift(args) -> int:
    _need(args, "k")
    _emit(lift_simple(io.read_file(args.op, "op"), args.k), args.output)
    return EXIT_PASS


def cmd_iop_partition(args) -> int:
    rep = pm_partition(io.read_file(args.file, "iop"))
    print(rep.summary())
    for mask in sorted(rep.pairs):
        a, b = rep.pairs[mask]
        print(f"pair {fmt_subset(mask)} a={a} b={b}")
    return EXIT_PASS


def cmd_iop_classify(args) -> int:
    f = io.read_file(args.file, "iop")
    if f.r == 2:
        print(f"dom1={dom1_profile(f).count}")
        return EXIT_PASS
    rep = classify_16_2(f)
    if rep.position is None:
        print("position=none witness=" + ";".join(
            f"{fmt_subset(m)}:({','.join(map(str, xs))})" for m, xs in rep.witness))
    else:
        print(f"position={rep.position}")
    return EXIT_PASS


# ---------------------------------------------------------------------------
# verify / suite


def _run_claim(args) -> verify.VerificationReport:
    c = args.claim
    if c == "2.5":
        _need(args, "op")
        return verify.verify_2_5(io.read_file(args.op, "op"))
    if c in ("2.7", "7.10"):
        _need(args, "n", "r")
        return (verify.verify_2_7 if c == "2.7" else verify.verify_7_10)(args.n, args.r)
    if c in ("2.9A", "7.8"):
        _need(args, "n")
        abar = tuple(args.abar) if args.abar else (0, 1, 2)
        return verify.verify_2_9A_diagram(args.n, abar, noninjective_only=c == "7.8")
    if c == "12.3":
        _need(args, "n", "k", "kstar")
        return verify.verify_12_3(args.n, args.k, args.kstar)
    if c == "13.4":
        _need(args, "astar")
        if len(args.astar) != 2:
            raise UsageError("--astar needs two elements for 13.4")
        if args.op:
            f = io.read_file(args.op, "op")
        else:
            _need(args, "n")
            f = verify.make_f_bc(args.n, *args.astar)
        return verify.verify_13_4_shape(f, tuple(args.astar))
    if c == "13.6":
        _need(args, "n", "a")
        if len(args.a) != 3:
            raise UsageError("--a needs three elements")
        return verify.verify_13_6(args.n, *args.a)
    if c == "13.7":
        _need(args, "n", "astar")
        return verify.verify_13_7(args.n, tuple(args.astar))
    _need(args, "n", "k", "r")
    return verify.verify_16_4(args.n, args.k, args.r)


def cmd_verify(args) -> int:
    rep = _run_claim(args)
    print(rep.line(timing=not args.no_timing))
    for p in rep.parts:
        print("  " + p.line(timing=not args.no_timing))
    return EXIT_PASS if rep.passed else EXIT_FAIL


def cmd_suite(args) -> int:
    if args.inject_fault:
        with inject_fault(args.inject_fault):
            result = run_suite(args.profile, args.workers)
    else:
        result = run_suite(args.profile, args.workers)
    text = result.canonical()
    sys.stdout.write(text)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        io.write_atomic(out / f"suite-{args.profile}.txt", text)
    return result.status


# ---------------------------------------------------------------------------


def _workers_arg(raw: str) -> int:
    try:
        return worker_count(int(raw))
    except ValueError:
        raise argparse.ArgumentTypeError(f"worker count must be a positive integer, got {raw!r}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="arrowlab", description=__doc__.splitlines()[0])
    p.add_argument("--workers", type=_workers_arg, default=None,
                   help="thread count (default: $ARROWLAB_WORKERS or 1)")
    groups = p.add_subparsers(dest="group", required=True)

    ops = groups.add_parser("ops", help="build and inspect operation tables").add_subparsers(
        dest="action", required=True)
    a = ops.add_parser("make")
    a.add_argument("--kind", choices=("proj", "frlk", "gr12", "fbc"), required=True)
    for name in ("n", "r", "t", "l", "k", "b", "c"):
        a.add_argument(f"--{name}", type=int)
    a.add_argument("-o", "--output")
    a.set_defaults(fn=cmd_ops_make)
    a = ops.add_parser("show")
    a.add_argument("file")
    a.set_defaults(fn=cmd_ops_show)

    cl = groups.add_parser("clone", help="clone closure, r(F) and membership").add_subparsers(
        dest="action", required=True)
    for action, fn in (("close", cmd_clone_close), ("r-of", cmd_clone_r_of),
                       ("contains", cmd_clone_contains)):
        a = cl.add_parser(action)
        if action != "close":
            a.add_argument("clone", nargs="?", help="clone file (or use --gen/--cap)")
        else:
            a.set_defaults(clone=None)
        a.add_argument("--gen", action="append", default=[], help="generator operation file")
        a.add_argument("--cap", type=int)
        a.add_argument("--symmetric", action="store_true")
        a.add_argument("--budget", type=int, default=100_000)
        if action == "contains":
            a.add_argument("--op", required=True)
        if action == "close":
            a.add_argument("-o", "--output")
        a.set_defaults(fn=fn)

    fc = groups.add_parser("fcf", help="families of choice functions").add_subparsers(
        dest="action", required=True)
    a = fc.add_parser("seed")
    a.add_argument("--kind", choices=SEED_KINDS, required=True)
    a.add_argument("--n", type=int)
    a.add_argument("--k", type=int)
    a.add_argument("--order", type=int, nargs="+", help="linear order, lowest first (singleton)")
    a.add_argument("--symmetric", action="store_true", help="close under conjugation")
    a.add_argument("-o", "--output")
    a.set_defaults(fn=cmd_fcf_seed)
    a = fc.add_parser("close")
    a.add_argument("--family", required=True)
    a.add_argument("--op", action="append", default=[], required=True)
    a.add_argument("--symmetric", action="store_true")
    a.add_argument("--max-size", type=int, default=10**6)
    a.add_argument("-o", "--output")
    a.set_defaults(fn=cmd_fcf_close)
    a = fc.add_parser("full")
    a.add_argument("--family", required=True)
    a.set_defaults(fn=cmd_fcf_full)
    a = fc.add_parser("improve")
    a.add_argument("--family", required=True)
    a.add_argument("--c1", help="choice-function file")
    a.add_argument("--c1-index", type=int, help="member index instead of --c1")
    a.add_argument("--ystar", type=int, nargs="+", required=True, help="elements of Y*")
    a.add_argument("--a2", type=int, required=True)
    a.add_argument("--op", action="append", default=[])
    a.set_defaults(fn=cmd_fcf_improve)

    io_ = groups.add_parser("iop", help="indexed operations").add_subparsers(dest="action", required=True)
    a = io_.add_parser("lift")
    a.add_argument("--op", required=True)
    a.add_argument("--k", type=int)
    a.add_argument("-o", "--output")
    a.set_defaults(fn=cmd_iop_lift)
    for action, fn in (("partition", cmd_iop_partition), ("classify", cmd_iop_classify)):
        a = io_.add_parser(action)
        a.add_argument("file")
        a.set_defaults(fn=fn)

    a = groups.add_parser("verify", help="check one explicit construction exhaustively")
    a.add_argument("--claim", choices=CLAIM_CHOICES, required=True)
    for name in ("n", "r", "k", "kstar"):
        a.add_argument(f"--{name}", type=int)
    a.add_argument("--a", type=int, nargs="+")
    a.add_argument("--astar", type=int, nargs="+")
    a.add_argument("--abar", type=int, nargs=3)
    a.add_argument("--op", help="operation file (2.5, 13.4)")
    a.add_argument("--no-timing", action="store_true", help="omit time_ms")
    a.set_defaults(fn=cmd_verify)

    a = groups.add_parser("suite", help="run a fixed verification grid")
    a.add_argument("--profile", choices=PROFILES, default="quick")
    a.add_argument("--out", help="directory for the canonical report")
    a.add_argument("--inject-fault", choices=FAULTS, help=argparse.SUPPRESS)
    a.set_defaults(fn=cmd_suite)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_PASS
    try:
        if args.workers is None:
            args.workers = worker_count()
        return args.fn(args)
    except io.ParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except GuardError as e:
        print(f"guard={e.guard}: {e}", file=sys.stderr)
        return EXIT_BUDGET
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
