"""Plain ASCII file formats for operations, choice functions, families, indexed ops and clones.

Every format is a header line of ``key=value`` fields followed by
whitespace-separated integers.  Serializers emit one canonical layout;
parsers accept any whitespace layout and report errors with line and
column.
"""
from __future__ import annotations

import os
import re
import tempfile
from dataclasses import dataclass
from math import comb
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .choice import ChoiceFunction, Family, FamilyError, ksubsets
from .clone import Clone
from .indexed import IndexedError, IndexedOperation
from .operations import Operation, OperationError

PathLike = Union[str, Path]
HEADERS = ("op", "cf", "fam", "iop", "clone")
# singletons leave nothing to choose, so files never carry k = 1
K1_MESSAGE = "k=1 is forbidden in files (every choice on a singleton is forced)"


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 0, col: int = 0, source: str = "<text>"):
        self.line, self.col, self.source = line, col, source
        super().__init__(f"{source}:{line}:{col}: {message}")


@dataclass(frozen=True)
class _Token:
    text: str
    line: int
    col: int


def _tokens(text: str) -> list[_Token]:
    out = []
    for i, line in enumerate(text.splitlines(), start=1):
        for m in re.finditer(r"\S+", line):
            out.append(_Token(m.group(), i, m.start() + 1))
    return out


class _Reader:
    def __init__(self, text: str, source: str):
        self.toks = _tokens(text)
        self.pos = 0
        self.source = source
        self.last_line = text.count("\n") + 1

    def error(self, message: str, tok: Optional[_Token] = None) -> ParseError:
        if tok is None:
            tok = self.toks[self.pos] if self.pos < len(self.toks) else None
        if tok is None:
            return ParseError(message, self.last_line, 1, self.source)
        return ParseError(message, tok.line, tok.col, self.source)

    def at_end(self) -> bool:
        return self.pos >= len(self.toks)

    def header(self, kind: str, fields: tuple[str, ...]) -> dict[str, int]:
        if self.at_end():
            raise self.error(f"expected '{kind}' header, found end of input")
        head = self.toks[self.pos]
        if head.text != kind:
            raise self.error(f"bad header: expected '{kind}', found {head.text!r}", head)
        self.pos += 1
        values: dict[str, int] = {}
        for name in fields:
            if self.at_end() or self.toks[self.pos].line != head.line:
                raise self.error(f"bad header: missing field '{name}='", head)
            tok = self.toks[self.pos]
            key, sep, raw = tok.text.partition("=")
            if key != name or not sep:
                raise self.error(f"bad header: expected '{name}=', found {tok.text!r}", tok)
            if not re.fullmatch(r"-?\d+", raw):
                raise self.error(f"bad header: {name} must be an integer, found {raw!r}", tok)
            values[name] = int(raw)
            self.pos += 1
        if not self.at_end() and self.toks[self.pos].line == head.line:
            raise self.error(f"bad header: unexpected {self.toks[self.pos].text!r}")
        return values

    def ints(self, count: int, lo: int, hi: int, what: str) -> list[int]:
        """Read exactly ``count`` integers in [lo, hi), stopping early at a header word."""
        out = []
        while len(out) < count:
            if self.at_end() or self.toks[self.pos].text in HEADERS:
                got = len(out)
                tok = None
                if self.at_end() and self.toks:
                    last = self.toks[-1]
                    tok = _Token("", last.line, last.col + len(last.text))
                raise self.error(f"count mismatch: {what} needs {count} entries, found {got} "
                                 f"({count - got} short)", tok)
            tok = self.toks[self.pos]
            if not re.fullmatch(r"-?\d+", tok.text):
                raise self.error(f"not an integer: {tok.text!r}", tok)
            v = int(tok.text)
            if not lo <= v < hi:
                raise self.error(f"out-of-range entry {v}: {what} entries lie in [{lo}, {hi})", tok)
            out.append(v)
            self.pos += 1
        return out

    def expect_end(self, what: str) -> None:
        if not self.at_end():
            raise self.error(f"count mismatch: unexpected trailing data after {what}")


def _check_flag(reader: _Reader, name: str, value: int) -> bool:
    if value not in (0, 1):
        raise reader.error(f"bad header: {name} must be 0 or 1, got {value}", reader.toks[0])
    return bool(value)


def _check_nk(reader: _Reader, head: _Token, n: int, k: int) -> None:
    if n < 2:
        raise reader.error(f"bad header: n must be >= 2, got {n}", head)
    if k == 1:
        raise reader.error(f"bad header: {K1_MESSAGE}", head)
    if not 2 <= k <= n:
        raise reader.error(f"bad header: k must satisfy 2 <= k <= n, got k={k}", head)


def _refuse_k1(k: int) -> None:
    if k == 1:
        raise ValueError(K1_MESSAGE)


# ---------------------------------------------------------------------------
# operations


def _op_body(op: Operation) -> list[str]:
    t = op.table
    return [" ".join(map(str, t[i:i + op.n])) for i in range(0, len(t), op.n)]


def serialize_operation(op: Operation) -> str:
    return "\n".join([f"op n={op.n} r={op.r}", *_op_body(op)]) + "\n"


def _read_operation(reader: _Reader) -> Operation:
    head = reader.toks[reader.pos] if not reader.at_end() else None
    h = reader.header("op", ("n", "r"))
    n, r = h["n"], h["r"]
    if n < 1 or r < 1:
        raise reader.error(f"bad header: need n >= 1 and r >= 1, got n={n} r={r}", head)
    if n ** r > 10**8:
        raise reader.error(f"bad header: table of {n}**{r} entries is too large", head)
    values = reader.ints(n ** r, 0, n, f"op n={n} r={r}")
    return Operation(n, r, np.array(values, dtype=np.uint8))


def parse_operation(text: str, source: str = "<text>") -> Operation:
    reader = _Reader(text, source)
    op = _read_operation(reader)
    reader.expect_end("the operation table")
    return op


# ---------------------------------------------------------------------------
# choice functions and families


def serialize_choice(c: ChoiceFunction) -> str:
    _refuse_k1(c.k)
    return f"cf n={c.n} k={c.k}\n" + " ".join(map(str, c.choices)) + "\n"


def _choice_from(reader: _Reader, n: int, k: int, values: list[int], tok: _Token) -> ChoiceFunction:
    try:
        return ChoiceFunction(n, k, tuple(values))
    except FamilyError as e:
        raise reader.error(f"out-of-range entry: {e}", tok) from None


def parse_choice(text: str, source: str = "<text>") -> ChoiceFunction:
    reader = _Reader(text, source)
    head = reader.toks[0] if reader.toks else None
    h = reader.header("cf", ("n", "k"))
    n, k = h["n"], h["k"]
    _check_nk(reader, head, n, k)
    first = reader.toks[reader.pos] if not reader.at_end() else head
    values = reader.ints(comb(n, k), 0, n, f"cf n={n} k={k}")
    reader.expect_end("the choice vector")
    return _choice_from(reader, n, k, values, first)


def serialize_family(F: Family) -> str:
    _refuse_k1(F.k)
    lines = [f"fam n={F.n} k={F.k} count={len(F)}"]
    lines.extend(" ".join(map(str, c.choices)) for c in F.members)
    return "\n".join(lines) + "\n"


def parse_family(text: str, source: str = "<text>") -> Family:
    reader = _Reader(text, source)
    head = reader.toks[0] if reader.toks else None
    h = reader.header("fam", ("n", "k", "count"))
    n, k, m = h["n"], h["k"], h["count"]
    _check_nk(reader, head, n, k)
    if m < 0:
        raise reader.error(f"bad header: count must be >= 0, got {m}", head)
    width = comb(n, k)
    members, seen = [], set()
    for i in range(m):
        first = reader.toks[reader.pos] if not reader.at_end() else head
        values = reader.ints(width, 0, n, f"family member {i + 1} of {m}")
        c = _choice_from(reader, n, k, values, first)
        if c in seen:
            raise reader.error(f"duplicate family member {i + 1}", first)
        seen.add(c)
        members.append(c)
    reader.expect_end(f"{m} family members")
    return Family(n, k, tuple(members))


# ---------------------------------------------------------------------------
# indexed operations


def serialize_indexed(f: IndexedOperation) -> str:
    _refuse_k1(f.k)
    lines = [f"iop n={f.n} k={f.k} r={f.r}"]
    lines.extend(" ".join(map(str, t)) for t in f.tables)
    return "\n".join(lines) + "\n"


def parse_indexed(text: str, source: str = "<text>") -> IndexedOperation:
    reader = _Reader(text, source)
    head = reader.toks[0] if reader.toks else None
    h = reader.header("iop", ("n", "k", "r"))
    n, k, r = h["n"], h["k"], h["r"]
    _check_nk(reader, head, n, k)
    if r < 1:
        raise reader.error(f"bad header: r must be >= 1, got {r}", head)
    tables = []
    for mask in ksubsets(n, k):
        first = reader.toks[reader.pos] if not reader.at_end() else head
        tables.append((first, reader.ints(k ** r, 0, k, f"subset table {mask:#b}")))
    reader.expect_end("the last subset table")
    try:
        return IndexedOperation(n, k, r, tuple(np.array(t) for _, t in tables))
    except IndexedError as e:
        raise reader.error(f"out-of-range entry: {e}", head) from None


# ---------------------------------------------------------------------------
# clones


def serialize_clone(c: Clone) -> str:
    lines = [f"clone n={c.n} cap={c.arity_cap} symmetric={int(c.symmetric)} "
             f"complete={int(c.complete)} count={len(c)}"]
    for op in c.members:
        lines.append(f"op n={op.n} r={op.r}")
        lines.extend(_op_body(op))
    return "\n".join(lines) + "\n"


def parse_clone(text: str, source: str = "<text>") -> Clone:
    reader = _Reader(text, source)
    head = reader.toks[0] if reader.toks else None
    h = reader.header("clone", ("n", "cap", "symmetric", "complete", "count"))
    n, cap, m = h["n"], h["cap"], h["count"]
    symmetric = _check_flag(reader, "symmetric", h["symmetric"])
    complete = _check_flag(reader, "complete", h["complete"])
    if n < 1 or cap < 1 or m < 0:
        raise reader.error("bad header: need n >= 1, cap >= 1, count >= 0", head)
    members: list[Operation] = []
    for i in range(m):
        if reader.at_end():
            raise reader.error(f"count mismatch: manifest lists {m} records, found {i} ({m - i} short)",
                               reader.toks[-1])
        rec = reader.toks[reader.pos]
        op = _read_operation(reader)
        if op.n != n:
            raise reader.error(f"record {i + 1} has n={op.n}, manifest says n={n}", rec)
        if op.r > cap:
            raise reader.error(f"record {i + 1} has arity {op.r} above cap={cap}", rec)
        if members and not members[-1] < op:
            raise reader.error(f"record {i + 1} is out of canonical order or duplicated", rec)
        members.append(op)
    reader.expect_end(f"{m} clone records")
    return Clone(n, cap, tuple(members), symmetric, complete)


# ---------------------------------------------------------------------------
# files

_PARSERS = {
    "op": parse_operation,
    "cf": parse_choice,
    "fam": parse_family,
    "iop": parse_indexed,
    "clone": parse_clone,
}


def serialize(obj) -> str:
    if isinstance(obj, Operation):
        return serialize_operation(obj)
    if isinstance(obj, ChoiceFunction):
        return serialize_choice(obj)
    if isinstance(obj, Family):
        return serialize_family(obj)
    if isinstance(obj, IndexedOperation):
        return serialize_indexed(obj)
    if isinstance(obj, Clone):
        return serialize_clone(obj)
    raise TypeError(f"no file format for {type(obj).__name__}")


def parse(text: str, source: str = "<text>"):
    """Dispatch on the header word."""
    toks = _tokens(text)
    if not toks:
        raise ParseError("empty input", 1, 1, source)
    parser = _PARSERS.get(toks[0].text)
    if parser is None:
        raise ParseError(f"bad header: unknown kind {toks[0].text!r}", toks[0].line, toks[0].col, source)
    try:
        return parser(text, source)
    except (OperationError, FamilyError, IndexedError) as e:
        raise ParseError(str(e), 1, 1, source) from None


def read_file(path: PathLike, kind: Optional[str] = None):
    path = Path(path)
    try:
        text = path.read_text(encoding="ascii")
    except UnicodeDecodeError as e:
        raise ParseError(f"non-ASCII byte at offset {e.start}", 1, 1, str(path)) from None
    obj = parse(text, str(path))
    if kind is not None and _kind_of(obj) != kind:
        raise ParseError(f"expected a '{kind}' file, found '{_kind_of(obj)}'", 1, 1, str(path))
    return obj


def _kind_of(obj) -> str:
    for kind, cls in (("op", Operation), ("cf", ChoiceFunction), ("fam", Family),
                      ("iop", IndexedOperation), ("clone", Clone)):
        if isinstance(obj, cls):
            return kind
    raise TypeError(f"no file format for {type(obj).__name__}")


def write_atomic(path: PathLike, text: str) -> None:
    """Write to a sibling temporary file, then rename over the target."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="ascii", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_file(path: PathLike, obj) -> None:
    write_atomic(path, serialize(obj))
