from pathlib import Path

import numpy as np
import pytest

from arrowlab import io
from arrowlab.choice import Family, order_choice, seed_family
from arrowlab.clone import close
from arrowlab.indexed import lift_simple
from arrowlab.operations import Operation, make_g_r12, make_projection
from conftest import random_operation

FIXTURES = Path(__file__).parent / "fixtures"
VALID = sorted((FIXTURES / "valid").glob("*.txt"))
INVALID = sorted((FIXTURES / "invalid").glob("*.txt"))

EXPECTED_ERRORS = {
    "op_short_by_one": "needs 27 entries, found 26 (1 short)",
    "op_long_by_one": "unexpected trailing data",
    "op_out_of_range": "out-of-range entry 2",
    "op_bad_header": "unknown kind 'opp'",
    "op_missing_field": "missing field 'r='",
    "op_not_integer": "not an integer",
    "cf_k1_forbidden": "k=1 is forbidden",
    "cf_k0": "2 <= k <= n",
    "cf_k_above_n": "2 <= k <= n",
    "cf_not_member": "out-of-range entry",
    "fam_k1_forbidden": "k=1 is forbidden",
    "fam_duplicate": "duplicate family member 2",
    "fam_count_short": "family member 3 of 3",
    "iop_k1_forbidden": "k=1 is forbidden",
    "iop_short_table": "(1 short)",
    "clone_out_of_order": "out of canonical order",
    "clone_arity_above_cap": "above cap=1",
    "clone_count_short": "(1 short)",
    "empty_file": "empty input",
}


def test_corpus_is_complete():
    assert {p.stem for p in INVALID} == set(EXPECTED_ERRORS)
    kinds = {p.stem.split("_")[0] for p in VALID}
    assert kinds == {"op", "cf", "fam", "iop", "clone"}


@pytest.mark.parametrize("path", VALID, ids=lambda p: p.stem)
def test_valid_fixture_round_trips(path):
    text = path.read_text()
    obj = io.read_file(path)
    assert io.serialize(obj) == text
    assert io.parse(io.serialize(obj)) == obj


@pytest.mark.parametrize("path", INVALID, ids=lambda p: p.stem)
def test_invalid_fixture_is_rejected(path):
    with pytest.raises(io.ParseError) as err:
        io.read_file(path)
    assert EXPECTED_ERRORS[path.stem] in str(err.value)
    assert str(err.value).startswith(f"{path}:")


def test_projection_bytes():
    text = io.serialize(make_projection(4, 3, 1))
    lines = text.splitlines()
    assert lines[0] == "op n=4 r=3" and len(lines) == 17
    assert lines[1] == "0 0 0 0" and lines[-1] == "3 3 3 3"


def test_family_order_is_kept():
    F = seed_family("rational", 3, 2)
    back = io.parse_family(io.serialize_family(F))
    assert back.members == F.members and len(back) == 6


def test_error_positions():
    with pytest.raises(io.ParseError) as err:
        io.parse_operation("op n=2 r=2\n0 1\n1 5\n")
    assert (err.value.line, err.value.col) == (3, 3)
    with pytest.raises(io.ParseError) as err:
        io.parse_operation("op n=2 r=2\n0 1 1\n")
    assert (err.value.line, err.value.col) == (2, 6)


def test_boundary_counts_for_every_arity():
    rng = np.random.default_rng(9)
    for n in (1, 2, 3):
        for r in (1, 2, 3, 4):
            op = random_operation(rng, n, r)
            vals = io.serialize(op).split()[3:]
            assert len(vals) == n**r
            assert io.parse(f"op n={n} r={r}\n" + " ".join(vals)) == op
            with pytest.raises(io.ParseError, match="1 short"):
                io.parse(f"op n={n} r={r}\n" + " ".join(vals[:-1]))
            with pytest.raises(io.ParseError, match="trailing"):
                io.parse(f"op n={n} r={r}\n" + " ".join(vals + ["0"]))


def test_whitespace_layout_is_free():
    op = make_g_r12(2, 2)
    flat = "op n=2 r=2   " + "\n" + "\n\n".join(io.serialize(op).split()[3:]) + "\n"
    assert io.parse(flat) == op


def test_k1_objects_cannot_be_written():
    with pytest.raises(ValueError, match="k=1"):
        io.serialize(order_choice(3, 1, (0, 1, 2)))
    with pytest.raises(ValueError, match="k=1"):
        io.serialize(Family(3, 1))
    with pytest.raises(ValueError, match="k=1"):
        io.serialize(lift_simple(make_projection(3, 2, 1), 1))


def test_read_file_checks_kind(tmp_path):
    p = tmp_path / "g.op"
    io.write_file(p, make_g_r12(3, 3))
    assert io.read_file(p, "op") == make_g_r12(3, 3)
    with pytest.raises(io.ParseError, match="expected a 'fam' file"):
        io.read_file(p, "fam")


def test_non_ascii_is_rejected(tmp_path):
    p = tmp_path / "bad.op"
    p.write_bytes("op n=1 r=1\n0 é\n".encode())
    with pytest.raises(io.ParseError, match="non-ASCII"):
        io.read_file(p)


def test_write_atomic_leaves_no_partial_file(tmp_path):
    p = tmp_path / "out.op"
    io.write_file(p, make_projection(2, 1, 1))
    before = p.read_text()

    # the encoder fails after the first chunk has been written
    with pytest.raises(UnicodeEncodeError):
        io.write_atomic(p, "op n=2 r=1\n" + "0 1\n" * 1000 + "\u00e9\n")
    assert p.read_text() == before
    assert [q.name for q in tmp_path.iterdir()] == ["out.op"]


def test_clone_round_trip_keeps_flags():
    c = close([make_g_r12(3, 3)], 3, budget=5)
    back = io.parse_clone(io.serialize_clone(c))
    assert back == c and not back.complete
    assert io.parse_clone(io.serialize_clone(close([], 2, n=2))).complete


def test_large_header_is_refused():
    with pytest.raises(io.ParseError, match="too large"):
        io.parse("op n=200 r=9\n")


def test_unary_single_element():
    op = Operation(1, 1, np.array([0]))
    assert io.serialize(op) == "op n=1 r=1\n0\n"
