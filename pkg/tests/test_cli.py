import pytest

from arrowlab import io
from arrowlab.cli import main
from arrowlab.operations import make_g_r12, make_projection


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_verify_case_beta(capsys):
    code, out, _ = run(capsys, "verify", "--claim", "12.3", "--n", 4, "--k", 2, "--kstar", 0)
    assert code == 0 and "case-beta components=3" in out


def test_ops_make_and_show(capsys, tmp_path):
    path = tmp_path / "g.op"
    code, _, _ = run(capsys, "ops", "make", "--kind", "gr12", "--n", 3, "--r", 3, "-o", path)
    assert code == 0 and io.read_file(path) == make_g_r12(3, 3)
    code, out, _ = run(capsys, "ops", "show", path)
    lines = out.splitlines()
    assert code == 0 and "entries=27" in lines[0]
    assert "0 1 1 -> 1" in lines
    assert sum("->" in line for line in lines) == 27


def test_fcf_full_on_empty_family(capsys, tmp_path):
    path = tmp_path / "e.fam"
    path.write_text("fam n=3 k=2 count=0\n")
    code, out, _ = run(capsys, "fcf", "full", "--family", path)
    assert code == 0 and out.strip() == "full=false members=0 of=8"


def test_condorcet_through_cli(capsys, tmp_path):
    fam, g, out_fam = tmp_path / "r.fam", tmp_path / "g.op", tmp_path / "c.fam"
    assert run(capsys, "fcf", "seed", "--kind", "rational", "--n", 3, "--k", 2, "-o", fam)[0] == 0
    assert run(capsys, "ops", "make", "--kind", "gr12", "--n", 3, "--r", 3, "-o", g)[0] == 0
    assert run(capsys, "fcf", "close", "--family", fam, "--op", g, "-o", out_fam)[0] == 0
    code, out, _ = run(capsys, "fcf", "full", "--family", out_fam)
    assert code == 0 and out.strip() == "full=true members=8 of=8"


def test_clone_commands(capsys, tmp_path):
    g, c = tmp_path / "g.op", tmp_path / "c.clone"
    io.write_file(g, make_g_r12(3, 3))
    assert run(capsys, "clone", "close", "--gen", g, "--cap", 3, "-o", c)[0] == 0
    code, out, _ = run(capsys, "clone", "r-of", c)
    assert code == 0 and out.strip() == "r=3 cap=3"
    code, out, _ = run(capsys, "clone", "contains", c, "--op", g)
    assert code == 0 and "contains=true" in out


def test_verification_failure_exits_1(capsys, tmp_path):
    p = tmp_path / "p.op"
    io.write_file(p, make_projection(5, 2, 1))
    code, out, _ = run(capsys, "verify", "--claim", "13.4", "--op", p, "--astar", 0, 1)
    assert code == 1 and "witness=(0,1)" in out


@pytest.mark.parametrize("argv", [
    ("bogus",),
    ("verify", "--claim", "12.3", "--n", 4, "--k", 3, "--kstar", 0),
    ("fcf", "seed", "--kind", "rational", "--n", 3, "--k", 1, "-o", "{tmp}/x.fam"),
    ("ops", "show", "{tmp}/missing.op"),
])
def test_usage_errors_exit_2(capsys, tmp_path, argv):
    argv = [str(a).replace("{tmp}", str(tmp_path)) for a in argv]
    code = main(argv)
    capsys.readouterr()
    assert code == 2


def test_parse_error_reports_position(capsys, tmp_path):
    bad = tmp_path / "bad.op"
    bad.write_text("op n=3 r=3\n0 1\n")
    code, _, err = run(capsys, "ops", "show", bad)
    assert code == 2 and f"{bad}:2:4" in err and "25 short" in err


def test_guards_exit_3(capsys, tmp_path):
    code, _, err = run(capsys, "fcf", "seed", "--kind", "full", "--n", 9, "--k", 4, "-o", tmp_path / "x.fam")
    assert code == 3 and "guard=DEFAULT_MAX_FAMILY" in err
    g, t = tmp_path / "g.op", tmp_path / "t.clone"
    io.write_file(g, make_g_r12(3, 3))
    run(capsys, "clone", "close", "--gen", g, "--cap", 3, "--budget", 5, "-o", t)
    code, out, _ = run(capsys, "clone", "contains", t, "--op", g)
    assert code == 3 and "contains=unknown" in out


def test_suite_writes_artifact(capsys, tmp_path):
    code, out, _ = run(capsys, "suite", "--profile", "quick", "--out", tmp_path)
    text = (tmp_path / "suite-quick.txt").read_text()
    assert code == 0 and text.startswith("suite profile=quick checks=60 failed=0 status=0")
    assert "time_ms" not in text


def test_suite_fault_injection_exits_1(capsys, tmp_path):
    code, out, _ = run(capsys, "suite", "--profile", "quick", "--out", tmp_path, "--inject-fault", "g3")
    assert code == 1 and "witness=(0,1,1,1)" in out
