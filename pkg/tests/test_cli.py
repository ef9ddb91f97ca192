import subprocess
import sys
from fractions import Fraction

import pytest
from hypothesis import given, settings

from matchlab.cli import run
from matchlab.errors import DomainError
from matchlab.formats import format_graph, format_matrix, parse_graph, parse_matrix, read_graph, write_graph
from matchlab.graphs import GUARD_ENV, canonical_form, make_cycle

from test_graphs import multigraphs


@pytest.fixture
def c6(tmp_path):
    path = tmp_path / "c6.txt"
    write_graph(make_cycle(6), path)
    return str(path)


@pytest.fixture
def uniform3(tmp_path):
    path = tmp_path / "u3.txt"
    path.write_text("3 3\n1/3 1/3 1/3\n1/3 1/3 1/3\n1/3 1/3 1/3\n")
    return str(path)


@settings(max_examples=50, deadline=None)
@given(multigraphs())
def test_graph_roundtrip(g):
    assert canonical_form(parse_graph(format_graph(g))) == canonical_form(g)


def test_graph_format_details():
    g = parse_graph("# a triple edge\n2 1\n\n0 1 3  # trailing comment\n")
    assert g.adjacency[0][1] == 3
    for bad in ["", "2\n0 1\n", "2 2\n0 1\n", "2 1\n0 1 2 3\n", "2 1\n0 x\n"]:
        with pytest.raises(DomainError):
            parse_graph(bad)


def test_matrix_roundtrip():
    m = [[Fraction(1, 3), Fraction(2)], [Fraction(0), Fraction(-5, 7)]]
    assert parse_matrix(format_matrix(m)) == m
    assert parse_matrix("1 2\n0.25 3\n") == [[Fraction(1, 4), Fraction(3)]]
    for bad in ["1 2\n1\n", "2 1\n1\n", "1 1\n1/0\n", "1 1\nabc\n"]:
        with pytest.raises(DomainError):
            parse_matrix(bad)


def test_count(c6, capsys):
    assert run(["count", "--graph", c6, "--k", "2"]) == 0
    assert capsys.readouterr().out == "9\n"
    assert run(["count", "--graph", c6]) == 0
    assert capsys.readouterr().out.splitlines() == ["k,value", "0,1", "1,6", "2,9", "3,2"]


def test_haffnian_and_perm(uniform3, tmp_path, capsys):
    assert run(["haffnian", "--matrix", uniform3, "--perm", "--k", "3"]) == 0
    assert capsys.readouterr().out == "2/9\n"
    k4 = tmp_path / "k4.txt"
    k4.write_text("4 4\n0 1/3 1/3 1/3\n1/3 0 1/3 1/3\n1/3 1/3 0 1/3\n1/3 1/3 1/3 0\n")
    assert run(["haffnian", "--matrix", str(k4), "--k", "2"]) == 0
    assert capsys.readouterr().out == "1/3\n"


def test_bounds(c6, capsys):
    assert run(["bounds", "--k", "3", "--n", "3", "--r", "3"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "bound,k,n,r,value,log_value,bounded_quantity,verdict"
    assert any(line.startswith("theta_upper,3,3,3,") for line in out)
    assert run(["bounds", "--graph", c6, "--k", "3"]) == 0
    assert all(line.endswith("holds") for line in capsys.readouterr().out.splitlines()[1:])


def test_search(capsys):
    assert run(["search", "--quantity", "theta", "--k", "2", "--n", "3", "--r", "2"]) == 0
    assert capsys.readouterr().out.splitlines() == ["quantity,k,n,r,value,num_witnesses", "theta,2,3,2,9,2"]  # C6 and 2C3
    assert run(["search", "--quantity", "Theta", "--k", "3", "--n", "3", "--r", "3", "--emit-witnesses"]) == 0
    assert capsys.readouterr().out.splitlines()[1].startswith("Theta,3,3,3,6,6:")


def test_verify(capsys):
    assert run(["verify", "--r2-formulas", "--n", "3"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "check,k,expected,observed,verdict" and len(lines) == 10
    assert all(line.endswith("pass") for line in lines[1:])
    assert run(["verify", "--umc", "--q", "1", "--r", "3"]) == 0
    assert capsys.readouterr().out.count("pass") == 3
    assert run(["verify", "--guaranteed-match", "--n", "3", "--r", "2"]) == 0
    assert capsys.readouterr().out.splitlines()[1].endswith("pass")


def test_capacity(uniform3, capsys):
    assert run(["capacity", "--matrix", uniform3, "--k", "2", "--tol", "1e-8"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "value_lower,value_upper,iterations"
    lo, hi, _ = lines[1].split(",")
    assert float(lo) <= 3 * (1 + 1e-12) and float(hi) >= 3 * (1 - 1e-12)


def test_polytope(tmp_path, capsys):
    tri = tmp_path / "tri.txt"
    rows = ["6 6"]
    for i in range(6):
        row = ["0"] * 6
        base = 3 * (i // 3)
        for j in range(base, base + 3):
            if j != i:
                row[j] = "1/2"
        rows.append(" ".join(row))
    tri.write_text("\n".join(rows) + "\n")
    assert run(["polytope", "check", "--matrix", str(tri)]) == 0
    assert capsys.readouterr().out.splitlines()[1] == "False,0 1 2,1"
    assert run(["polytope", "extreme", "--matrix", str(tri)]) == 0
    assert capsys.readouterr().out.splitlines()[1] == "True,odd-cycle:0 1 2;odd-cycle:3 4 5"
    trace = tmp_path / "trace.jsonl"
    assert run(["polytope", "minimize", "--k", "2", "--n", "2", "--trace", str(trace)]) == 0
    assert capsys.readouterr().out.splitlines()[1] == "2,4,1/3,0.3333333333333333,True"
    assert trace.read_text().startswith('{"start": 0, "iter": 0')


def test_entropy(capsys, tmp_path):
    assert run(["entropy", "--r", "4", "--grid", "3"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "p,f_almc,h_aumc,upp1,upp2" and [l.split(",")[0] for l in lines[1:]] == ["0", "0.5", "1"]
    out = tmp_path / "curves.csv"
    assert run(["entropy", "--r", "4", "--grid", "11", "--out", str(out)]) == 0
    first = out.read_bytes()
    assert run(["entropy", "--r", "4", "--grid", "11", "--out", str(out)]) == 0
    assert out.read_bytes() == first


def test_exit_codes(c6, tmp_path, monkeypatch, capsys):
    monkeypatch.delenv(GUARD_ENV, raising=False)
    assert run(["count", "--k", "2"]) == 1
    assert run(["nonsense"]) == 1
    assert run(["count", "--graph", c6, "--k", "-1"]) == 1
    assert run(["search", "--quantity", "theta", "--k", "1", "--n", "7", "--r", "3"]) == 2
    assert run(["count", "--graph", str(tmp_path / "missing.txt")]) == 3
    assert run(["entropy", "--r", "4", "--grid", "3", "--out", str(tmp_path / "no" / "dir.csv")]) == 3
    err = capsys.readouterr().err
    assert "needs --graph" in err and GUARD_ENV in err


def test_console_script(c6):
    proc = subprocess.run([sys.executable, "-m", "matchlab.cli", "count", "--graph", c6, "--k", "2"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout == "9\n"
