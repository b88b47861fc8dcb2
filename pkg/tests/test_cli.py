import json

import pytest

from peercqa import cli
from peercqa.compiler import Compilation
from peercqa.program import parse_program

from conftest import FIXTURES
from golden_cases import CASES, ROOT, render, run


@pytest.mark.parametrize("name", sorted(CASES))
def test_golden(name):
    want = (ROOT / "fixtures" / "golden" / f"{name}.txt").read_text()
    assert render(CASES[name]) == want


def fx(name):
    return str(FIXTURES / name)


def test_validate_rejects_contradictory_trust(tmp_path):
    f = tmp_path / "bad.p2p"
    f.write_text((FIXTURES / "fix_a.p2p").read_text() + "trust P1 same P2;\n")
    code, out, err = run(["validate", str(f)])
    assert code == 2
    assert "functionally determined" in err and "(P1,P2)" in err


def test_input_errors(tmp_path):
    assert run(["validate", str(tmp_path / "missing.p2p")])[0] == 2
    assert run(["solutions", fx("fix_a.p2p")])[0] == 2
    assert run(["solutions", fx("fix_a.p2p"), "--peer", "nobody"])[0] == 2
    assert run(["compile", fx("fix_b.p2p"), "--peer", "P", "--shift-hcf"])[0] == 2
    q = tmp_path / "foreign.q"
    q.write_text("Q(x,y) := R2(x,y)")
    code, _, err = run(["answer", fx("fix_a.p2p"), str(q), "--peer", "P1"])
    assert code == 2 and "R2" in err


def test_unsupported_exit_code(tmp_path):
    f = tmp_path / "den.p2p"
    f.write_text(
        "peer P { schema A/1; }\npeer Q { schema B/1; }\ntrust P less Q;\n"
        "dec P -> Q : forall x (A(x) & B(x) -> false);\n"
    )
    assert run(["solutions", str(f), "--peer", "P"])[0] == 3
    assert run(["solutions", fx("fix_a.p2p"), "--peer", "P1", "--method", "lav"])[0] == 3


def test_search_cap_exit_code():
    assert run(["solutions", fx("fix_b.p2p"), "--peer", "P", "--max-new-atoms", "0"])[0] == 3


def test_non_hcf_shift(monkeypatch):
    cyclic = parse_program("p v q.\nq :- p.\np :- q.")

    def fake(system, peer, method, mode):
        return Compilation(cyclic, peer, "direct", {}, {})

    monkeypatch.setattr(cli, "compile_for", fake)
    code, out, err = run(["compile", fx("fix_b.p2p"), "--peer", "P", "--unfold-choice", "--shift-hcf"])
    assert code == 3 and "head cycle" in err and "p -> q -> p" in err


def test_no_solutions_exit_code(tmp_path):
    f = tmp_path / "incons.p2p"
    f.write_text(
        "peer P { schema A/2; instance A(a,b); ic forall x,y,z (A(x,y) & A(x,z) -> y = z); }\n"
        "peer Q { schema B/2; instance B(a,c); }\n"
        "trust P less Q;\ndec P -> Q : forall x,y (B(x,y) -> A(x,y));\n"
    )
    for method in ("oracle", "asp"):
        code, out, _ = run(["solutions", str(f), "--peer", "P", "--method", method])
        assert code == 1 and "no solutions" in out


def test_solve_examples(tmp_path):
    f = tmp_path / "p.lp"
    f.write_text(":- p.\np :- not q.\nq :- not p.\n")
    code, out, _ = run(["solve", str(f)])
    assert code == 0 and out == "{q}\n"
    f.write_text("p :- not p.\n")
    assert run(["solve", str(f)])[0] == 1


def test_json_output():
    code, out, _ = run(["answer", fx("fix_a.p2p"), fx("fix_a_r1.q"), "--peer", "P1", "--format", "json"])
    data = json.loads(out)
    assert code == 0 and data["status"] == "ok"
    assert data["answers"] == [["a", "b"], ["a", "e"], ["c", "d"]]
    assert data["warnings"] == []


def test_default_trust_warning(tmp_path):
    f = tmp_path / "w.p2p"
    f.write_text(
        "peer P { schema A/1; instance A(a); }\npeer Q { schema B/1; instance B(b); }\n"
        "dec P -> Q : forall x (B(x) -> A(x));\n"
    )
    code, out, err = run(["solutions", str(f), "--peer", "P"])
    assert code == 0 and "warning:" in err and "same" in err
    data = json.loads(run(["solutions", str(f), "--peer", "P", "--format", "json"])[1])
    assert data["warnings"]


def test_output_deterministic_across_threads():
    base = ["solutions", fx("fix_a.p2p"), "--peer", "P1"]
    first = run(base)
    assert run(base) == first
    assert run(base + ["--threads", "4"]) == first


def test_cycle_warning(tmp_path):
    f = tmp_path / "cyc.p2p"
    f.write_text((FIXTURES / "fix_c.p2p").read_text() + "dec C -> P : forall x,y (R1(x,y) -> U(x,y));\ntrust C same P;\n")
    code, out, err = run(["check", str(f), "--peer", "P", "--mode", "transitive"])
    assert code == 0 and "equal (3 solutions)" in out and "cycl" in err
