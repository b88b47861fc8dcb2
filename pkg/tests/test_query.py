import pytest
from hypothesis import given, settings, strategies as st

from peercqa.errors import UnsafeQuery, ValidationError
from peercqa.lang import Or, Pred, parse_query, parse_system
from peercqa.oracle import solutions_direct
from peercqa.query import TupleSet, eval_fo, intersect_answers, peer_consistent_answers, rewrite_inclusion
from peercqa.relational import Instance, restrict

from conftest import FIXTURES, load
from randsys import random_system

R1_Q = parse_query("Q(x,y) := R1(x,y)")
FIX_A_PCA = {("a", "b"), ("c", "d"), ("a", "e")}


def query(name):
    return parse_query((FIXTURES / name).read_text())


def test_eval_eq1(fix_a):
    assert eval_fo(query("eq1_rewritten.q"), fix_a.global_instance()).rows == FIX_A_PCA


def test_eval_empty_instance(fix_a):
    empty = Instance(frozenset(), fix_a.schema)
    for q in (R1_Q, query("eq1_rewritten.q"), parse_query("Q(x) := R1(x,y) & ~R2(x,y)")):
        assert eval_fo(q, empty).rows == frozenset()


def test_eval_atom_query(fix_a):
    assert eval_fo(R1_Q, restrict(fix_a.global_instance(), ["R1"])).rows == {("a", "b"), ("s", "t")}


def test_eval_connectives(fix_a):
    r = fix_a.global_instance()
    q = parse_query("Q(x) := exists y R1(x,y) & forall z (R3(x,z) -> z = 'f')")
    assert eval_fo(q, r).rows == {("a",)}
    q = parse_query("Q(x,y) := R2(x,y) & x != 'c'")
    assert eval_fo(q, r).rows == {("a", "e")}
    with pytest.raises(UnsafeQuery):
        eval_fo(parse_query("Q(x) := x = x", check=False), r)


def test_tupleset_arity():
    with pytest.raises(ValueError):
        TupleSet(2, {("a",)})


def test_pca_fix_a(fix_a):
    for method in ("oracle", "asp"):
        res = peer_consistent_answers(fix_a, "P1", R1_Q, method)
        assert res.answers.rows == FIX_A_PCA and res.solutions == 2 and not res.inconsistent


def test_pca_fix_b(fix_b):
    q = query("fix_b_q.q")
    for method in ("oracle", "asp", "lav"):
        res = peer_consistent_answers(fix_b, "P", q, method)
        assert res.answers.rows == frozenset() and res.solutions == 3
        assert not res.inconsistent


def test_pca_satisfied_system(fix_a):
    q = parse_query("Q(x,y) := R2(x,y)")
    res = peer_consistent_answers(fix_a, "P2", q)
    assert res.answers == eval_fo(q, restrict(fix_a.global_instance(), ["R2"]))


def test_pca_foreign_relation(fix_a):
    with pytest.raises(ValidationError, match="R2"):
        peer_consistent_answers(fix_a, "P1", parse_query("Q(x,y) := R2(x,y)"))


def test_pca_inconsistent_flag():
    s = parse_system(
        "peer P { schema A/2; instance A(a,b); ic forall x,y,z (A(x,y) & A(x,z) -> y = z); }\n"
        "peer Q { schema B/2; instance B(a,c); }\n"
        "trust P less Q;\ndec P -> Q : forall x,y (B(x,y) -> A(x,y));"
    )
    for method in ("oracle", "asp"):
        res = peer_consistent_answers(s, "P", parse_query("Q(x,y) := A(x,y)"), method)
        assert res.inconsistent and len(res.answers) == 0


def test_rewrite_inclusion(fix_a):
    dec = fix_a.decs[0].ast
    q = rewrite_inclusion(R1_Q, [dec])
    assert q.formula == Or((Pred("R1", R1_Q.formula.terms), Pred("R2", R1_Q.formula.terms)))
    assert str(q) == "Q(x,y) := R1(x,y) | R2(x,y)"
    other = parse_query("Q(x) := exists y R3(x,y)")
    assert rewrite_inclusion(other, [dec]) == other
    with pytest.raises(ValidationError):
        rewrite_inclusion(R1_Q, [fix_a.decs[1].ast])


def test_rewrite_two_sources():
    s = load("two_sources.p2p")
    q = rewrite_inclusion(R1_Q, [d.ast for d in s.decs])
    assert len(q.formula.subs) == 3
    want = peer_consistent_answers(s, "P", R1_Q).answers
    assert eval_fo(q, s.global_instance()) == want
    assert want.rows == {("a", "b"), ("c", "d"), ("e", "f")}


def test_rewrite_matches_pca_on_inclusion_only_fix_a():
    s = parse_system((FIXTURES / "fix_a.p2p").read_text().split("dec P1 -> P3")[0])
    rewritten = rewrite_inclusion(R1_Q, [s.decs[0].ast])
    assert eval_fo(rewritten, s.global_instance()) == peer_consistent_answers(s, "P1", R1_Q).answers


QUERIES = [
    "Q(x,y) := P1A(x,y)",
    "Q(x) := exists y (P1A(x,y) & P1B(y,x))",
    "Q(x,y) := P1A(x,y) & ~P1B(x,y)",
    "Q(x) := exists y P1A(x,y) | exists y P1B(y,x)",
]


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 199), st.sampled_from(QUERIES))
def test_pca_properties(seed, text):
    s = parse_system(random_system(seed))
    q = parse_query(text)
    own = s.peer("P1").relation_names
    sols = solutions_direct(s, "P1").solutions
    res = peer_consistent_answers(s, "P1", q)
    for sol in sols:
        assert res.answers.rows <= eval_fo(q, restrict(sol, own)).rows
    if len(sols) > 1:
        fewer = intersect_answers(q, sols[1:], own)
        assert res.answers.rows <= fewer.rows
    assert peer_consistent_answers(s, "P1", q, "asp").answers == res.answers
