import pytest
from hypothesis import given, strategies as st

from peercqa.errors import ParseError, UnsafeQuery, ValidationError
from peercqa.lang import (
    FULL_INCLUSION,
    LOCAL_FD,
    LOCAL_DENIAL,
    MIXED_REFERENTIAL,
    REFERENTIAL,
    UNIVERSAL_BUILTIN_HEAD,
    UNSUPPORTED,
    Cmp,
    ConstraintAST,
    Const,
    Pred,
    Var,
    classify_dec,
    parse_constraint,
    parse_query,
    parse_system,
    render_constraint,
    render_query,
    render_system,
    safe_range_check,
)

from conftest import FIXTURES, load

DEC = ("P", "Q")


def test_parse_fixture_a(fix_a):
    assert len(fix_a.peers) == 3
    assert len(fix_a.decs) == 2
    assert len(fix_a.trust) == 2


def test_parse_empty_system():
    s = parse_system("")
    assert s.peers == () and s.decs == () and s.trust == ()


def test_unknown_relation():
    text = (FIXTURES / "fix_a.p2p").read_text() + "dec P1 -> P2 : forall x (R9(x) -> R1(x,x));\n"
    with pytest.raises(ValidationError, match="R9"):
        parse_system(text)


def test_arity_and_duplicates():
    with pytest.raises(ValidationError):
        parse_system("peer P { schema R/2; instance R(a); }")
    with pytest.raises(ValidationError):
        parse_system("peer P { schema R/1; }\npeer P { schema S/1; }")
    with pytest.raises(ValidationError):
        parse_system("peer P { schema R/1; }\npeer Q { schema R/1; }")


def test_syntax_error_has_position():
    with pytest.raises(ParseError) as e:
        parse_system("peer P {\n  schema R/1\n}")
    assert e.value.line == 3


def test_parse_constraint_shapes():
    c = parse_constraint("forall x,y (R2(x,y) -> R1(x,y))", DEC)
    assert classify_dec(c) == FULL_INCLUSION
    c = parse_constraint("forall x,y,z exists w (R1(x,y) & S1(z,y) -> R2(x,w) & S2(z,w))", DEC)
    assert c.existential == ("w",)
    assert classify_dec(c) == MIXED_REFERENTIAL
    c = parse_constraint("forall x,y,z (R1(x,y) & R1(x,z) -> y=z)", "P")
    assert classify_dec(c) == LOCAL_FD


def test_parse_constraint_errors():
    with pytest.raises(ParseError, match="unbound"):
        parse_constraint("forall x (R1(x,y) -> R2(x))")
    with pytest.raises(ParseError):
        parse_constraint("forall x (R1(x) -> ")


def test_classify_other_shapes():
    key = parse_constraint("forall x,y,z (R1(x,y) & R3(x,z) -> y = z)", DEC)
    assert classify_dec(key) == UNIVERSAL_BUILTIN_HEAD
    assert classify_dec(parse_constraint("forall x,y exists w (A(x,y) -> B(y,w))", DEC)) == REFERENTIAL
    assert classify_dec(parse_constraint("forall x (A(x) & B(x) -> false)", "P")) == LOCAL_DENIAL
    assert classify_dec(parse_constraint("forall x (A(x) -> false)", DEC)) == UNSUPPORTED


def test_fixture_constraints_classify(fix_a, fix_b, fix_c):
    classes = [classify_dec(d.ast) for s in (fix_a, fix_b, fix_c) for d in s.decs]
    assert classes == [FULL_INCLUSION, UNIVERSAL_BUILTIN_HEAD, MIXED_REFERENTIAL, MIXED_REFERENTIAL, FULL_INCLUSION]
    fd = load("fix_b_fd.p2p").peer("P").ics[0]
    assert classify_dec(fd) == LOCAL_FD


def test_parse_query():
    q = parse_query("Q(x,y) := R1(x,y)")
    assert q.head_vars == ("x", "y") and q.formula == Pred("R1", (Var("x"), Var("y")))
    q = parse_query("Q(x,z) := exists y (R1(x,y) & R2(z,y))")
    assert q.relations() == {"R1", "R2"}
    with pytest.raises(UnsafeQuery):
        parse_query("Q(x) := ~R1(x,x)")


def test_safe_range_check():
    eq1 = parse_query((FIXTURES / "eq1_rewritten.q").read_text())
    assert safe_range_check(eq1)
    assert not safe_range_check(parse_query("Q(x) := x = x", check=False))
    assert safe_range_check(parse_query("Q(x) := R1(x,y) | R2(x,y)"))


def test_query_round_trip():
    for text in ["Q(x,y) := R1(x,y)", (FIXTURES / "eq1_rewritten.q").read_text()]:
        q = parse_query(text)
        assert parse_query(render_query(q)) == q


def test_system_round_trip(fix_a, fix_b, fix_c):
    for s in (fix_a, fix_b, fix_c, load("fix_b_fd.p2p")):
        assert parse_system(render_system(s)) == s


def test_owners_partition_relations(fix_a, fix_c):
    for s in (fix_a, fix_c):
        names = [r for p in s.peers for r in p.relation_names]
        assert len(names) == len(set(names))


# random constraints of the supported shapes

variables = st.sampled_from(["x", "y", "z", "u"])
consts = st.sampled_from(["a", "b", "c"])
terms = st.one_of(variables.map(Var), consts.map(Const))


def pred(rels):
    return st.builds(lambda r, ts: Pred(r, tuple(ts)), st.sampled_from(rels), st.lists(terms, min_size=2, max_size=2))


@st.composite
def constraints(draw):
    body = draw(st.lists(pred(["A", "B"]), min_size=1, max_size=2))
    bvars = sorted({v for p in body for v in p.vars()})
    if bvars and draw(st.booleans()):
        l, r = draw(st.sampled_from(bvars)), draw(st.sampled_from(bvars))
        body.append(Cmp(draw(st.sampled_from(["=", "!="])), Var(l), Var(r)))
    ex = ("w",) if draw(st.booleans()) else ()
    pool = [Var(v) for v in bvars] + [Var(v) for v in ex] + [Const("a")]
    head = []
    for _ in range(draw(st.integers(1, 2))):
        head.append(Pred(draw(st.sampled_from(["C", "D"])), (draw(st.sampled_from(pool)), draw(st.sampled_from(pool)))))
    if ex and not any("w" in h.vars() for h in head):
        head[0] = Pred(head[0].rel, (head[0].terms[0], Var("w")))
    return ConstraintAST(tuple(bvars), ex, tuple(body), tuple(head), DEC)


@given(constraints())
def test_constraint_round_trip(c):
    assert parse_constraint(render_constraint(c), DEC) == c


@given(constraints())
def test_classify_total_and_deterministic(c):
    assert classify_dec(c) == classify_dec(c)
    assert classify_dec(c) in {FULL_INCLUSION, UNIVERSAL_BUILTIN_HEAD, REFERENTIAL, MIXED_REFERENTIAL, UNSUPPORTED}
