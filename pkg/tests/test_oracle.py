import pytest
from hypothesis import given, settings, strategies as st

from peercqa.errors import SearchCapExceeded, UnsupportedError
from peercqa.lang import parse_constraint, parse_system
from peercqa.oracle import RepairProblem, repairs, satisfies, solutions_direct, solutions_transitive, stage_plan
from peercqa.relational import Instance, RelationSymbol, closer_or_equal, restrict

from conftest import atoms, load
from oracle_ref import brute_repairs, holds
from randsys import random_system

R_SCHEMA = frozenset({RelationSymbol("R", 2, "P")})

R_PRIME = atoms("R1(a,b) R1(s,t) R1(c,d) R1(a,e) R2(c,d) R2(a,e)")
R_SECOND = atoms("R1(a,b) R1(c,d) R1(a,e) R2(c,d) R2(a,e) R3(s,u)")


def test_fd_repair_pair():
    fd = parse_constraint("forall x,y,z (R(x,y) & R(x,z) -> y = z)", "P")
    base = Instance(atoms("R(a,b) R(a,c)"), R_SCHEMA)
    got = {r.atoms for r in repairs(RepairProblem(base, [fd], {"R"}))}
    assert got == {atoms("R(a,b)"), atoms("R(a,c)")}


def test_fix_a_stage_one(fix_a):
    plan = stage_plan(fix_a, "P1")
    base = fix_a.global_instance()
    stage = plan.stages[0]
    got = repairs(RepairProblem(base, stage.constraints, stage.flexible, plan.domain))
    assert [r.atoms for r in got] == [base.atoms | atoms("R1(c,d) R1(a,e)")]


def test_fix_a_solutions(fix_a):
    sols = solutions_direct(fix_a, "P1")
    assert sols.atom_sets() == {R_PRIME, R_SECOND}
    assert len(sols.stage1_repairs) == 1


def test_fix_b_repairs(fix_b):
    fixed = atoms("S1(c,b) S2(c,e) S2(c,f)")
    sols = solutions_direct(fix_b, "P")
    assert sols.atom_sets() == {fixed, fixed | atoms("R1(a,b) R2(a,e)"), fixed | atoms("R1(a,b) R2(a,f)")}


def test_satisfied_system_keeps_original(fix_a):
    sols = solutions_direct(fix_a, "P2")
    assert sols.atom_sets() == {fix_a.global_instance().atoms}


def test_local_ic_filters():
    s = load("fix_b_fd.p2p")
    assert solutions_direct(s, "P").atom_sets() == solutions_direct(load("fix_b.p2p"), "P").atom_sets()
    s = parse_system(
        "peer P { schema A/2; instance A(a,b); ic forall x,y,z (A(x,y) & A(x,z) -> y = z); }\n"
        "peer Q { schema B/2; instance B(a,c); }\n"
        "trust P less Q;\ndec P -> Q : forall x,y (B(x,y) -> A(x,y));"
    )
    assert solutions_direct(s, "P").inconsistent


def test_transitive_fix_c(fix_c):
    fixed = atoms("S1(c,b) S2(c,e) S2(c,f) U(c,b)")
    sols = solutions_transitive(fix_c, "P")
    assert sols.atom_sets() == {fixed, fixed | atoms("R1(a,b) R2(a,e)"), fixed | atoms("R1(a,b) R2(a,f)")}
    # the direct case sees no S1 tuple and keeps everything
    assert solutions_direct(fix_c, "P").atom_sets() == {fix_c.global_instance().atoms}


def test_search_cap():
    s = parse_system(
        "peer P { schema A/2, B/2; instance A(a,b); }\npeer Q { schema C/2; }\n"
        "trust P same Q;\ndec P -> Q : forall x,y exists w (A(x,y) -> C(y,w));"
    )
    with pytest.raises(SearchCapExceeded):
        solutions_direct(s, "P", max_new_atoms=0)
    assert len(solutions_direct(s, "P", max_new_atoms=1)) == 3


def test_unsupported_dec():
    s = parse_system(
        "peer P { schema A/1; }\npeer Q { schema B/1; }\n"
        "trust P less Q;\ndec P -> Q : forall x (A(x) & B(x) -> false);"
    )
    with pytest.raises(UnsupportedError):
        solutions_direct(s, "P")


def test_threads_give_same_output(fix_a):
    for seed in (3, 17, 41):
        s = parse_system(random_system(seed))
        assert solutions_direct(s, "P1", threads=4) == solutions_direct(s, "P1")


# soundness and minimality over the random corpus


def _check_solutions(system):
    plan = stage_plan(system, "P1")
    base = system.global_instance()
    sols = solutions_direct(system, "P1")
    flexible = set().union(*(st.flexible for st in plan.stages)) if plan.stages else set()
    constraints = [c for st in plan.stages for c in st.constraints] + list(plan.local_ics)
    for s in sols:
        assert all(holds(c, s.atoms, plan.domain) for c in constraints)
        changed = {a.rel for a in s.atoms ^ base.atoms}
        assert changed <= flexible
    for a in sols:
        for b in sols:
            if a != b and len(plan.stages) == 1:
                assert not closer_or_equal(base, a, b)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 199))
def test_random_solutions_sound(seed):
    _check_solutions(parse_system(random_system(seed)))


# completeness against exhaustive enumeration

TEMPLATES = [
    "forall x,y (B(x,y) -> A(x,y))",
    "forall x,y,z (A(x,y) & B(x,z) -> y = z)",
    "forall x,y,z (A(x,y) & B(x,z) -> y != z)",
    "forall x,y exists w (B(x,y) -> A(y,w))",
    "forall x,y exists w (A(x,y) -> B(y,w))",
    "forall x,y,z (A(x,y) & A(x,z) -> y = z)",
]
SCHEMA = frozenset({RelationSymbol("A", 2, "P"), RelationSymbol("B", 2, "Q")})


@st.composite
def small_problems(draw):
    dom = "ab" if draw(st.booleans()) else "abc"
    both = len(dom) == 2 and draw(st.booleans())
    flexible = {"A", "B"} if both else {"A"}
    pool = sorted(atoms(" ".join(f"{r}({x},{y})" for r in "AB" for x in dom for y in dom)))
    base = Instance(frozenset(draw(st.sets(st.sampled_from(pool), max_size=5))), SCHEMA)
    cons = [parse_constraint(t, ("P", "Q")) for t in draw(st.sets(st.sampled_from(TEMPLATES), min_size=1, max_size=2))]
    return RepairProblem(base, cons, flexible, frozenset(dom), max_new_atoms=len(dom) ** 2 * 2)


@settings(max_examples=80, deadline=None)
@given(small_problems())
def test_repairs_match_exhaustive_search(p):
    got = {r.atoms for r in repairs(p)}
    want = brute_repairs(p.base.atoms, p.constraints, p.flexible, {"A": 2, "B": 2}, p.domain)
    assert got == want


@settings(max_examples=40, deadline=None)
@given(small_problems())
def test_consistent_base_is_its_own_repair(p):
    if satisfies(p.base.atoms, p.constraints):
        assert [r.atoms for r in repairs(p)] == [p.base.atoms]
