"""First-order query evaluation and peer-consistent answers."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable

from .errors import UnsafeQuery, ValidationError
from .lang import (
    FULL_INCLUSION,
    And,
    Cmp,
    ConstraintAST,
    Const,
    Exists,
    Forall,
    Formula,
    Implies,
    Not,
    Or,
    Pred,
    QueryAST,
    Var,
    classify_dec,
    formula_constants,
    safe_range_problem,
)
from .relational import Instance, active_domain, restrict
from .system import System


@dataclass(frozen=True)
class TupleSet:
    arity: int
    rows: frozenset[tuple[str, ...]] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "rows", frozenset(self.rows))
        if any(len(r) != self.arity for r in self.rows):
            raise ValueError(f"every row must have {self.arity} values")

    def sorted(self) -> list[tuple[str, ...]]:
        return sorted(self.rows)

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.sorted())

    def __contains__(self, row):
        return tuple(row) in self.rows

    def __and__(self, other: "TupleSet") -> "TupleSet":
        return TupleSet(self.arity, self.rows & other.rows)

    def __str__(self):
        return " ".join("(" + ",".join(r) + ")" for r in self.sorted())


# A table is (variables, rows) with rows aligned to the sorted variable tuple.
_Table = tuple[tuple[str, ...], set]


def _pad(t: _Table, vs: tuple[str, ...], dom) -> set:
    have, rows = t
    missing = [v for v in vs if v not in have]
    out = set()
    for row in rows:
        bound = dict(zip(have, row))
        for extra in itertools.product(dom, repeat=len(missing)):
            full = {**bound, **dict(zip(missing, extra))}
            out.add(tuple(full[v] for v in vs))
    return out


def _join(a: _Table, b: _Table) -> _Table:
    va, ra = a
    vb, rb = b
    vs = tuple(sorted(set(va) | set(vb)))
    shared = [v for v in va if v in vb]
    index: dict[tuple, list] = {}
    for row in rb:
        d = dict(zip(vb, row))
        index.setdefault(tuple(d[v] for v in shared), []).append(d)
    out = set()
    for row in ra:
        d = dict(zip(va, row))
        for e in index.get(tuple(d[v] for v in shared), ()):
            full = {**d, **e}
            out.add(tuple(full[v] for v in vs))
    return vs, out


def _project(t: _Table, keep: Iterable[str]) -> _Table:
    vs, rows = t
    keep = tuple(sorted(set(keep) & set(vs)))
    pos = [vs.index(v) for v in keep]
    return keep, {tuple(r[i] for i in pos) for r in rows}


def _eval(f: Formula, r: dict[str, set], dom: tuple[str, ...]) -> _Table:
    if isinstance(f, Pred):
        vs = tuple(sorted(f.vars()))
        out = set()
        for row in r.get(f.rel, ()):
            theta = {}
            ok = True
            for t, v in zip(f.terms, row):
                if isinstance(t, Const):
                    ok = t.value == v
                elif t.name in theta:
                    ok = theta[t.name] == v
                else:
                    theta[t.name] = v
                if not ok:
                    break
            if ok:
                out.add(tuple(theta[v] for v in vs))
        return vs, out
    if isinstance(f, Cmp):
        vs = tuple(sorted(f.vars()))
        out = set()
        for vals in itertools.product(dom, repeat=len(vs)):
            theta = dict(zip(vs, vals))
            l = f.left.value if isinstance(f.left, Const) else theta[f.left.name]
            rr = f.right.value if isinstance(f.right, Const) else theta[f.right.name]
            if (l == rr) == (f.op == "="):
                out.add(vals)
        return vs, out
    if isinstance(f, Not):
        vs, rows = _eval(f.sub, r, dom)
        return vs, set(itertools.product(dom, repeat=len(vs))) - rows
    if isinstance(f, And):
        t = ((), {()})
        for s in f.subs:
            t = _join(t, _eval(s, r, dom))
        return t
    if isinstance(f, Or):
        parts = [_eval(s, r, dom) for s in f.subs]
        vs = tuple(sorted(set().union(*(set(p[0]) for p in parts))))
        out = set()
        for p in parts:
            out |= _pad(p, vs, dom)
        return vs, out
    if isinstance(f, Implies):
        return _eval(Or((Not(f.left), f.right)), r, dom)
    if isinstance(f, Exists):
        vs, rows = _eval(f.sub, r, dom)
        return _project((vs, rows), [v for v in vs if v not in f.vars])
    if isinstance(f, Forall):
        return _eval(Not(Exists(f.vars, Not(f.sub))), r, dom)
    raise TypeError(f)


def eval_fo(q: QueryAST, r: Instance) -> TupleSet:
    """Answers of a safe-range query; quantifiers range over the active domain."""
    problem = safe_range_problem(q)
    if problem:
        raise UnsafeQuery(f"query {q.name} is not safe-range: {problem}")
    dom = tuple(sorted(active_domain([r], formula_constants(q.formula))))
    rels: dict[str, set] = {}
    for a in r.atoms:
        rels.setdefault(a.rel, set()).add(a.args)
    vs, rows = _eval(q.formula, rels, dom)
    # head variables missing from the formula cannot occur in a safe-range query
    pos = [vs.index(v) for v in q.head_vars]
    return TupleSet(len(q.head_vars), {tuple(row[i] for i in pos) for row in rows})


def rewrite_inclusion(q: QueryAST, decs: Iterable[ConstraintAST]) -> QueryAST:
    """Replace each atom over an inclusion target by its disjunction with the sources."""
    sources: dict[str, list[str]] = {}
    for d in decs:
        if classify_dec(d) != FULL_INCLUSION:
            raise ValidationError(f"only full inclusion constraints can be used for rewriting: {d}")
        sources.setdefault(d.head_atoms[0].rel, []).append(d.body_atoms[0].rel)

    def go(f: Formula) -> Formula:
        if isinstance(f, Pred):
            if f.rel in sources:
                return Or((f,) + tuple(Pred(s, f.terms) for s in sources[f.rel]))
            return f
        if isinstance(f, Cmp):
            return f
        if isinstance(f, Not):
            return Not(go(f.sub))
        if isinstance(f, And):
            return And(tuple(go(s) for s in f.subs))
        if isinstance(f, Or):
            return Or(tuple(go(s) for s in f.subs))
        if isinstance(f, Implies):
            return Implies(go(f.left), go(f.right))
        if isinstance(f, Exists):
            return Exists(f.vars, go(f.sub))
        if isinstance(f, Forall):
            return Forall(f.vars, go(f.sub))
        raise TypeError(f)

    return QueryAST(q.name, q.head_vars, go(q.formula))


# ---------------------------------------------------------------- peer-consistent answers


@dataclass(frozen=True)
class PCAResult:
    answers: TupleSet
    inconsistent: bool = False
    solutions: int = 0
    warnings: tuple[str, ...] = ()


def _conjunctive(f: Formula):
    """Positive atoms and builtins of an existential conjunctive query, or None."""
    while isinstance(f, Exists):
        f = f.sub
    parts = f.subs if isinstance(f, And) else (f,)
    flat = []
    for p in parts:
        if isinstance(p, And):
            inner = _conjunctive(p)
            if inner is None:
                return None
            flat.extend(inner)
        elif isinstance(p, (Pred, Cmp)):
            flat.append(p)
        else:
            return None
    return flat


def check_query_scope(system: System, peer: str, q: QueryAST) -> None:
    own = system.peer(peer).relation_names
    for rel in q.relations():
        system.relation(rel)
        if rel not in own:
            raise ValidationError(f"query {q.name} mentions {rel}, which is not a relation of peer {peer}")


def intersect_answers(q: QueryAST, solutions: Iterable[Instance], relations) -> TupleSet | None:
    common = None
    for s in solutions:
        ans = eval_fo(q, restrict(s, relations))
        common = ans if common is None else common & ans
    return common


def peer_consistent_answers(
    system: System,
    peer: str,
    q: QueryAST,
    method: str = "oracle",
    mode: str = "direct",
    max_new_atoms: int | None = None,
    threads: int = 1,
) -> PCAResult:
    check_query_scope(system, peer, q)
    own = system.peer(peer).relation_names
    if method == "oracle":
        from .oracle import solutions_direct, solutions_transitive

        fn = solutions_transitive if mode == "transitive" else solutions_direct
        sols = fn(system, peer, max_new_atoms=max_new_atoms, threads=threads)
        common = intersect_answers(q, sols.solutions, own)
        if common is None:
            return PCAResult(TupleSet(len(q.head_vars)), True, 0, sols.warnings)
        return PCAResult(common, False, len(sols), sols.warnings)

    from .asp import answer_sets, cautious_answers
    from .solve import compile_for, project

    comp = compile_for(system, peer, method, mode)
    body = _conjunctive(q.formula)
    if method == "asp" and body is not None:
        program, ans = _with_answer_rule(comp, q, body, system.global_instance())
        rows, n = cautious_answers(program, ans)
        if n == 0:
            return PCAResult(TupleSet(len(q.head_vars)), True, 0, comp.warnings)
        return PCAResult(TupleSet(len(q.head_vars), rows), False, n, comp.warnings)
    sols = project(comp, answer_sets(comp.program), system.global_instance())
    common = intersect_answers(q, sols.solutions, own)
    if common is None:
        return PCAResult(TupleSet(len(q.head_vars)), True, 0, comp.warnings)
    return PCAResult(common, False, len(sols), comp.warnings)


def _with_answer_rule(comp, q: QueryAST, body, instance: Instance):
    """Add ``ans(X..) :- <query body over final predicates>`` to a compiled program.

    Relations the program never mentions have no facts yet; they are added
    from ``instance`` so the answer rule can read them.
    """
    from .compiler import _var_map
    from .program import BodyLit, PLit, Rule

    vm = _var_map(sorted({v for p in body for v in p.vars()}))

    def term(t):
        return Var(vm[t.name]) if isinstance(t, Var) else Const(t.value)

    lits = []
    for p in body:
        if isinstance(p, Pred):
            lits.append(BodyLit(PLit(comp.final[p.rel], tuple(term(t) for t in p.terms))))
        else:
            lits.append(Cmp(p.op, term(p.left), term(p.right)))
    ans, k = "ans", 1
    while ans in comp.program.predicates():
        k += 1
        ans = f"ans{k}"
    head = PLit(ans, tuple(Var(vm[v]) for v in q.head_vars))
    # keep positive atoms first so the rule reads naturally
    lits.sort(key=lambda e: isinstance(e, Cmp))
    facts = [
        PLit(comp.base[a.rel], tuple(Const(v) for v in a.args))
        for a in instance.atoms
        if any(isinstance(p, Pred) and p.rel == a.rel and comp.final[a.rel] == comp.base[a.rel] for p in body)
    ]
    return comp.program.extend([Rule((head,), tuple(lits))], facts), ans
