"""Compile a peer's exchange constraints into disjunctive programs.

Three constructions are provided:

* :func:`compile_direct`: one layer per trust stage.  Each flexible relation
  ``R`` gets a final version ``rp`` (``rp1`` for the first of two stages) that
  copies ``r`` unless an exception rule derives ``-rp``.  Existential
  constraints use an explicit insertion flag, so a deletion never carries a
  witness choice and each answer set is one minimal repair.
* :func:`compile_lav`: the annotated three-layer program with ``td/ta/fa/tss``
  constants and closed/open/clopen sources.
* :func:`compile_transitive`: the union of the direct programs of every peer
  reachable through exchange constraints, downstream peers first.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import UnsupportedError
from .lang import (
    FULL_INCLUSION,
    UNSUPPORTED,
    Cmp,
    ConstraintAST,
    Const,
    Pred,
    Var,
    classify_dec,
)
from .oracle import repair_domain, stage_plan
from .program import BodyLit, ChoiceGoal, PLit, Program, Rule
from .system import LESS, System
from .transforms import head_cycle, is_hcf, shift_disjunctions, unfold_choice

TD, TA, FA, TSS = "td", "ta", "fa", "tss"
LEGAL, REPAIR = "legal-instance", "repair"
CLOSED, OPEN, CLOPEN = "closed", "open", "clopen"

__all__ = [
    "Compilation",
    "compile_direct",
    "compile_lav",
    "compile_transitive",
    "head_cycle",
    "is_hcf",
    "lav_labels",
    "relation_predicates",
    "shift_disjunctions",
    "strip_choice",
    "unfold_choice",
]


@dataclass(frozen=True)
class Compilation:
    program: Program
    peer: str
    mode: str  # direct | lav | transitive
    final: dict[str, str]  # relation -> predicate holding its solution content
    base: dict[str, str]  # relation -> predicate holding its original content
    warnings: tuple[str, ...] = ()
    labels: dict[str, str] = field(default_factory=dict)  # LAV only

    @property
    def primed(self) -> dict[str, str]:
        """Final predicate -> relation, for the relations that can change."""
        return {p: r for r, p in self.final.items() if p != self.base[r]}

    @property
    def projection(self) -> dict[str, str]:
        """Predicate -> relation map used to read solutions off answer sets."""
        if self.mode == "lav":
            return {p: r for r, p in self.final.items() if r in self.labels}
        return self.primed

    def __str__(self):
        return str(self.program)


def relation_predicates(system: System) -> dict[str, str]:
    """Lower-case predicate name for every relation; clashes are rejected."""
    out, seen = {}, {}
    for rel in sorted(r.name for r in system.schema):
        p = rel.lower()
        if not re.fullmatch(r"[a-z][a-z0-9_]*", p):
            p = "r_" + re.sub(r"[^a-z0-9_]", "_", p)
        if p in seen:
            raise UnsupportedError(f"relations {seen[p]} and {rel} map to the same predicate {p}")
        seen[p] = rel
        out[rel] = p
    return out


def _var_map(names) -> dict[str, str]:
    out, used = {}, set()
    for n in names:
        v = n[0].upper() + n[1:]
        while v in used:
            v += "_"
        used.add(v)
        out[n] = v
    return out


class _Builder:
    def __init__(self, system: System, preds: dict[str, str]):
        self.system = system
        self.preds = preds
        self.rules: list[Rule] = []
        self.counter = 0
        self.taken = set(preds.values())
        self.used_base: set[str] = set()
        self.dom: str | None = None

    def aux(self) -> str:
        while True:
            self.counter += 1
            name = f"aux_{self.counter}"
            if name not in self.taken:
                self.taken.add(name)
                return name

    def name(self, base: str) -> str:
        n, k = base, 1
        while n in self.taken:
            k += 1
            n = f"{base}{k}"
        self.taken.add(n)
        return n

    def dom_pred(self) -> str:
        if self.dom is None:
            self.dom = self.name("dom")
        return self.dom

    def arity(self, rel: str) -> int:
        return self.system.relation(rel).arity

    def emit(self, head, body=(), layer=None):
        self.rules.append(Rule(tuple(head), tuple(body), layer))

    def facts(self) -> frozenset[PLit]:
        out = set()
        for a in self.system.global_instance().atoms:
            if a.rel in self.used_base:
                out.add(PLit(self.preds[a.rel], tuple(Const(v) for v in a.args)))
        if self.dom:
            out |= {PLit(self.dom, (Const(c),)) for c in repair_domain(self.system)}
        return frozenset(out)


_NAMES = ("X", "Y", "Z", "V")


def _xs(n: int) -> tuple[Var, ...]:
    if n <= len(_NAMES):
        return tuple(Var(v) for v in _NAMES[:n])
    return tuple(Var(f"X{i + 1}") for i in range(n))


def _pos(pred, args, neg=False):
    return BodyLit(PLit(pred, tuple(args), neg))


def _naf(pred, args, neg=False):
    return BodyLit(PLit(pred, tuple(args), neg), naf=True)


# ---------------------------------------------------------------- direct


@dataclass
class _StageCtx:
    inp: dict[str, str]  # relation -> input predicate
    out: dict[str, str]  # flexible relation -> output predicate
    deletable: set[str]
    insertable: set[str]
    star: dict[str, str] = field(default_factory=dict)


def _stage_context(b: _Builder, constraints, flexible, inp: dict[str, str], out_names: dict[str, str]) -> _StageCtx:
    deletable = {a.rel for c in constraints for a in c.body_atoms if a.rel in flexible}
    insertable = {a.rel for c in constraints if c.head_atoms for a in c.head_atoms if a.rel in flexible}
    ctx = _StageCtx(dict(inp), {r: out_names[r] for r in flexible}, deletable, insertable)
    for r in sorted(flexible):
        xs = _xs(b.arity(r))
        i, o = ctx.inp[r], ctx.out[r]
        if r in deletable:
            b.emit([PLit(o, xs)], [_pos(i, xs), _naf(o, xs, neg=True)])
        else:
            b.emit([PLit(o, xs)], [_pos(i, xs)])
        if r in insertable and r in {a.rel for c in constraints for a in c.body_atoms}:
            s = b.name(o + "s")
            ctx.star[r] = s
            b.emit([PLit(s, xs)], [_pos(i, xs)])
            b.emit([PLit(s, xs)], [_pos(o, xs)])
    return ctx


def _terms(terms, vm) -> tuple:
    return tuple(Var(vm[t.name]) if isinstance(t, Var) else Const(t.value) for t in terms)


def _cmp(c: Cmp, vm) -> Cmp:
    l, r = _terms((c.left, c.right), vm)
    return Cmp(c.op, l, r)


def _dedupe(seq):
    return list(dict.fromkeys(seq))


def _compile_constraint(b: _Builder, c: ConstraintAST, ctx: _StageCtx, flexible: set[str]) -> None:
    kind = classify_dec(c)
    if kind == UNSUPPORTED:
        raise UnsupportedError(f"unsupported constraint: {c}")
    vm = _var_map(list(c.universal) + list(c.existential))

    def cur(p: Pred) -> PLit:
        return PLit(ctx.star.get(p.rel, ctx.inp[p.rel]), _terms(p.terms, vm))

    body = [BodyLit(cur(p)) for p in c.body_atoms] + [_cmp(x, vm) for x in c.body_builtins]
    dels = _dedupe(PLit(ctx.out[p.rel], _terms(p.terms, vm), True) for p in c.body_atoms if p.rel in flexible)

    def deny_or_delete(extra):
        b.emit(dels, body + list(extra))

    if not c.head:
        deny_or_delete([])
        return
    if not c.existential:
        if c.head_builtins and not c.head_atoms:
            for hb in c.head_builtins:
                deny_or_delete([_cmp(hb.negated(), vm)])
            return
        if len(c.head_atoms) != 1 or c.head_builtins:
            raise UnsupportedError(f"universal constraints need a single head atom or only builtins: {c}")
        h = c.head_atoms[0]
        args = _terms(h.terms, vm)
        if h.rel in flexible:
            inserted = PLit(ctx.out[h.rel], args)
            if kind == FULL_INCLUSION and not dels:
                # import rule
                b.emit([inserted], body + [_naf(ctx.inp[h.rel], args)])
            else:
                b.emit(dels + [inserted], body + [_naf(ctx.inp[h.rel], args)])
            if h.rel in ctx.deletable:
                deny_or_delete([_pos(ctx.out[h.rel], args, neg=True)])
        else:
            deny_or_delete([_naf(ctx.inp[h.rel], args)])
        return
    _compile_existential(b, c, ctx, flexible, vm, body, dels)


def _compile_existential(b, c: ConstraintAST, ctx: _StageCtx, flexible, vm, body, dels) -> None:
    if len(c.existential) != 1:
        raise UnsupportedError(f"compilation supports one existential variable per constraint: {c}")
    if c.head_builtins:
        raise UnsupportedError(f"builtins in an existential head are not supported: {c}")
    w = Var(vm[c.existential[0]])
    head_vars = set().union(*(a.vars() for a in c.head_atoms))
    key = tuple(Var(vm[v]) for v in c.universal if v in head_vars)
    fixed_atoms = [a for a in c.head_atoms if a.rel not in flexible]
    flex_atoms = [a for a in c.head_atoms if a.rel in flexible]

    def still_there(p: Pred) -> list:
        args = _terms(p.terms, vm)
        lits = [_pos(ctx.inp[p.rel], args)]
        if p.rel in ctx.deletable:
            lits.append(_naf(ctx.out[p.rel], args, neg=True))
        return lits

    sat = b.aux()
    b.emit([PLit(sat, key)], [l for p in c.head_atoms for l in still_there(p)])
    if not flex_atoms:
        b.emit(dels, body + [_naf(sat, key)])
        return

    guard = [_pos(ctx.inp[p.rel], _terms(p.terms, vm)) for p in fixed_atoms]
    if not any(c.existential[0] in p.vars() for p in fixed_atoms):
        guard.append(_pos(b.dom_pred(), (w,)))
    wit_lits = []
    if fixed_atoms:
        gkey = tuple(k for k in key if any(k.name in {vm[v] for v in p.vars()} for p in fixed_atoms))
        wit = b.aux()
        b.emit([PLit(wit, gkey)], [_pos(ctx.inp[p.rel], _terms(p.terms, vm)) for p in fixed_atoms])
        b.emit(dels, body + [_naf(sat, key), _naf(wit, gkey)])
        wit_lits = [_pos(wit, gkey)]
    ins, sel, cov = b.aux(), b.aux(), b.aux()
    selkey = key + (w,)
    b.emit(dels + [PLit(ins, key)], body + [_naf(sat, key)] + wit_lits + [_naf(cov, key)])
    b.emit([PLit(sel, selkey)], [_pos(ins, key)] + guard + [ChoiceGoal(key, w)])
    for p in flex_atoms:
        b.emit([PLit(ctx.out[p.rel], _terms(p.terms, vm))], [_pos(sel, selkey)])
    b.emit(
        [PLit(cov, key)],
        guard + [_pos(ctx.out[p.rel], _terms(p.terms, vm)) for p in flex_atoms] + [_naf(sel, selkey)],
    )


def _local_ic(b: _Builder, c: ConstraintAST, final: dict[str, str]) -> None:
    """Local integrity constraint as denials over the final predicates."""
    if classify_dec(c) == UNSUPPORTED:
        raise UnsupportedError(f"unsupported local constraint: {c}")
    vm = _var_map(list(c.universal) + list(c.existential))
    body = [_pos(final[p.rel], _terms(p.terms, vm)) for p in c.body_atoms] + [_cmp(x, vm) for x in c.body_builtins]
    if not c.head:
        b.emit([], body)
    elif not c.head_atoms:
        for hb in c.head_builtins:
            b.emit([], body + [_cmp(hb.negated(), vm)])
    else:
        head_vars = set().union(*(a.vars() for a in c.head_atoms))
        key = tuple(Var(vm[v]) for v in c.universal if v in head_vars)
        sat = b.aux()
        b.emit(
            [PLit(sat, key)],
            [_pos(final[p.rel], _terms(p.terms, vm)) for p in c.head_atoms] + [_cmp(x, vm) for x in c.head_builtins],
        )
        b.emit([], body + [_naf(sat, key)])


def _compile_peer(b: _Builder, peer: str, inputs: dict[str, str], exclude=frozenset()) -> tuple[dict[str, str], list[str]]:
    """Emit one peer's direct program; returns relation -> final predicate for repaired relations."""
    plan = stage_plan(b.system, peer, exclude)
    final: dict[str, str] = {}
    current = dict(inputs)
    n = len(plan.stages)
    for i, stage in enumerate(plan.stages):
        flexible = set(stage.flexible)
        suffix = "p" if i == n - 1 else f"p{i + 1}"
        out_names = {}
        for r in sorted(flexible):
            out_names[r] = b.name(b.preds[r] + suffix)
        for c in stage.constraints:
            for rel in c.relations():
                current.setdefault(rel, b.preds[rel])
        ctx = _stage_context(b, stage.constraints, flexible, current, out_names)
        for c in stage.constraints:
            _compile_constraint(b, c, ctx, flexible)
        current.update(ctx.out)
        final.update(ctx.out)
    if plan.local_ics:
        view = {r.name: current.get(r.name, b.preds[r.name]) for r in b.system.schema}
        for ic in plan.local_ics:
            _local_ic(b, ic, view)
    return final, list(plan.warnings)


def _finish(b: _Builder, peer: str, mode: str, final: dict[str, str], warnings, labels=None) -> Compilation:
    rel_of = {v: k for k, v in b.preds.items()}
    for r in b.rules:
        for l in r.head + r.pos + r.naf:
            if l.pred in rel_of:
                b.used_base.add(rel_of[l.pred])
    full = {rel: final.get(rel, b.preds[rel]) for rel in b.preds}
    prog = Program(tuple(b.rules), b.facts(), f"{mode}:{peer}")
    bad = prog.unsafe_rules()
    if bad:
        raise AssertionError(f"compiler emitted a rule that is not range-restricted: {bad[0]}")
    return Compilation(prog, peer, mode, full, dict(b.preds), tuple(warnings), labels or {})


def compile_direct(system: System, peer: str) -> Compilation:
    b = _Builder(system, relation_predicates(system))
    final, warnings = _compile_peer(b, peer, {})
    return _finish(b, peer, "direct", final, warnings)


# ---------------------------------------------------------------- transitive


def _reachable(system: System, peer: str) -> tuple[list[str], set, list[str]]:
    """Post-order of peers reachable over DEC edges, back-edge DECs, warnings."""
    order, back, warnings = [], set(), []
    state: dict[str, int] = {}

    def visit(p: str):
        state[p] = 1
        for d in system.decs_of(p):
            q = d.target
            if state.get(q) == 1:
                back.add(d)
                warnings.append(
                    f"cyclic exchange dependency {p} -> {q}; the constraint from {p} to {q} is left out of the combined program"
                )
            elif q not in state:
                visit(q)
        state[p] = 2
        order.append(p)

    visit(peer)
    return order, back, warnings


def transitive_order(system: System, peer: str) -> tuple[list[str], frozenset, list[str]]:
    order, back, warnings = _reachable(system, peer)
    return order, frozenset(back), warnings


def compile_transitive(system: System, peer: str) -> Compilation:
    system.peer(peer)
    b = _Builder(system, relation_predicates(system))
    order, back, warnings = transitive_order(system, peer)
    repaired: dict[str, str] = {}
    owner: dict[str, str] = {}
    for q in order:
        if not system.decs_of(q) and not system.peer(q).ics:
            continue
        final, w = _compile_peer(b, q, dict(repaired), back)
        for rel, pred in final.items():
            if rel in owner:
                raise UnsupportedError(
                    f"relation {rel} is repaired by both {owner[rel]} and {q}; the combined program cannot merge them"
                )
            owner[rel] = q
        repaired.update(final)
        warnings.extend(x for x in w if x not in warnings)
    return _finish(b, peer, "transitive", repaired, warnings)


# ---------------------------------------------------------------- LAV


def lav_labels(system: System, peer: str) -> tuple[dict[str, str], list]:
    """closed / open / clopen label of every relation in the peer's extended schema."""
    plan = stage_plan(system, peer)
    if len(plan.stages) > 1:
        raise UnsupportedError("the LAV program supports peers whose constraints share one trust level")
    decs = plan.stages[0].constraints if plan.stages else ()
    flexible = plan.stages[0].flexible if plan.stages else frozenset()
    rels = set(system.peer(peer).relation_names)
    for c in decs:
        rels |= c.relations()
    labels = {}
    for r in sorted(rels):
        in_body = any(r in {a.rel for a in c.body_atoms} for c in decs)
        in_head = any(r in {a.rel for a in c.head_atoms} for c in decs)
        if r not in flexible:
            labels[r] = CLOPEN
        elif in_body and in_head:
            raise UnsupportedError(f"relation {r} would need both deletions and insertions in the LAV program")
        elif in_body:
            labels[r] = CLOSED
        elif in_head:
            labels[r] = OPEN
        else:
            labels[r] = CLOPEN
    # violations are read off the imported (td) tuples only, so an insertion
    # must not be able to satisfy another constraint's head
    writers: dict[str, int] = {}
    for c in decs:
        open_heads = {a.rel for a in c.head_atoms if a.rel in flexible}
        if len(open_heads) > 1 or len([a for a in c.head_atoms if a.rel in flexible]) > 1:
            raise UnsupportedError(f"the LAV program inserts at most one atom per violation: {c}")
        for r in open_heads:
            writers[r] = writers.get(r, 0) + 1
    for r, n in sorted(writers.items()):
        if n > 1:
            raise UnsupportedError(f"relation {r} receives insertions from {n} constraints in the LAV program")
    return labels, list(decs)


def compile_lav(system: System, peer: str) -> Compilation:
    preds = relation_predicates(system)
    b = _Builder(system, preds)
    labels, decs = lav_labels(system, peer)
    plan = stage_plan(system, peer)
    flexible = set(plan.stages[0].flexible) if plan.stages else set()
    prime = {r: b.name(preds[r] + "p") for r in labels}
    td, ta, fa, tss = (Const(x) for x in (TD, TA, FA, TSS))

    for r in labels:
        xs = _xs(b.arity(r))
        b.emit([PLit(prime[r], xs + (td,))], [_pos(preds[r], xs)], LEGAL)
    for r in labels:
        if labels[r] in (CLOSED, CLOPEN):
            xs = _xs(b.arity(r))
            b.emit([], [_pos(prime[r], xs + (td,)), _naf(preds[r], xs)], LEGAL)
    for r in labels:
        xs = _xs(b.arity(r))
        p = prime[r]
        b.emit([PLit(p, xs + (tss,))], [_pos(p, xs + (td,)), _naf(p, xs + (fa,))], REPAIR)
        b.emit([PLit(p, xs + (tss,))], [_pos(p, xs + (ta,))], REPAIR)
        b.emit([], [_pos(p, xs + (ta,)), _pos(p, xs + (fa,))], REPAIR)

    for c in decs:
        _lav_constraint(b, c, prime, flexible, (td, ta, fa))
    for ic in plan.local_ics:
        _lav_local_ic(b, ic, preds, prime, tss)
    final = {r: prime[r] for r in labels}
    return _finish(b, peer, "lav", final, plan.warnings, labels)


def _lav_constraint(b: _Builder, c: ConstraintAST, prime, flexible, ann) -> None:
    td, ta, fa = ann
    if classify_dec(c) == UNSUPPORTED:
        raise UnsupportedError(f"unsupported constraint: {c}")
    vm = _var_map(list(c.universal) + list(c.existential))

    def lit(p: Pred, a, neg=False):
        return PLit(prime[p.rel], _terms(p.terms, vm) + (a,))

    body = [BodyLit(lit(p, td)) for p in c.body_atoms] + [_cmp(x, vm) for x in c.body_builtins]
    dels = _dedupe(lit(p, fa) for p in c.body_atoms if p.rel in flexible)
    if not c.head:
        b.emit(dels, body, REPAIR)
        return
    if not c.existential:
        if not c.head_atoms:
            for hb in c.head_builtins:
                b.emit(dels, body + [_cmp(hb.negated(), vm)], REPAIR)
            return
        if len(c.head_atoms) != 1 or c.head_builtins:
            raise UnsupportedError(f"universal constraints need a single head atom or only builtins: {c}")
        h = c.head_atoms[0]
        ins = [lit(h, ta)] if h.rel in flexible else []
        b.emit(dels + ins, body + [BodyLit(lit(h, td), naf=True)], REPAIR)
        return
    if len(c.existential) != 1 or c.head_builtins:
        raise UnsupportedError(f"compilation supports one existential variable and no head builtins: {c}")
    w = Var(vm[c.existential[0]])
    head_vars = set().union(*(a.vars() for a in c.head_atoms))
    key = tuple(Var(vm[v]) for v in c.universal if v in head_vars)
    fixed_atoms = [a for a in c.head_atoms if a.rel not in flexible]
    flex_atoms = [a for a in c.head_atoms if a.rel in flexible]
    aux1 = b.aux()
    b.emit([PLit(aux1, key)], [BodyLit(lit(p, td)) for p in c.head_atoms], REPAIR)
    if not flex_atoms:
        b.emit(dels, body + [_naf(aux1, key)], REPAIR)
        return
    guard = [BodyLit(lit(p, td)) for p in fixed_atoms]
    if not any(c.existential[0] in p.vars() for p in fixed_atoms):
        guard.append(_pos(b.dom_pred(), (w,)))
    if fixed_atoms:
        gkey = tuple(k for k in key if any(k.name in {vm[v] for v in p.vars()} for p in fixed_atoms))
        aux2 = b.aux()
        b.emit([PLit(aux2, gkey)], [BodyLit(lit(p, td)) for p in fixed_atoms], REPAIR)
        b.emit(dels, body + [_naf(aux1, key), _naf(aux2, gkey)], REPAIR)
    head = dels + [lit(p, ta) for p in flex_atoms]
    b.emit(head, body + [_naf(aux1, key)] + guard + [ChoiceGoal(key, w)], REPAIR)


def _lav_local_ic(b: _Builder, c: ConstraintAST, final_preds, prime, tss) -> None:
    vm = _var_map(list(c.universal) + list(c.existential))

    def lit(p: Pred):
        args = _terms(p.terms, vm)
        if p.rel in prime:
            return PLit(prime[p.rel], args + (tss,))
        return PLit(final_preds[p.rel], args)

    body = [BodyLit(lit(p)) for p in c.body_atoms] + [_cmp(x, vm) for x in c.body_builtins]
    if not c.head:
        b.emit([], body, REPAIR)
    elif not c.head_atoms:
        for hb in c.head_builtins:
            b.emit([], body + [_cmp(hb.negated(), vm)], REPAIR)
    else:
        head_vars = set().union(*(a.vars() for a in c.head_atoms))
        key = tuple(Var(vm[v]) for v in c.universal if v in head_vars)
        sat = b.aux()
        b.emit([PLit(sat, key)], [BodyLit(lit(p)) for p in c.head_atoms] + [_cmp(x, vm) for x in c.head_builtins], REPAIR)
        b.emit([], body + [_naf(sat, key)], REPAIR)


def strip_choice(program: Program) -> Program:
    """The program with its choice goals removed (used for the HCF test)."""
    return program.with_rules(
        Rule(r.head, tuple(e for e in r.body if not isinstance(e, ChoiceGoal)), r.layer) for r in program.rules
    )
