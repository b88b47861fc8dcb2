"""Grounding and answer-set enumeration for extended disjunctive programs.

Classical negation ``-p`` is handled as a separate predicate plus a coherence
denial ``:- p(t), -p(t)``.  Choice goals are unfolded first.

Candidates are the supported models of the ground program, enumerated by a
DPLL search with watched literals over rule and support clauses.  Each
candidate ``M`` is kept only if it is a minimal model of the reduct ``P^M``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

from .errors import ValidationError
from .lang import Const
from .oracle import SolutionSet, canonical
from .program import PLit, Program, Rule
from .relational import Atom, Instance
from .transforms import unfold_choice

GAtom = tuple[str, tuple[str, ...]]  # (key, args); key carries "-" for classical negation


def _to_gatom(l: PLit) -> GAtom:
    return (l.key, tuple(a.value for a in l.args))


def to_plit(a: GAtom) -> PLit:
    key, args = a
    neg = key.startswith("-")
    return PLit(key[1:] if neg else key, tuple(Const(v) for v in args), neg)


# ---------------------------------------------------------------- grounding


@dataclass(frozen=True)
class GroundRule:
    head: tuple[int, ...]
    pos: tuple[int, ...]
    neg: tuple[int, ...]


@dataclass
class GroundProgram:
    atoms: list[GAtom]  # id -> atom (ids start at 1)
    facts: frozenset[GAtom]
    rules: list[GroundRule]
    inconsistent: bool = False  # a denial with an always-true body

    def atom(self, i: int) -> GAtom:
        return self.atoms[i - 1]


def _bind(pattern: tuple, row: tuple, theta: dict) -> dict | None:
    ext = theta
    for t, v in zip(pattern, row):
        if isinstance(t, Const):
            if t.value != v:
                return None
        else:
            cur = ext.get(t.name)
            if cur is None:
                if ext is theta:
                    ext = dict(theta)
                ext[t.name] = v
            elif cur != v:
                return None
    return ext


def _val(t, theta):
    return t.value if isinstance(t, Const) else theta[t.name]


def _instances(rule: Rule, index: dict[str, dict]) -> Iterator[dict]:
    pos = list(rule.pos)
    builtins = list(rule.builtins)

    def go(i, theta):
        if i == len(pos):
            if all((_val(b.left, theta) == _val(b.right, theta)) == (b.op == "=") for b in builtins):
                yield theta
            return
        lit = pos[i]
        rows = index.get(lit.key)
        if not rows:
            return
        # use the first argument as a lookup key when it is already bound
        first = lit.args[0] if lit.args else None
        if first is not None and (isinstance(first, Const) or first.name in theta):
            cands = rows["by_first"].get(_val(first, theta), ())
        else:
            cands = rows["all"]
        for row in cands:
            ext = _bind(lit.args, row, theta)
            if ext is not None:
                yield from go(i + 1, ext)

    yield from go(0, {})


def _ground_lit(l: PLit, theta: dict) -> GAtom:
    return (l.key, tuple(_val(t, theta) for t in l.args))


class _Index:
    def __init__(self):
        self.data: dict[str, dict] = {}
        self.members: set[GAtom] = set()

    def add(self, a: GAtom) -> bool:
        if a in self.members:
            return False
        self.members.add(a)
        d = self.data.setdefault(a[0], {"all": [], "by_first": {}})
        d["all"].append(a[1])
        if a[1]:
            d["by_first"].setdefault(a[1][0], []).append(a[1])
        return True


def ground(program: Program) -> GroundProgram:
    """Instantiate ``program`` over an over-approximation of its derivable atoms."""
    if program.unsafe_rules():
        bad = program.unsafe_rules()[0]
        raise ValidationError(f"rule is not range-restricted: {bad}")
    if any(r.choices for r in program.rules):
        program = unfold_choice(program)
    facts = frozenset(_to_gatom(f) for f in program.facts)
    possible = _Index()
    for f in facts:
        possible.add(f)
    changed = True
    while changed:
        changed = False
        for r in program.rules:
            if not r.head:
                continue
            for theta in list(_instances(r, possible.data)):
                for h in r.head:
                    if possible.add(_ground_lit(h, theta)):
                        changed = True

    ids: dict[GAtom, int] = {}
    atoms: list[GAtom] = []

    def aid(a: GAtom) -> int:
        i = ids.get(a)
        if i is None:
            atoms.append(a)
            i = ids[a] = len(atoms)
        return i

    rules: set[GroundRule] = set()
    inconsistent = False

    def emit(head, pos, neg):
        nonlocal inconsistent
        if any(h in facts for h in head):
            return
        if any(n in facts for n in neg):
            return
        pos = [p for p in pos if p not in facts]
        neg = [n for n in neg if n in possible.members]
        if not head and not pos and not neg:
            inconsistent = True
            return
        rules.add(
            GroundRule(
                tuple(sorted({aid(h) for h in head})),
                tuple(sorted({aid(p) for p in pos})),
                tuple(sorted({aid(n) for n in neg})),
            )
        )

    for r in program.rules:
        for theta in _instances(r, possible.data):
            emit(
                [_ground_lit(h, theta) for h in r.head],
                [_ground_lit(p, theta) for p in r.pos],
                [_ground_lit(n, theta) for n in r.naf],
            )
    for key, args in list(possible.members):
        if key.startswith("-") and (key[1:], args) in possible.members:
            emit([], [(key[1:], args), (key, args)], [])
    return GroundProgram(atoms, facts, sorted(rules, key=lambda g: (g.head, g.pos, g.neg)), inconsistent)


# ---------------------------------------------------------------- SAT core


class _Solver:
    """DPLL with two watched literals that enumerates every total model."""

    def __init__(self, nvars: int, clauses: Iterable[list[int]], branch_order: list[int]):
        self.n = nvars
        self.val = [None] * (nvars + 1)
        self.watches: dict[int, list[int]] = {}
        self.clauses: list[list[int]] = []
        self.trail: list[int] = []
        self.limits: list[int] = []
        self.qhead = 0
        first = set(branch_order)
        self.order = branch_order + [v for v in range(1, nvars + 1) if v not in first]
        self.ok = True
        units = []
        for c in clauses:
            c = list(dict.fromkeys(c))
            if any(-l in c for l in c):
                continue
            if not c:
                self.ok = False
                return
            if len(c) == 1:
                units.append(c[0])
                continue
            ci = len(self.clauses)
            self.clauses.append(c)
            self.watches.setdefault(c[0], []).append(ci)
            self.watches.setdefault(c[1], []).append(ci)
        for u in units:
            v = self.value(u)
            if v is False:
                self.ok = False
                return
            if v is None:
                self.assign(u)

    def value(self, lit: int):
        v = self.val[abs(lit)]
        if v is None:
            return None
        return v if lit > 0 else not v

    def assign(self, lit: int):
        self.val[abs(lit)] = lit > 0
        self.trail.append(lit)

    def propagate(self) -> bool:
        while self.qhead < len(self.trail):
            false_lit = -self.trail[self.qhead]
            self.qhead += 1
            ws = self.watches.get(false_lit, [])
            keep = []
            i = 0
            conflict = False
            while i < len(ws):
                ci = ws[i]
                i += 1
                c = self.clauses[ci]
                if c[0] == false_lit:
                    c[0], c[1] = c[1], c[0]
                if self.value(c[0]) is True:
                    keep.append(ci)
                    continue
                for k in range(2, len(c)):
                    if self.value(c[k]) is not False:
                        c[1], c[k] = c[k], c[1]
                        self.watches.setdefault(c[1], []).append(ci)
                        break
                else:
                    keep.append(ci)
                    if self.value(c[0]) is False:
                        conflict = True
                        keep.extend(ws[i:])
                        break
                    self.assign(c[0])
            self.watches[false_lit] = keep
            if conflict:
                return False
        return True

    def backtrack(self, level: int):
        if level < len(self.limits):
            mark = self.limits[level]
            for lit in self.trail[mark:]:
                self.val[abs(lit)] = None
            del self.trail[mark:]
            del self.limits[level:]
            self.qhead = len(self.trail)

    def decide(self, lit: int) -> bool:
        self.limits.append(len(self.trail))
        self.assign(lit)
        return self.propagate()

    def models(self) -> Iterator[list]:
        if not self.ok or not self.propagate():
            return
        decisions: list[tuple[int, bool]] = []
        pos = 0
        while True:
            var = None
            while pos < len(self.order):
                if self.val[self.order[pos]] is None:
                    var = self.order[pos]
                    break
                pos += 1
            if var is None:
                yield self.val
                conflict = True
            else:
                decisions.append((-var, False))
                conflict = not self.decide(-var)
            while conflict:
                while decisions and decisions[-1][1]:
                    decisions.pop()
                if not decisions:
                    return
                lit, _ = decisions.pop()
                self.backtrack(len(decisions))
                pos = 0
                decisions.append((-lit, True))
                conflict = not self.decide(-lit)


def _first_model(nvars, clauses, order) -> list | None:
    for m in _Solver(nvars, clauses, order).models():
        return list(m)
    return None


# ---------------------------------------------------------------- stable models


def _encode(gp: GroundProgram) -> tuple[int, list[list[int]]]:
    n = len(gp.atoms)
    clauses: list[list[int]] = []
    support: dict[int, list[int]] = {a: [] for a in range(1, n + 1)}
    nxt = n

    def new():
        nonlocal nxt
        nxt += 1
        return nxt

    def conj(lits: list[int]) -> int:
        b = new()
        clauses.append([b] + [-l for l in lits])
        for l in lits:
            clauses.append([-b, l])
        return b

    for r in gp.rules:
        body = list(r.pos) + [-x for x in r.neg]
        clauses.append(list(r.head) + [-l for l in body])
        if not r.head:
            continue
        if len(r.head) == 1:
            support[r.head[0]].append(conj(body) if body else None)
        else:
            for h in r.head:
                support[h].append(conj(body + [-o for o in r.head if o != h]))
    for a, sups in support.items():
        if None in sups:
            continue
        clauses.append([-a] + sups)
    return nxt, clauses


def reduct(gp: GroundProgram, interpretation: Iterable[PLit]) -> GroundProgram:
    """Drop rules blocked by ``interpretation`` and the remaining ``not`` literals."""
    true = {_to_gatom(l) for l in interpretation}
    rules = [
        GroundRule(r.head, r.pos, ())
        for r in gp.rules
        if not any(gp.atom(n) in true for n in r.neg)
    ]
    return GroundProgram(list(gp.atoms), gp.facts, rules, gp.inconsistent)


def minimal_models_positive(gp: GroundProgram) -> list[frozenset[PLit]]:
    """Minimal models of a program without ``not`` (small programs only)."""
    if any(r.neg for r in gp.rules):
        raise ValueError("program still contains default negation")
    if gp.inconsistent:
        return []
    n = len(gp.atoms)
    clauses = [list(r.head) + [-p for p in r.pos] for r in gp.rules]
    models = []
    for val in _Solver(n, clauses, list(range(1, n + 1))).models():
        m = {a for a in range(1, n + 1) if val[a]}
        if is_minimal_model_of_reduct(gp, m):
            models.append(frozenset(to_plit(x) for x in gp.facts | {gp.atom(a) for a in m}))
    return models


def _reduct_clauses(gp: GroundProgram, model: set[int]) -> list[list[int]]:
    out = []
    for r in gp.rules:
        if any(x in model for x in r.neg) or not all(p in model for p in r.pos):
            continue
        out.append([h for h in r.head if h in model] + [-p for p in r.pos])
    return out


def is_minimal_model_of_reduct(gp: GroundProgram, model: set[int]) -> bool:
    red = _reduct_clauses(gp, model)
    # atoms forced by single-head rules form a lower bound of any smaller model
    forced: set[int] = set()
    changed = True
    while changed:
        changed = False
        for c in red:
            heads = [l for l in c if l > 0]
            if len(heads) == 1 and heads[0] not in forced and all(-l in forced for l in c if l < 0):
                forced.add(heads[0])
                changed = True
    if forced >= model:
        return True
    # search for a strictly smaller model of the reduct inside ``model``
    ids = sorted(model)
    ren = {a: i + 1 for i, a in enumerate(ids)}
    cl = [[(ren[l] if l > 0 else -ren[-l]) for l in c] for c in red]
    cl.append([-ren[a] for a in ids])
    cl.extend([[ren[a]] for a in forced])
    return _first_model(len(ids), cl, list(range(1, len(ids) + 1))) is None


AnswerSet = frozenset[PLit]


def _answer_sets_ground(gp: GroundProgram, limit: int | None = None) -> Iterator[frozenset[GAtom]]:
    if gp.inconsistent:
        return
    nvars, clauses = _encode(gp)
    solver = _Solver(nvars, clauses, list(range(1, len(gp.atoms) + 1)))
    count = 0
    for val in solver.models():
        model = {a for a in range(1, len(gp.atoms) + 1) if val[a]}
        if is_minimal_model_of_reduct(gp, model):
            yield gp.facts | frozenset(gp.atom(a) for a in model)
            count += 1
            if limit is not None and count >= limit:
                return


def answer_sets(program: Program, limit: int | None = None) -> list[AnswerSet]:
    """All answer sets of ``program``, each as a set of ground literals (facts included)."""
    gp = ground(program)
    out = [frozenset(to_plit(a) for a in m) for m in _answer_sets_ground(gp, limit)]
    return sorted(out, key=lambda m: sorted(str(l) for l in m))


def verify_answer_set(program: Program, candidate: Iterable[PLit]) -> bool:
    """Independent check that ``candidate`` is an answer set of ``program``.

    The program is instantiated directly over ``candidate`` (no shared grounding)
    and minimality of the reduct is checked by plain backtracking.
    """
    if any(r.choices for r in program.rules):
        program = unfold_choice(program)
    m = {_to_gatom(l) for l in candidate}
    facts = {_to_gatom(f) for f in program.facts}
    if not facts <= m:
        return False
    if any(k.startswith("-") and (k[1:], args) in m for k, args in m):
        return False
    idx = _Index()
    for a in m:
        idx.add(a)
    reduct = []
    for r in program.rules:
        for theta in _instances(r, idx.data):
            if any(_ground_lit(n, theta) in m for n in r.naf):
                continue
            head = [_ground_lit(h, theta) for h in r.head]
            if not any(h in m for h in head):
                return False
            reduct.append(([h for h in head if h in m], [_ground_lit(p, theta) for p in r.pos]))
    # every atom outside the facts must be needed: look for a proper submodel
    free = sorted(m - facts)

    def holds(x, chosen):
        return True if x in facts else chosen.get(x)

    def search(i: int, chosen: dict, dropped: bool) -> bool:
        for head, pos in reduct:
            if all(holds(p, chosen) is True for p in pos) and all(holds(h, chosen) is False for h in head):
                return False
        if i == len(free):
            return dropped
        a = free[i]
        return search(i + 1, {**chosen, a: False}, True) or search(i + 1, {**chosen, a: True}, dropped)

    return not search(0, {}, False)


def cautious_answers(program: Program, pred: str) -> tuple[set[tuple[str, ...]], int]:
    """Tuples of ``pred`` true in every answer set, and the number of answer sets."""
    gp = ground(program)
    common = None
    n = 0
    for m in _answer_sets_ground(gp):
        n += 1
        rows = {args for key, args in m if key == pred}
        common = rows if common is None else common & rows
    return (common or set()), n


def solutions_from_models(
    models: Iterable[AnswerSet], mapping: dict[str, str], fixed: Instance, annotated: bool = False
) -> SolutionSet:
    """Read one instance off each model.

    ``mapping`` sends each final predicate to its relation; relations outside
    the mapping keep their content from ``fixed``.  With ``annotated`` only
    atoms whose last argument is ``tss`` count, and that argument is dropped.
    """
    targets = set(mapping.values())
    kept = frozenset(a for a in fixed.atoms if a.rel not in targets)
    out = []
    for m in models:
        atoms = set(kept)
        for l in m:
            if l.neg or l.pred not in mapping:
                continue
            args = tuple(a.value for a in l.args)
            if annotated:
                if not args or args[-1] != "tss":
                    continue
                args = args[:-1]
            atoms.add(Atom(mapping[l.pred], args))
        out.append(fixed.with_atoms(frozenset(atoms)))
    return SolutionSet(canonical(out))


def render_answer_set(m: AnswerSet) -> str:
    return "{" + ", ".join(sorted(str(l) for l in m)) + "}"


__all__ = [
    "AnswerSet",
    "GroundProgram",
    "answer_sets",
    "cautious_answers",
    "ground",
    "is_minimal_model_of_reduct",
    "minimal_models_positive",
    "reduct",
    "render_answer_set",
    "solutions_from_models",
    "to_plit",
    "verify_answer_set",
]
