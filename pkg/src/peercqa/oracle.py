"""Brute-force repairs and direct-case solutions.

Repairs are found by depth-first branching on the first violated ground
instance of a constraint: every way of fixing that instance (delete one
flexible body atom, or insert the missing head atoms for one admissible
witness) opens a branch.  Every minimal repair lies on some branch, so keeping
the ``<=``-minimal leaves gives exactly the minimal repairs.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .errors import SearchCapExceeded, UnsupportedError
from .lang import UNSUPPORTED, Cmp, ConstraintAST, Const, Pred, Var, classify_dec
from .relational import Atom, Instance, active_domain, minimal_instances
from .system import LESS, System
from .trust import dec_level, neighborhood

MATCHING_FIXED = "matching-fixed-tuples"
ACTIVE_DOMAIN = "active-domain"

Binding = dict[str, str]


# ---------------------------------------------------------------- matching


def _value(t, theta: Binding):
    return t.value if isinstance(t, Const) else theta.get(t.name)


def _holds(c: Cmp, theta: Binding) -> bool:
    l, r = _value(c.left, theta), _value(c.right, theta)
    return (l == r) if c.op == "=" else (l != r)


def _ground(p: Pred, theta: Binding) -> Atom:
    return Atom(p.rel, tuple(_value(t, theta) for t in p.terms))


def match(atoms: Iterable[Pred], index: dict[str, set[tuple]], theta: Binding) -> Iterator[Binding]:
    """All extensions of ``theta`` making every pattern in ``atoms`` true in ``index``."""
    atoms = list(atoms)
    if not atoms:
        yield theta
        return
    first, rest = atoms[0], atoms[1:]
    for row in sorted(index.get(first.rel, ())):
        ext = dict(theta)
        ok = True
        for t, v in zip(first.terms, row):
            if isinstance(t, Const):
                ok = t.value == v
            elif t.name in ext:
                ok = ext[t.name] == v
            else:
                ext[t.name] = v
            if not ok:
                break
        if ok:
            yield from match(rest, index, ext)


def index_atoms(atoms: Iterable[Atom]) -> dict[str, set[tuple]]:
    idx: dict[str, set[tuple]] = {}
    for a in atoms:
        idx.setdefault(a.rel, set()).add(a.args)
    return idx


def body_bindings(c: ConstraintAST, index) -> Iterator[Binding]:
    for theta in match(c.body_atoms, index, {}):
        if all(_holds(b, theta) for b in c.body_builtins):
            yield theta


def head_satisfied(c: ConstraintAST, theta: Binding, index) -> bool:
    if not c.head:
        return False
    for ext in match(c.head_atoms, index, theta):
        if all(_holds(b, ext) for b in c.head_builtins):
            return True
    return False


def violations(c: ConstraintAST, atoms: Iterable[Atom]) -> list[Binding]:
    idx = index_atoms(atoms)
    return [theta for theta in body_bindings(c, idx) if not head_satisfied(c, theta, idx)]


def satisfies(atoms: Iterable[Atom], constraints: Iterable[ConstraintAST]) -> bool:
    idx = index_atoms(atoms)
    for c in constraints:
        for theta in body_bindings(c, idx):
            if not head_satisfied(c, theta, idx):
                return False
    return True


# ---------------------------------------------------------------- repairs


@dataclass(frozen=True)
class RepairProblem:
    base: Instance
    constraints: tuple[ConstraintAST, ...]
    flexible: frozenset[str]
    domain: frozenset[str] = frozenset()
    max_new_atoms: int | None = None
    fixed: frozenset[str] = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "constraints", tuple(self.constraints))
        object.__setattr__(self, "flexible", frozenset(self.flexible))
        if self.fixed is None:
            object.__setattr__(self, "fixed", self.base.relation_names - self.flexible)
        if self.flexible & self.fixed:
            raise ValueError("a relation cannot be both fixed and flexible")
        if not self.domain:
            consts = set().union(*(c.constants() for c in self.constraints)) if self.constraints else set()
            object.__setattr__(self, "domain", active_domain([self.base], consts))

    def witness_policy(self, c: ConstraintAST) -> str:
        ex = set(c.existential)
        if any(a.rel in self.fixed and a.vars() & ex for a in c.head_atoms):
            return MATCHING_FIXED
        return ACTIVE_DOMAIN

    def default_cap(self) -> int:
        arities = {r.name: r.arity for r in self.base.schema}
        heads = {a.rel for c in self.constraints for a in c.head_atoms if a.rel in self.flexible}
        return sum(len(self.domain) ** arities[r] for r in heads)


def witnesses(p: RepairProblem, c: ConstraintAST, theta: Binding) -> list[Binding]:
    """Admissible values for the existential variables under ``theta``."""
    if not c.existential:
        return [theta]
    fixed_atoms = [a for a in c.head_atoms if a.rel in p.fixed]
    idx = index_atoms(a for a in p.base.atoms if a.rel in p.fixed)
    out = []
    for ext in match(fixed_atoms, idx, theta):
        free = [v for v in c.existential if v not in ext]
        for combo in itertools.product(sorted(p.domain), repeat=len(free)):
            full = dict(ext)
            full.update(zip(free, combo))
            out.append(full)
    return out


def _options(p: RepairProblem, c: ConstraintAST, theta: Binding, deleted, inserted, current) -> list:
    opts = []
    for b in c.body_atoms:
        a = _ground(b, theta)
        if b.rel in p.flexible and a not in inserted:
            opts.append(("-", frozenset([a])))
    if c.head_atoms:
        seen = set()
        for ext in witnesses(p, c, theta):
            if not all(_holds(b, ext) for b in c.head_builtins):
                continue
            missing = frozenset(_ground(h, ext) for h in c.head_atoms) - current
            if not missing or missing in seen:
                continue
            if all(a.rel in p.flexible and a not in deleted for a in missing):
                seen.add(missing)
                opts.append(("+", missing))
    return opts


def repairs(p: RepairProblem) -> list[Instance]:
    for c in p.constraints:
        if classify_dec(c) == UNSUPPORTED:
            raise UnsupportedError(f"unsupported constraint: {c}")
    cap = p.default_cap() if p.max_new_atoms is None else p.max_new_atoms
    base = p.base.atoms
    leaves: list[frozenset[Atom]] = []
    seen: set[tuple[frozenset, frozenset]] = set()
    over_cap = []

    def first_violation(current):
        idx = index_atoms(current)
        for c in p.constraints:
            for theta in body_bindings(c, idx):
                if not head_satisfied(c, theta, idx):
                    return c, theta
        return None

    found_deltas: list[tuple[frozenset, frozenset]] = []

    def search(deleted: frozenset, inserted: frozenset):
        key = (deleted, inserted)
        if key in seen:
            return
        seen.add(key)
        # change sets only grow along a branch, so a branch that already
        # contains a found repair's changes cannot lead to a minimal one
        if any(d <= deleted and i <= inserted for d, i in found_deltas):
            return
        current = (base - deleted) | inserted
        found = first_violation(current)
        if found is None:
            leaves.append(current)
            found_deltas.append(key)
            return
        c, theta = found
        for kind, atoms in _options(p, c, theta, deleted, inserted, current):
            if kind == "-":
                search(deleted | atoms, inserted)
            elif len(inserted) + len(atoms) > cap:
                over_cap.append(atoms)
            else:
                search(deleted, inserted | atoms)

    search(frozenset(), frozenset())
    if over_cap:
        raise SearchCapExceeded(
            f"repair search needs more than {cap} inserted atoms; raise max-new-atoms to explore further"
        )
    return minimal_instances(p.base, (p.base.with_atoms(l) for l in leaves))


# ---------------------------------------------------------------- solutions


@dataclass(frozen=True)
class Stage:
    constraints: tuple[ConstraintAST, ...]
    flexible: frozenset[str]


@dataclass(frozen=True)
class StagePlan:
    """Two-stage prioritised repair for one peer (direct case)."""

    peer: str
    stages: tuple[Stage, ...]
    local_ics: tuple[ConstraintAST, ...]
    domain: frozenset[str]
    warnings: tuple[str, ...] = ()


def repair_domain(system: System) -> frozenset[str]:
    consts = set()
    for d in system.decs:
        consts |= d.ast.constants()
    for peer in system.peers:
        for ic in peer.ics:
            consts |= ic.constants()
    return active_domain([system.global_instance()], consts)


def stage_plan(system: System, peer: str, exclude=frozenset()) -> StagePlan:
    nb = neighborhood(system, peer)
    own = system.peer(peer).relation_names
    less_decs, same_decs = [], []
    for d in system.decs_of(peer):
        if d in exclude:
            continue
        (less_decs if dec_level(system, peer, d.target) == LESS else same_decs).append(d.ast)
    for c in less_decs + same_decs:
        if classify_dec(c) == UNSUPPORTED:
            raise UnsupportedError(f"unsupported DEC for {peer}: {c}")
    stages = []
    if less_decs:
        rels = set().union(*(c.relations() for c in less_decs))
        stages.append(Stage(tuple(less_decs), frozenset(rels & own)))
    if same_decs:
        cons = tuple(same_decs + less_decs)
        rels = set().union(*(c.relations() for c in cons))
        same_rels = set().union(*(system.peer(q).relation_names for q in nb.same))
        stages.append(Stage(cons, frozenset(rels & (own | same_rels))))
    ics = system.peer(peer).ics
    for ic in ics:
        if classify_dec(ic) == UNSUPPORTED:
            raise UnsupportedError(f"unsupported local IC for {peer}: {ic}")
    return StagePlan(peer, tuple(stages), tuple(ics), repair_domain(system), tuple(nb.warnings()))


@dataclass(frozen=True)
class SolutionSet:
    solutions: tuple[Instance, ...]
    stage1_repairs: tuple[Instance, ...] = ()
    warnings: tuple[str, ...] = ()

    @property
    def inconsistent(self) -> bool:
        return not self.solutions

    def __len__(self):
        return len(self.solutions)

    def __iter__(self):
        return iter(self.solutions)

    def atom_sets(self) -> set[frozenset[Atom]]:
        return {s.atoms for s in self.solutions}


def canonical(instances: Iterable[Instance]) -> tuple[Instance, ...]:
    unique = {i.atoms: i for i in instances}
    return tuple(sorted(unique.values(), key=lambda i: i.sorted_atoms()))


def solutions_direct(system: System, peer: str, max_new_atoms: int | None = None, threads: int = 1) -> SolutionSet:
    plan = stage_plan(system, peer)
    current = [system.global_instance()]
    history = []
    for stage in plan.stages:

        def step(base: Instance, stage=stage) -> list[Instance]:
            problem = RepairProblem(base, stage.constraints, stage.flexible, plan.domain, max_new_atoms)
            return repairs(problem)

        if threads > 1 and len(current) > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                results = list(pool.map(step, current))
        else:
            results = [step(b) for b in current]
        current = list(canonical(r for rs in results for r in rs))
        history.append(tuple(current))
    final = [s for s in current if satisfies(s.atoms, plan.local_ics)]
    stage1 = history[0] if history else ()
    return SolutionSet(canonical(final), stage1, plan.warnings)


def solutions_transitive(system: System, peer: str, max_new_atoms: int | None = None, threads: int = 1) -> SolutionSet:
    """Compose the direct repairs of every peer reachable from ``peer``, downstream first.

    Each peer repairs the instances produced by the peers it depends on, which
    is the sequential reading of the combined program.
    """
    from .compiler import transitive_order

    order, back, warnings = transitive_order(system, peer)
    current = [system.global_instance()]
    domain = repair_domain(system)
    for q in order:
        plan = stage_plan(system, q, back)
        for w in plan.warnings:
            if w not in warnings:
                warnings.append(w)
        for stage in plan.stages:

            def step(base: Instance, stage=stage) -> list[Instance]:
                return repairs(RepairProblem(base, stage.constraints, stage.flexible, domain, max_new_atoms))

            if threads > 1 and len(current) > 1:
                with ThreadPoolExecutor(max_workers=threads) as pool:
                    results = list(pool.map(step, current))
            else:
                results = [step(b) for b in current]
            current = list(canonical(r for rs in results for r in rs))
        current = [s for s in current if satisfies(s.atoms, plan.local_ics)]
    return SolutionSet(canonical(current), (), tuple(warnings))
