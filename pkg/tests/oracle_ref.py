"""Slow reference implementations used to cross-check the repair search."""

from __future__ import annotations

import itertools

from peercqa.lang import Cmp, Const, Pred
from peercqa.relational import Atom


def _val(t, env):
    return t.value if isinstance(t, Const) else env[t.name]


def _lit(l, env, atoms):
    if isinstance(l, Cmp):
        return (_val(l.left, env) == _val(l.right, env)) == (l.op == "=")
    return Atom(l.rel, tuple(_val(t, env) for t in l.terms)) in atoms


def holds(c, atoms, domain) -> bool:
    """Naive model check over every assignment from ``domain``."""
    dom = sorted(domain)
    for vals in itertools.product(dom, repeat=len(c.universal)):
        env = dict(zip(c.universal, vals))
        if not all(_lit(l, env, atoms) for l in c.body):
            continue
        if not c.head:
            return False
        ok = False
        for ex in itertools.product(dom, repeat=len(c.existential)):
            env2 = {**env, **dict(zip(c.existential, ex))}
            if all(_lit(l, env2, atoms) for l in c.head):
                ok = True
                break
        if not ok:
            return False
    return True


def brute_repairs(base, constraints, flexible, arities, domain):
    """Minimal repairs by enumerating every instance over the flexible universe."""
    universe = sorted(
        Atom(r, args) for r in flexible for args in itertools.product(sorted(domain), repeat=arities[r])
    )
    keep = frozenset(a for a in base if a.rel not in flexible)
    sat = []
    for bits in itertools.product((0, 1), repeat=len(universe)):
        cand = keep | frozenset(a for a, b in zip(universe, bits) if b)
        if all(holds(c, cand, domain) for c in constraints):
            sat.append(cand)
    diffs = {s: s ^ base for s in sat}
    return {s for s in sat if not any(diffs[o] < diffs[s] for o in sat)}
