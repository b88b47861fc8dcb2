"""Source-to-source program transformations: choice unfolding and shifting."""

from __future__ import annotations

from .errors import NotHCFError
from .lang import Cmp, Var
from .program import BodyLit, ChoiceGoal, PLit, Program, Rule


def _fresh(base: str, taken: set[str]) -> str:
    name, n = base, 1
    while name in taken:
        n += 1
        name = f"{base}_{n}"
    taken.add(name)
    return name


def _family(taken: set[str]) -> tuple[str, str]:
    n = 1
    while True:
        suffix = "" if n == 1 else f"_{n}"
        c, d = "chosen" + suffix, "diffchoice" + suffix
        if c not in taken and d not in taken:
            taken |= {c, d}
            return c, d
        n += 1


def unfold_choice(program: Program) -> Program:
    """Replace every ``choice((K),W)`` goal by its stable-model encoding.

    For a rule ``H :- B, choice((K),W)`` this emits::

        chosen(K,W)     :- B, not diffchoice(K,W).
        diffchoice(K,W) :- chosen(K,U), G(W), U != W.
        H               :- B, chosen(K,W).

    where ``G(W)`` are the positive literals of ``B`` mentioning ``W``.
    """
    taken = set(program.predicates())
    out = []
    for r in program.rules:
        goals = r.choices
        if not goals:
            out.append(r)
            continue
        base = tuple(e for e in r.body if not isinstance(e, ChoiceGoal))
        used = set().union(*(e.vars() for e in r.body))
        extra = []
        for g in goals:
            chosen, diff = _family(taken)
            key = g.keys + (g.var,)
            u = Var(_fresh("U", used))
            guard = tuple(BodyLit(l) for l in r.pos if g.var.name in l.vars())
            out.append(Rule((PLit(chosen, key),), base + (BodyLit(PLit(diff, key), naf=True),), r.layer))
            out.append(
                Rule(
                    (PLit(diff, key),),
                    (BodyLit(PLit(chosen, g.keys + (u,))),) + guard + (Cmp("!=", u, g.var),),
                    r.layer,
                )
            )
            extra.append(BodyLit(PLit(chosen, key)))
        out.append(Rule(r.head, base + tuple(extra), r.layer))
    return Program(tuple(out), program.facts, program.name)


def _dependency_graph(program: Program) -> dict[str, set[str]]:
    g: dict[str, set[str]] = {}
    for r in program.rules:
        for h in r.head:
            g.setdefault(h.key, set())
            for b in r.pos:
                g.setdefault(b.key, set()).add(h.key)
    return g


def _sccs(g: dict[str, set[str]]) -> dict[str, int]:
    index, low, comp, stack, on = {}, {}, {}, [], set()
    counter = [0]

    def visit(v):
        # iterative Tarjan
        work = [(v, iter(sorted(g.get(v, ()))))]
        index[v] = low[v] = counter[0]
        counter[0] += 1
        stack.append(v)
        on.add(v)
        while work:
            node, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter[0]
                    counter[0] += 1
                    stack.append(w)
                    on.add(w)
                    work.append((w, iter(sorted(g.get(w, ())))))
                    advanced = True
                    break
                if w in on:
                    low[node] = min(low[node], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                low[work[-1][0]] = min(low[work[-1][0]], low[node])
            if low[node] == index[node]:
                cid = len(set(comp.values()))
                while True:
                    w = stack.pop()
                    on.discard(w)
                    comp[w] = cid
                    if w == node:
                        break

    for v in sorted(g):
        if v not in index:
            visit(v)
    return comp


def _path(g: dict[str, set[str]], src: str, dst: str) -> list[str]:
    prev = {src: None}
    queue = [src]
    while queue:
        v = queue.pop(0)
        for w in sorted(g.get(v, ())):
            if w not in prev:
                prev[w] = v
                queue.append(w)
    out, v = [], dst
    while v is not None:
        out.append(v)
        v = prev.get(v)
    return out[::-1]


def head_cycle(program: Program) -> list[str] | None:
    """A positive cycle through two head predicates of one rule, or None.

    Works on the predicate-level dependency graph, so it may report a cycle
    for a program that is head-cycle free at the ground level.
    """
    g = _dependency_graph(program)
    comp = _sccs(g)
    for r in program.rules:
        keys = [h.key for h in r.head]
        for i, a in enumerate(keys):
            for b in keys[i + 1 :]:
                if comp[a] != comp[b]:
                    continue
                if a != b:
                    return _path(g, a, b)[:-1] + _path(g, b, a)
                if a in g.get(a, ()) or sum(1 for v in comp.values() if v == comp[a]) > 1:
                    return [a, a]
    return None


def is_hcf(program: Program) -> bool:
    return head_cycle(program) is None


def shift_disjunctions(program: Program) -> Program:
    """Shift each disjunctive rule into normal rules; requires head-cycle freedom."""
    cycle = head_cycle(program)
    if cycle is not None:
        raise NotHCFError(cycle)
    out = []
    for r in program.rules:
        if not r.is_disjunctive:
            out.append(r)
            continue
        plain = tuple(e for e in r.body if not isinstance(e, ChoiceGoal))
        for i, h in enumerate(r.head):
            others = tuple(BodyLit(o, naf=True) for j, o in enumerate(r.head) if j != i)
            # choice goals stay last, as in the written form of shifted rules
            out.append(Rule((h,), plain + others + r.choices, r.layer))
    return Program(tuple(out), program.facts, program.name)
