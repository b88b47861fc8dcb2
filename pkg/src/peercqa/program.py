"""Extended disjunctive programs: AST, text syntax and rendering.

Syntax::

    rule  := head (":-" body)? "." | ":-" body "."
    head  := lit ("v" lit)*
    lit   := "-"? IDENT "(" term ("," term)* ")"
    belem := "not"? lit | term "=" term | term "!=" term | "choice((" vars ")," var ")"

Variables start with an uppercase letter, constants with a lowercase letter (or
are numbers / quoted strings).  ``%`` starts a comment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Union

from .errors import ParseError, ValidationError
from .lang import Cmp, Const, Var

Term = Union[Var, Const]


@dataclass(frozen=True, order=True)
class PLit:
    pred: str
    args: tuple[Term, ...] = ()
    neg: bool = False  # classical negation

    @property
    def key(self) -> str:
        return ("-" if self.neg else "") + self.pred

    def vars(self) -> set[str]:
        return {t.name for t in self.args if isinstance(t, Var)}

    def is_ground(self) -> bool:
        return all(isinstance(t, Const) for t in self.args)

    def complement(self) -> "PLit":
        return PLit(self.pred, self.args, not self.neg)

    def __str__(self):
        inner = ",".join(render_term(t) for t in self.args)
        return f"{'-' if self.neg else ''}{self.pred}({inner})" if self.args else f"{'-' if self.neg else ''}{self.pred}"


@dataclass(frozen=True)
class BodyLit:
    lit: PLit
    naf: bool = False  # default negation ("not")

    def vars(self) -> set[str]:
        return self.lit.vars()

    def __str__(self):
        return ("not " if self.naf else "") + str(self.lit)


@dataclass(frozen=True)
class ChoiceGoal:
    keys: tuple[Var, ...]
    var: Var

    def __post_init__(self):
        if self.var in self.keys:
            raise ValidationError("the chosen variable cannot also be a key")

    def vars(self) -> set[str]:
        return {k.name for k in self.keys} | {self.var.name}

    def __str__(self):
        return f"choice(({','.join(k.name for k in self.keys)}),{self.var.name})"


BodyElem = Union[BodyLit, Cmp, ChoiceGoal]


def _elem_vars(e: BodyElem) -> set[str]:
    return e.vars()


@dataclass(frozen=True)
class Rule:
    head: tuple[PLit, ...]
    body: tuple[BodyElem, ...] = ()
    layer: str | None = field(default=None, compare=False)

    @property
    def is_denial(self) -> bool:
        return not self.head

    @property
    def is_disjunctive(self) -> bool:
        return len(self.head) > 1

    @property
    def pos(self) -> tuple[PLit, ...]:
        return tuple(e.lit for e in self.body if isinstance(e, BodyLit) and not e.naf)

    @property
    def naf(self) -> tuple[PLit, ...]:
        return tuple(e.lit for e in self.body if isinstance(e, BodyLit) and e.naf)

    @property
    def builtins(self) -> tuple[Cmp, ...]:
        return tuple(e for e in self.body if isinstance(e, Cmp))

    @property
    def choices(self) -> tuple[ChoiceGoal, ...]:
        return tuple(e for e in self.body if isinstance(e, ChoiceGoal))

    def unsafe_vars(self) -> set[str]:
        bound = set().union(*(l.vars() for l in self.pos)) if self.pos else set()
        used = set().union(*(h.vars() for h in self.head)) if self.head else set()
        for e in self.body:
            if not (isinstance(e, BodyLit) and not e.naf):
                used |= _elem_vars(e)
        return used - bound

    def is_range_restricted(self) -> bool:
        return not self.unsafe_vars()

    def __str__(self):
        head = " v ".join(map(str, self.head))
        if not self.body:
            return head + "."
        body = ", ".join(map(render_elem, self.body))
        return f"{head} :- {body}." if head else f":- {body}."


@dataclass(frozen=True)
class Program:
    rules: tuple[Rule, ...] = ()
    facts: frozenset[PLit] = frozenset()
    name: str = "program"

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple(self.rules))
        object.__setattr__(self, "facts", frozenset(self.facts))
        for f in self.facts:
            if not f.is_ground():
                raise ValidationError(f"fact {f} is not ground")

    def with_rules(self, rules: Iterable[Rule]) -> "Program":
        return Program(tuple(rules), self.facts, self.name)

    def extend(self, rules: Iterable[Rule] = (), facts: Iterable[PLit] = ()) -> "Program":
        return Program(self.rules + tuple(rules), self.facts | frozenset(facts), self.name)

    @property
    def layers(self) -> dict[str, list[Rule]]:
        out: dict[str, list[Rule]] = {}
        for r in self.rules:
            if r.layer:
                out.setdefault(r.layer, []).append(r)
        return out

    def predicates(self) -> set[str]:
        preds = {f.key for f in self.facts}
        for r in self.rules:
            preds |= {h.key for h in r.head}
            preds |= {l.key for l in r.pos + r.naf}
        return preds

    def unsafe_rules(self) -> list[Rule]:
        return [r for r in self.rules if not r.is_range_restricted()]

    def __str__(self):
        return render_program(self)


# ---------------------------------------------------------------- rendering

_PLAIN_CONST = re.compile(r"[a-z][A-Za-z0-9_]*|-?\d+")


def render_term(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if _PLAIN_CONST.fullmatch(t.value) and t.value not in ("not", "v", "choice"):
        return t.value
    return '"' + t.value.replace("\\", "\\\\").replace('"', '\\"') + '"'


def render_elem(e: BodyElem) -> str:
    if isinstance(e, Cmp):
        return f"{render_term(e.left)} {e.op} {render_term(e.right)}"
    return str(e)


def render_program(p: Program) -> str:
    lines = [f"{f}." for f in sorted(p.facts, key=lambda f: (f.pred, f.neg, [render_term(a) for a in f.args]))]
    layer = None
    for r in p.rules:
        if r.layer != layer and r.layer:
            lines.append(f"% layer: {r.layer}")
        layer = r.layer
        lines.append(str(r))
    return "\n".join(lines) + ("\n" if lines else "")


# ---------------------------------------------------------------- parsing

_TOK = re.compile(
    r"""
    (?P<ws>\s+) |
    (?P<comment>%[^\n]*) |
    (?P<string>"(?:[^"\\]|\\.)*") |
    (?P<number>\d+) |
    (?P<ident>[A-Za-z_][A-Za-z0-9_]*) |
    (?P<op>:-|!=|[(),.=-])
    """,
    re.VERBOSE,
)


class _ProgParser:
    def __init__(self, text: str):
        self.toks = []
        pos, line, ls = 0, 1, 0
        while pos < len(text):
            m = _TOK.match(text, pos)
            if not m:
                raise ParseError(f"unexpected character {text[pos]!r}", line, pos - ls + 1)
            kind, val = m.lastgroup, m.group()
            if kind not in ("ws", "comment"):
                if kind == "string":
                    val = re.sub(r"\\(.)", r"\1", val[1:-1])
                self.toks.append((kind, val, line, pos - ls + 1))
            nl = m.group().count("\n")
            if nl:
                line += nl
                ls = pos + m.group().rfind("\n") + 1
            pos = m.end()
        self.toks.append(("eof", "", line, pos - ls + 1))
        self.i = 0

    @property
    def tok(self):
        return self.toks[self.i]

    def error(self, msg):
        kind, val, line, col = self.tok
        raise ParseError(f"{msg} (found {val or 'end of input'!r})", line, col)

    def at(self, val, kind=None):
        k, v = self.tok[0], self.tok[1]
        return v == val and k in ((kind,) if kind else ("op", "ident"))

    def accept(self, val):
        if self.at(val):
            self.i += 1
            return True
        return False

    def expect(self, val):
        if not self.accept(val):
            self.error(f"expected {val!r}")

    def term(self) -> Term:
        kind, val = self.tok[0], self.tok[1]
        if kind == "ident":
            self.i += 1
            return Var(val) if (val[0].isupper() or val[0] == "_") else Const(val)
        if kind in ("number", "string"):
            self.i += 1
            return Const(val)
        if self.at("-") and self.toks[self.i + 1][0] == "number":
            self.i += 2
            return Const("-" + self.toks[self.i - 1][1])
        self.error("expected a term")

    def lit(self) -> PLit:
        neg = self.accept("-")
        kind, val = self.tok[0], self.tok[1]
        if kind != "ident" or val[0].isupper():
            self.error("expected a predicate name")
        self.i += 1
        args = []
        if self.accept("("):
            args.append(self.term())
            while self.accept(","):
                args.append(self.term())
            self.expect(")")
        return PLit(val, tuple(args), neg)

    def body_elem(self) -> BodyElem:
        if self.at("not", "ident") and self.toks[self.i + 1][1] not in ("(", ",", ".", "=", "!="):
            self.i += 1
            return BodyLit(self.lit(), naf=True)
        if self.at("choice", "ident") and self.toks[self.i + 1][1] == "(" and self.toks[self.i + 2][1] == "(":
            self.i += 3
            keys = []
            if not self.at(")"):
                keys.append(self.term())
                while self.accept(","):
                    keys.append(self.term())
            self.expect(")")
            self.expect(",")
            var = self.term()
            self.expect(")")
            if not all(isinstance(k, Var) for k in keys + [var]):
                self.error("choice goals take variables only")
            if var in keys:
                self.error("the chosen variable cannot also be a key")
            return ChoiceGoal(tuple(keys), var)
        kind, val = self.tok[0], self.tok[1]
        is_term_start = (kind == "ident" and (val[0].isupper() or val[0] == "_")) or kind in ("number", "string")
        nxt = self.toks[self.i + 1][1]
        if is_term_start or (kind == "ident" and nxt in ("=", "!=")):
            left = self.term()
            if self.accept("="):
                return Cmp("=", left, self.term())
            if self.accept("!="):
                return Cmp("!=", left, self.term())
            self.error("expected '=' or '!='")
        return BodyLit(self.lit())

    def rule(self) -> Rule:
        head = []
        if not self.at(":-"):
            head.append(self.lit())
            while self.at("v", "ident"):
                self.i += 1
                head.append(self.lit())
        body = []
        if self.accept(":-"):
            body.append(self.body_elem())
            while self.accept(","):
                body.append(self.body_elem())
        self.expect(".")
        return Rule(tuple(head), tuple(body))


def parse_program(text: str, name: str = "program") -> Program:
    p = _ProgParser(text)
    rules, facts = [], set()
    while p.tok[0] != "eof":
        start = p.tok
        r = p.rule()
        if not r.body and len(r.head) == 1 and r.head[0].is_ground():
            facts.add(r.head[0])
        else:
            if not r.is_range_restricted():
                raise ParseError(
                    f"rule is not range-restricted (variables {', '.join(sorted(r.unsafe_vars()))})", start[2], start[3]
                )
            rules.append(r)
    return Program(tuple(rules), frozenset(facts), name)
