"""Surface language: system files, constraints and first-order queries.

Inside formulas a bare identifier is a variable and a quoted string or a number
is a constant; in ``instance`` lists every argument is a constant.  Constraints
are prenex ``forall ... exists ... (BODY -> HEAD)``; a parenthesised conjunction
without an arrow is read as a denial (``BODY -> false``).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Union

from .errors import ParseError, UnsafeQuery, ValidationError
from .relational import Atom, RelationSymbol
from .system import DEC, LESS, SAME, Peer, System, TrustTriple

# ---------------------------------------------------------------- terms / AST


@dataclass(frozen=True, order=True)
class Var:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True, order=True)
class Const:
    value: str

    def __str__(self):
        return quote_constant(self.value)


Term = Union[Var, Const]


def quote_constant(value: str) -> str:
    return "'" + value.replace("\\", "\\\\").replace("'", "\\'") + "'"


@dataclass(frozen=True)
class Pred:
    rel: str
    terms: tuple[Term, ...]

    def vars(self) -> set[str]:
        return {t.name for t in self.terms if isinstance(t, Var)}

    def __str__(self):
        return f"{self.rel}({','.join(map(str, self.terms))})"


@dataclass(frozen=True)
class Cmp:
    op: str  # "=" or "!="
    left: Term
    right: Term

    def vars(self) -> set[str]:
        return {t.name for t in (self.left, self.right) if isinstance(t, Var)}

    def negated(self) -> "Cmp":
        return Cmp("!=" if self.op == "=" else "=", self.left, self.right)

    def __str__(self):
        return f"{self.left} {self.op} {self.right}"


Literal = Union[Pred, Cmp]


@dataclass(frozen=True)
class Not:
    sub: "Formula"


@dataclass(frozen=True)
class And:
    subs: tuple["Formula", ...]


@dataclass(frozen=True)
class Or:
    subs: tuple["Formula", ...]


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Exists:
    vars: tuple[str, ...]
    sub: "Formula"


@dataclass(frozen=True)
class Forall:
    vars: tuple[str, ...]
    sub: "Formula"


Formula = Union[Pred, Cmp, Not, And, Or, Implies, Exists, Forall]


@dataclass(frozen=True)
class ConstraintAST:
    universal: tuple[str, ...]
    existential: tuple[str, ...]
    body: tuple[Literal, ...]
    head: tuple[Literal, ...]  # empty head means "false"
    owner: tuple[str, str] | str | None = None

    def relations(self) -> frozenset[str]:
        return frozenset(l.rel for l in self.body + self.head if isinstance(l, Pred))

    @property
    def body_atoms(self) -> tuple[Pred, ...]:
        return tuple(l for l in self.body if isinstance(l, Pred))

    @property
    def body_builtins(self) -> tuple[Cmp, ...]:
        return tuple(l for l in self.body if isinstance(l, Cmp))

    @property
    def head_atoms(self) -> tuple[Pred, ...]:
        return tuple(l for l in self.head if isinstance(l, Pred))

    @property
    def head_builtins(self) -> tuple[Cmp, ...]:
        return tuple(l for l in self.head if isinstance(l, Cmp))

    def constants(self) -> frozenset[str]:
        out = set()
        for l in self.body + self.head:
            terms = l.terms if isinstance(l, Pred) else (l.left, l.right)
            out.update(t.value for t in terms if isinstance(t, Const))
        return frozenset(out)

    def __str__(self):
        return render_constraint(self)


@dataclass(frozen=True)
class QueryAST:
    name: str
    head_vars: tuple[str, ...]
    formula: Formula

    def relations(self) -> frozenset[str]:
        return formula_relations(self.formula)

    def __str__(self):
        return render_query(self)


# ---------------------------------------------------------------- tokenizer

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+) |
    (?P<nl>\n) |
    (?P<comment>\#[^\n]*) |
    (?P<string>'(?:[^'\\]|\\.)*'|"(?:[^"\\]|\\.)*") |
    (?P<number>-?\d+(?:\.\d+)?) |
    (?P<ident>[A-Za-z_][A-Za-z0-9_]*) |
    (?P<op>:=|->|!=|[(){},;/&|~=:])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # ident | string | number | op | eof
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        col = pos - line_start + 1
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind in ("ws", "comment"):
            pass
        elif kind == "string":
            raw = m.group()[1:-1]
            tokens.append(Token("string", re.sub(r"\\(.)", r"\1", raw), line, col))
        else:
            tokens.append(Token(kind, m.group(), line, col))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, msg: str, tok: Token | None = None):
        tok = tok or self.tok
        found = tok.text or "end of input"
        raise ParseError(f"{msg} (found {found!r})", tok.line, tok.col)

    def at(self, *texts: str) -> bool:
        return self.tok.kind in ("op", "ident") and self.tok.text in texts

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.error(f"expected {text!r}")
        tok = self.tok
        self.i += 1
        return tok

    def ident(self, what: str = "identifier") -> Token:
        if self.tok.kind != "ident":
            self.error(f"expected {what}")
        tok = self.tok
        self.i += 1
        return tok

    def constant(self) -> str:
        if self.tok.kind not in ("ident", "string", "number"):
            self.error("expected a constant")
        tok = self.tok
        self.i += 1
        return tok.text

    def var_list(self) -> list[str]:
        out = [self.ident("variable").text]
        while self.accept(","):
            out.append(self.ident("variable").text)
        return out

    # -- formula pieces shared by constraints and queries

    def term(self) -> Term:
        tok = self.tok
        if tok.kind == "ident":
            self.i += 1
            return Var(tok.text)
        if tok.kind in ("string", "number"):
            self.i += 1
            return Const(tok.text)
        self.error("expected a term")

    def literal(self) -> Literal:
        if self.tok.kind == "ident" and self.peek().text == "(" and self.peek().kind == "op":
            rel = self.ident().text
            self.expect("(")
            terms = []
            if not self.at(")"):
                terms.append(self.term())
                while self.accept(","):
                    terms.append(self.term())
            self.expect(")")
            return Pred(rel, tuple(terms))
        left = self.term()
        if self.accept("="):
            return Cmp("=", left, self.term())
        if self.accept("!="):
            return Cmp("!=", left, self.term())
        self.error("expected an atom or a comparison")

    def conj(self) -> list[Literal]:
        out = [self.literal()]
        while self.accept("&"):
            out.append(self.literal())
        return out


# ---------------------------------------------------------------- constraints

_KEYWORDS = {"forall", "exists", "false"}


def _constraint(p: _Parser, owner=None) -> ConstraintAST:
    start = p.tok
    universal: list[str] = []
    existential: list[str] = []
    if p.accept("forall"):
        universal = p.var_list()
    if p.accept("exists"):
        existential = p.var_list()
    if p.at("("):
        p.expect("(")
        body = p.conj()
        if p.accept("->"):
            head = [] if p.accept("false") else p.conj()
        else:
            head = []
        p.expect(")")
    else:
        if existential:
            p.error("an existential prefix requires a parenthesised implication")
        body = p.conj()
        head = []
    ast = ConstraintAST(tuple(universal), tuple(existential), tuple(body), tuple(head), owner)
    _check_constraint(ast, start)
    return ast


def _check_constraint(ast: ConstraintAST, tok: Token) -> None:
    def fail(msg):
        raise ParseError(msg, tok.line, tok.col)

    if len(set(ast.universal + ast.existential)) != len(ast.universal) + len(ast.existential):
        fail("a variable is quantified twice")
    bound = set(ast.universal) | set(ast.existential)
    used = set()
    for l in ast.body + ast.head:
        used |= l.vars()
    unbound = used - bound
    if unbound:
        fail(f"unbound variable(s): {', '.join(sorted(unbound))}")
    if not ast.body_atoms:
        fail("constraint body needs at least one atom")
    body_vars = set().union(*(l.vars() for l in ast.body))
    in_body = body_vars & set(ast.existential)
    if in_body:
        fail(f"existential variable(s) {', '.join(sorted(in_body))} occur in the body")
    atom_vars = set().union(*(a.vars() for a in ast.body_atoms))
    loose = (used - set(ast.existential)) - atom_vars
    if loose:
        fail(f"universal variable(s) {', '.join(sorted(loose))} not bound by a body atom")


def parse_constraint(text: str, owner=None) -> ConstraintAST:
    p = _Parser(text)
    ast = _constraint(p, owner)
    if p.tok.kind != "eof":
        p.error("trailing input after constraint")
    return ast


def render_constraint(ast: ConstraintAST) -> str:
    parts = []
    if ast.universal:
        parts.append("forall " + ",".join(ast.universal) + " ")
    if ast.existential:
        parts.append("exists " + ",".join(ast.existential) + " ")
    body = " & ".join(map(str, ast.body))
    head = " & ".join(map(str, ast.head)) if ast.head else "false"
    parts.append(f"({body} -> {head})")
    return "".join(parts)


# ---------------------------------------------------------------- classification

FULL_INCLUSION = "full-inclusion"
UNIVERSAL_BUILTIN_HEAD = "universal-builtin-head"
REFERENTIAL = "referential"
MIXED_REFERENTIAL = "mixed-referential"
LOCAL_FD = "local-fd"
LOCAL_DENIAL = "local-denial"
UNSUPPORTED = "unsupported"


def classify_dec(ast: ConstraintAST) -> str:
    """Shape-based class of a constraint; never raises."""
    atoms_h, builtins_h = ast.head_atoms, ast.head_builtins
    if not isinstance(ast.owner, tuple):  # local IC
        if atoms_h:
            return UNSUPPORTED
        b = ast.body_atoms
        if (
            len(b) == 2
            and not ast.body_builtins
            and b[0].rel == b[1].rel
            and len(builtins_h) == 1
            and builtins_h[0].op == "="
            and not ast.existential
        ):
            return LOCAL_FD
        if not ast.existential:
            return LOCAL_DENIAL
        return UNSUPPORTED
    if not ast.head:
        return UNSUPPORTED
    if not atoms_h:
        return UNIVERSAL_BUILTIN_HEAD if not ast.existential else UNSUPPORTED
    if (
        not ast.existential
        and len(ast.body) == 1
        and len(ast.head) == 1
        and isinstance(ast.body[0], Pred)
        and ast.body[0].terms == atoms_h[0].terms
        and all(isinstance(t, Var) for t in ast.body[0].terms)
        and len(set(ast.body[0].terms)) == len(ast.body[0].terms)
    ):
        return FULL_INCLUSION
    if len(atoms_h) == 1:
        return REFERENTIAL
    ex = set(ast.existential)
    if ex:
        shared = [a for a in atoms_h if a.vars() & ex]
        if len(shared) >= 2:
            return MIXED_REFERENTIAL
    return UNSUPPORTED


# ---------------------------------------------------------------- system files


def parse_system(text: str) -> System:
    p = _Parser(text)
    peers: list[Peer] = []
    pending_ics: list[tuple[str, Token, int]] = []
    decs: list[tuple[str, str, Token, int]] = []
    trust: list[TrustTriple] = []
    while p.tok.kind != "eof":
        tok = p.tok
        if p.accept("peer"):
            peers.append(_peer_decl(p, pending_ics))
        elif p.accept("trust"):
            subj = p.ident("peer name").text
            if not p.at(LESS, SAME):
                p.error("expected 'less' or 'same'")
            level = p.ident().text
            obj = p.ident("peer name").text
            p.expect(";")
            try:
                trust.append(TrustTriple(subj, level, obj))
            except ValidationError as e:
                raise ParseError(str(e), tok.line, tok.col) from None
        elif p.accept("dec"):
            src = p.ident("peer name").text
            p.expect("->")
            dst = p.ident("peer name").text
            p.expect(":")
            decs.append((src, dst, p.tok, p.i))
            _skip_formula(p)
        else:
            p.error("expected 'peer', 'trust' or 'dec'")

    try:
        system = System(tuple(peers))
    except ValidationError as e:
        raise ValidationError(str(e)) from None
    names = set(system.peer_names)
    # second pass: formulas can be checked only once every schema is known
    resolved_peers = []
    for peer in peers:
        ics = []
        for owner, tok, index in pending_ics:
            if owner != peer.name:
                continue
            ast = _reparse(p, index, owner)
            _resolve(system, ast, {peer.name}, tok)
            ics.append(ast)
        resolved_peers.append(Peer(peer.name, peer.relations, peer.facts, tuple(ics)))
    resolved_decs = []
    for src, dst, tok, index in decs:
        for peer_name in (src, dst):
            if peer_name not in names:
                raise ValidationError(f"{tok.line}:{tok.col}: unknown peer {peer_name}")
        if src == dst:
            raise ValidationError(f"{tok.line}:{tok.col}: a DEC must relate two different peers")
        ast = _reparse(p, index, (src, dst))
        _resolve(system, ast, {src, dst}, tok)
        resolved_decs.append(DEC(src, dst, ast))
    for t in trust:
        for peer_name in (t.subject, t.object):
            if peer_name not in names:
                raise ValidationError(f"unknown peer {peer_name} in trust triple {t}")
    return System(tuple(resolved_peers), tuple(resolved_decs), tuple(trust))


def _skip_formula(p: _Parser) -> None:
    depth = 0
    while True:
        if p.tok.kind == "eof":
            p.error("unterminated formula, expected ';'")
        if p.at("("):
            depth += 1
        elif p.at(")"):
            depth -= 1
        elif p.at(";") and depth == 0:
            p.i += 1
            return
        p.i += 1


def _reparse(p: _Parser, index: int, owner) -> ConstraintAST:
    p.i = index
    ast = _constraint(p, owner)
    if not p.at(";"):
        p.error("expected ';' after formula")
    return ast


def _resolve(system: System, ast: ConstraintAST, peers: set[str], tok: Token) -> None:
    for lit in ast.body + ast.head:
        if not isinstance(lit, Pred):
            continue
        try:
            rel = system.relation(lit.rel)
        except ValidationError:
            raise ValidationError(f"{tok.line}:{tok.col}: unknown relation {lit.rel}") from None
        if rel.owner not in peers:
            raise ValidationError(
                f"{tok.line}:{tok.col}: relation {lit.rel} belongs to {rel.owner}, outside {'/'.join(sorted(peers))}"
            )
        if len(lit.terms) != rel.arity:
            raise ValidationError(
                f"{tok.line}:{tok.col}: arity mismatch for {lit.rel}: expected {rel.arity}, got {len(lit.terms)}"
            )


def _peer_decl(p: _Parser, pending_ics: list) -> Peer:
    name = p.ident("peer name").text
    p.expect("{")
    p.expect("schema")
    rels = []
    seen = set()
    while True:
        rtok = p.ident("relation name")
        p.expect("/")
        if p.tok.kind != "number" or not p.tok.text.isdigit():
            p.error("expected a relation arity")
        arity = int(p.tok.text)
        p.i += 1
        if rtok.text in seen:
            raise ParseError(f"relation {rtok.text} declared twice", rtok.line, rtok.col)
        seen.add(rtok.text)
        rels.append(RelationSymbol(rtok.text, arity, name))
        if not p.accept(","):
            break
    p.expect(";")
    arities = {r.name: r.arity for r in rels}
    facts = set()
    if p.accept("instance"):
        while True:
            atok = p.tok
            rel = p.ident("relation name").text
            p.expect("(")
            args = []
            if not p.at(")"):
                args.append(p.constant())
                while p.accept(","):
                    args.append(p.constant())
            p.expect(")")
            if rel not in arities:
                raise ValidationError(f"{atok.line}:{atok.col}: unknown relation {rel} in instance of {name}")
            if len(args) != arities[rel]:
                raise ValidationError(
                    f"{atok.line}:{atok.col}: arity mismatch for {rel}: expected {arities[rel]}, got {len(args)}"
                )
            facts.add(Atom(rel, tuple(args)))
            if not p.accept(","):
                break
        p.expect(";")
    while p.accept("ic"):
        pending_ics.append((name, p.tok, p.i))
        _skip_formula(p)
    p.expect("}")
    return Peer(name, tuple(rels), frozenset(facts))


def render_system(system: System) -> str:
    lines = []
    for peer in system.peers:
        lines.append(f"peer {peer.name} {{")
        lines.append("  schema " + ", ".join(str(r) for r in peer.relations) + ";")
        if peer.facts:
            facts = ", ".join(
                f"{a.rel}({','.join(_render_fact_constant(c) for c in a.args)})" for a in sorted(peer.facts)
            )
            lines.append(f"  instance {facts};")
        for ic in peer.ics:
            lines.append(f"  ic {render_constraint(ic)};")
        lines.append("}")
    for t in system.trust:
        lines.append(f"trust {t.subject} {t.level} {t.object};")
    for d in system.decs:
        lines.append(f"dec {d.source} -> {d.target} : {render_constraint(d.ast)};")
    return "\n".join(lines) + "\n"


def _render_fact_constant(c: str) -> str:
    if re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", c) and c not in _KEYWORDS:
        return c
    return quote_constant(c)


# ---------------------------------------------------------------- queries


def _fo_formula(p: _Parser) -> Formula:
    return _fo_implies(p)


def _fo_implies(p: _Parser) -> Formula:
    left = _fo_or(p)
    if p.accept("->"):
        return Implies(left, _fo_implies(p))
    return left


def _fo_or(p: _Parser) -> Formula:
    subs = [_fo_and(p)]
    while p.accept("|"):
        subs.append(_fo_and(p))
    return subs[0] if len(subs) == 1 else Or(tuple(subs))


def _fo_and(p: _Parser) -> Formula:
    subs = [_fo_unary(p)]
    while p.accept("&"):
        subs.append(_fo_unary(p))
    return subs[0] if len(subs) == 1 else And(tuple(subs))


def _fo_unary(p: _Parser) -> Formula:
    # quantifier scope is the following unary formula; parenthesise wider scopes
    if p.accept("~"):
        return Not(_fo_unary(p))
    if p.accept("exists"):
        return Exists(tuple(p.var_list()), _fo_unary(p))
    if p.accept("forall"):
        return Forall(tuple(p.var_list()), _fo_unary(p))
    if p.accept("("):
        f = _fo_formula(p)
        p.expect(")")
        return f
    return p.literal()


def parse_formula(text: str) -> Formula:
    p = _Parser(text)
    f = _fo_formula(p)
    if p.tok.kind != "eof":
        p.error("trailing input after formula")
    return f


def parse_query(text: str, check: bool = True) -> QueryAST:
    p = _Parser(text)
    name = p.ident("query name").text
    p.expect("(")
    head = [] if p.at(")") else p.var_list()
    p.expect(")")
    p.expect(":=")
    f = _fo_formula(p)
    if p.tok.kind != "eof":
        p.error("trailing input after query")
    if len(set(head)) != len(head):
        raise ParseError("repeated head variable")
    extra = sorted(free_vars(f) - set(head))
    if extra:
        f = Exists(tuple(extra), f)
    q = QueryAST(name, tuple(head), f)
    if check:
        problem = safe_range_problem(q)
        if problem:
            raise UnsafeQuery(f"query {name} is not safe-range: {problem}")
    return q


def free_vars(f: Formula) -> set[str]:
    if isinstance(f, (Pred, Cmp)):
        return f.vars()
    if isinstance(f, Not):
        return free_vars(f.sub)
    if isinstance(f, (And, Or)):
        return set().union(*(free_vars(s) for s in f.subs))
    if isinstance(f, Implies):
        return free_vars(f.left) | free_vars(f.right)
    if isinstance(f, (Exists, Forall)):
        return free_vars(f.sub) - set(f.vars)
    raise TypeError(f)


def formula_relations(f: Formula) -> frozenset[str]:
    if isinstance(f, Pred):
        return frozenset([f.rel])
    if isinstance(f, Cmp):
        return frozenset()
    if isinstance(f, Not):
        return formula_relations(f.sub)
    if isinstance(f, (And, Or)):
        return frozenset().union(*(formula_relations(s) for s in f.subs))
    if isinstance(f, Implies):
        return formula_relations(f.left) | formula_relations(f.right)
    return formula_relations(f.sub)


def formula_constants(f: Formula) -> frozenset[str]:
    if isinstance(f, (Pred, Cmp)):
        terms = f.terms if isinstance(f, Pred) else (f.left, f.right)
        return frozenset(t.value for t in terms if isinstance(t, Const))
    if isinstance(f, Not):
        return formula_constants(f.sub)
    if isinstance(f, (And, Or)):
        return frozenset().union(*(formula_constants(s) for s in f.subs))
    if isinstance(f, Implies):
        return formula_constants(f.left) | formula_constants(f.right)
    return formula_constants(f.sub)


def srnf(f: Formula, negate: bool = False) -> Formula:
    """Safe-range normal form: no implications, no universals, negation pushed to
    atoms, existentials and negated existentials."""
    if isinstance(f, Pred):
        return Not(f) if negate else f
    if isinstance(f, Cmp):
        return f.negated() if negate else f
    if isinstance(f, Not):
        return srnf(f.sub, not negate)
    if isinstance(f, And):
        subs = tuple(srnf(s, negate) for s in f.subs)
        return Or(subs) if negate else And(subs)
    if isinstance(f, Or):
        subs = tuple(srnf(s, negate) for s in f.subs)
        return And(subs) if negate else Or(subs)
    if isinstance(f, Implies):
        return srnf(Or((Not(f.left), f.right)), negate)
    if isinstance(f, Exists):
        inner = Exists(f.vars, srnf(f.sub))
        return Not(inner) if negate else inner
    if isinstance(f, Forall):
        inner = Exists(f.vars, srnf(f.sub, True))
        return inner if negate else Not(inner)
    raise TypeError(f)


class _Unsafe(Exception):
    pass


def _rr(f: Formula) -> set[str]:
    if isinstance(f, Pred):
        return f.vars()
    if isinstance(f, Cmp):
        if f.op == "=":
            l, r = f.left, f.right
            if isinstance(l, Var) and isinstance(r, Const):
                return {l.name}
            if isinstance(r, Var) and isinstance(l, Const):
                return {r.name}
        return set()
    if isinstance(f, Not):
        _rr(f.sub)  # only for nested quantifier failures
        return set()
    if isinstance(f, And):
        out = set()
        for s in f.subs:
            out |= _rr(s)
        # propagate x = y when one side is restricted
        changed = True
        while changed:
            changed = False
            for s in f.subs:
                if isinstance(s, Cmp) and s.op == "=" and isinstance(s.left, Var) and isinstance(s.right, Var):
                    a, b = s.left.name, s.right.name
                    if (a in out) != (b in out):
                        out |= {a, b}
                        changed = True
        return out
    if isinstance(f, Or):
        sets = [_rr(s) for s in f.subs]
        out = set(sets[0])
        for vs in sets[1:]:
            out &= vs
        return out
    if isinstance(f, Exists):
        inner = _rr(f.sub)
        missing = set(f.vars) - inner
        if missing:
            raise _Unsafe(f"quantified variable(s) {', '.join(sorted(missing))} not range-restricted")
        return inner - set(f.vars)
    raise TypeError(f)


def safe_range_problem(q: QueryAST) -> str | None:
    f = srnf(q.formula)
    try:
        if isinstance(f, Not):
            raise _Unsafe("top-level negation")
        rr = _rr(f)
    except _Unsafe as e:
        return str(e)
    head = set(q.head_vars)
    if rr != free_vars(f) or not head <= rr:
        loose = sorted(head - rr) or sorted(free_vars(f) - rr)
        return f"head variable(s) {', '.join(loose)} not range-restricted"
    return None


def safe_range_check(q: QueryAST) -> bool:
    return safe_range_problem(q) is None


_PREC = {Implies: 1, Or: 2, And: 3}


def render_formula(f: Formula, parent: int = 0) -> str:
    if isinstance(f, (Pred, Cmp)):
        return str(f)
    if isinstance(f, Not):
        return "~" + render_formula(f.sub, 4)
    if isinstance(f, (Exists, Forall)):
        kw = "exists" if isinstance(f, Exists) else "forall"
        return f"{kw} {','.join(f.vars)} {render_formula(f.sub, 4)}"
    prec = _PREC[type(f)]
    if isinstance(f, Implies):
        s = f"{render_formula(f.left, prec + 1)} -> {render_formula(f.right, prec)}"
    else:
        sep = " | " if isinstance(f, Or) else " & "
        s = sep.join(render_formula(x, prec + 1) for x in f.subs)
    return f"({s})" if prec < parent else s


def render_query(q: QueryAST) -> str:
    return f"{q.name}({','.join(q.head_vars)}) := {render_formula(q.formula)}"


def constraint_vars(ast: ConstraintAST) -> Iterable[str]:
    return ast.universal + ast.existential
