"""In-memory model of a P2P data exchange system."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING

from .errors import ValidationError
from .relational import Atom, Instance, RelationSymbol

if TYPE_CHECKING:
    from .lang import ConstraintAST

LESS = "less"
SAME = "same"


@dataclass(frozen=True)
class TrustTriple:
    subject: str
    level: str
    object: str

    def __post_init__(self):
        if self.level not in (LESS, SAME):
            raise ValidationError(f"unknown trust level {self.level!r}")
        if self.subject == self.object:
            raise ValidationError(f"peer {self.subject} cannot carry a trust triple toward itself")

    def __str__(self):
        return f"({self.subject},{self.level},{self.object})"


@dataclass(frozen=True)
class Peer:
    name: str
    relations: tuple[RelationSymbol, ...]
    facts: frozenset[Atom] = frozenset()
    ics: tuple["ConstraintAST", ...] = ()

    @property
    def relation_names(self) -> frozenset[str]:
        return frozenset(r.name for r in self.relations)


@dataclass(frozen=True)
class DEC:
    """A data exchange constraint in Sigma(source, target), owned by ``source``."""

    source: str
    target: str
    ast: "ConstraintAST"

    def relations(self) -> frozenset[str]:
        return self.ast.relations()


@dataclass(frozen=True)
class System:
    peers: tuple[Peer, ...] = ()
    decs: tuple[DEC, ...] = ()
    trust: tuple[TrustTriple, ...] = ()
    _rels: dict = field(default=None, repr=False, compare=False, hash=False)

    def __post_init__(self):
        rels = {}
        names = set()
        for p in self.peers:
            if p.name in names:
                raise ValidationError(f"duplicate peer {p.name}")
            names.add(p.name)
            for r in p.relations:
                if r.name in rels:
                    raise ValidationError(
                        f"relation {r.name} declared by both {rels[r.name].owner} and {p.name}; schemata must be disjoint"
                    )
                rels[r.name] = r
        object.__setattr__(self, "_rels", rels)

    def peer(self, name: str) -> Peer:
        for p in self.peers:
            if p.name == name:
                return p
        raise ValidationError(f"unknown peer {name}")

    @property
    def peer_names(self) -> tuple[str, ...]:
        return tuple(p.name for p in self.peers)

    @property
    def schema(self) -> frozenset[RelationSymbol]:
        return frozenset(self._rels.values())

    def relation(self, name: str) -> RelationSymbol:
        try:
            return self._rels[name]
        except KeyError:
            raise ValidationError(f"unknown relation {name}") from None

    def owner(self, rel: str) -> str:
        return self.relation(rel).owner

    def global_instance(self) -> Instance:
        atoms = frozenset().union(*(p.facts for p in self.peers)) if self.peers else frozenset()
        return Instance(atoms, self.schema)

    def decs_of(self, peer: str) -> tuple[DEC, ...]:
        return tuple(d for d in self.decs if d.source == peer)

    def trust_level(self, subject: str, obj: str) -> str | None:
        for t in self.trust:
            if t.subject == subject and t.object == obj:
                return t.level
        return None
