"""Relational substrate: schemas, ground atoms, instances and repair distance.

Constants are uninterpreted strings ordered lexicographically.  Every set-valued
result that leaves this module is sorted by ``(relation, args)`` so that
downstream output is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

from .errors import SchemaMismatch, ValidationError

Constant = str


@dataclass(frozen=True, order=True)
class RelationSymbol:
    name: str
    arity: int
    owner: str

    def __post_init__(self):
        if self.arity < 0:
            raise ValidationError(f"negative arity for {self.name}")

    def __str__(self):
        return f"{self.name}/{self.arity}"


class Atom(NamedTuple):
    rel: str
    args: tuple[Constant, ...]

    def __str__(self):
        return f"{self.rel}({','.join(self.args)})"


def atom(rel: str, *args: Constant) -> Atom:
    return Atom(rel, tuple(args))


@dataclass(frozen=True)
class Delta:
    inserted: frozenset[Atom] = frozenset()
    deleted: frozenset[Atom] = frozenset()

    def __post_init__(self):
        if self.inserted & self.deleted:
            raise ValueError("an atom cannot be both inserted and deleted")

    def is_empty(self) -> bool:
        return not self.inserted and not self.deleted

    def changes(self) -> frozenset[tuple[str, Atom]]:
        return frozenset(("+", a) for a in self.inserted) | frozenset(("-", a) for a in self.deleted)

    def __len__(self):
        return len(self.inserted) + len(self.deleted)


@dataclass(frozen=True)
class Instance:
    atoms: frozenset[Atom]
    schema: frozenset[RelationSymbol] = field(default=frozenset())

    def __post_init__(self):
        object.__setattr__(self, "atoms", frozenset(self.atoms))
        object.__setattr__(self, "schema", frozenset(self.schema))
        arities = {r.name: r.arity for r in self.schema}
        for a in self.atoms:
            if a.rel not in arities:
                raise ValidationError(f"atom {a} over relation outside the schema")
            if len(a.args) != arities[a.rel]:
                raise ValidationError(f"atom {a} does not match arity {arities[a.rel]}")

    @classmethod
    def build(cls, atoms: Iterable[Atom], schema: Iterable[RelationSymbol]) -> "Instance":
        return cls(frozenset(atoms), frozenset(schema))

    @property
    def relation_names(self) -> frozenset[str]:
        return frozenset(r.name for r in self.schema)

    def relation(self, name: str) -> frozenset[tuple[Constant, ...]]:
        return frozenset(a.args for a in self.atoms if a.rel == name)

    def sorted_atoms(self) -> list[Atom]:
        return sorted(self.atoms)

    def with_atoms(self, atoms: Iterable[Atom]) -> "Instance":
        return Instance(frozenset(atoms), self.schema)

    def apply(self, d: Delta) -> "Instance":
        return self.with_atoms((self.atoms - d.deleted) | d.inserted)

    def __contains__(self, a: Atom) -> bool:
        return a in self.atoms

    def __len__(self):
        return len(self.atoms)

    def __iter__(self):
        return iter(self.sorted_atoms())

    def __str__(self):
        return "{" + ", ".join(str(a) for a in self.sorted_atoms()) + "}"


def sigma(instance: Instance) -> frozenset[Atom]:
    """The set of ground atoms true in ``instance``."""
    return instance.atoms


def _same_schema(r1: Instance, r2: Instance) -> None:
    if r1.schema != r2.schema:
        raise SchemaMismatch("instances are over different schemas")


def delta(r1: Instance, r2: Instance) -> Delta:
    _same_schema(r1, r2)
    return Delta(inserted=r2.atoms - r1.atoms, deleted=r1.atoms - r2.atoms)


def closer_or_equal(base: Instance, r1: Instance, r2: Instance) -> bool:
    """``r1 <=_base r2``: every change ``r1`` makes to ``base`` is also made by ``r2``."""
    _same_schema(base, r1)
    _same_schema(base, r2)
    d1, d2 = delta(base, r1), delta(base, r2)
    return d1.inserted <= d2.inserted and d1.deleted <= d2.deleted


def restrict(r: Instance, relations: Iterable[str | RelationSymbol]) -> Instance:
    names = {x.name if isinstance(x, RelationSymbol) else x for x in relations}
    unknown = names - r.relation_names
    if unknown:
        raise ValidationError(f"unknown relation(s) in subschema: {', '.join(sorted(unknown))}")
    schema = frozenset(s for s in r.schema if s.name in names)
    return Instance(frozenset(a for a in r.atoms if a.rel in names), schema)


def active_domain(instances: Iterable[Instance] = (), constants: Iterable[Constant] = ()) -> frozenset[Constant]:
    dom = set(constants)
    for inst in instances:
        for a in inst.atoms:
            dom.update(a.args)
    return frozenset(dom)


def minimal_instances(base: Instance, candidates: Iterable[Instance]) -> list[Instance]:
    """Keep the ``<=_base``-minimal members of ``candidates`` (duplicates collapsed)."""
    unique = {c.atoms: c for c in candidates}
    deltas = {k: delta(base, c).changes() for k, c in unique.items()}
    keep = []
    for k, c in unique.items():
        mine = deltas[k]
        if not any(other < mine for k2, other in deltas.items() if k2 != k):
            keep.append(c)
    return sorted(keep, key=lambda i: i.sorted_atoms())
