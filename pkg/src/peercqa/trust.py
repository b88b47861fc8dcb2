"""Trust relation: validation and a peer's neighbourhood."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from .errors import TrustViolation
from .system import LESS, SAME, System, TrustTriple


def trust_conflicts(triples: Iterable[TrustTriple]) -> list[tuple[str, str]]:
    levels: dict[tuple[str, str], set[str]] = {}
    for t in triples:
        levels.setdefault((t.subject, t.object), set()).add(t.level)
    return sorted(pair for pair, lv in levels.items() if len(lv) > 1)


def validate_trust(triples: Iterable[TrustTriple]) -> None:
    """Raise :class:`TrustViolation` unless the level is a function of (subject, object)."""
    bad = trust_conflicts(triples)
    if bad:
        raise TrustViolation(bad)


@dataclass(frozen=True)
class Neighborhood:
    peer: str
    less: frozenset[str]
    same: frozenset[str]
    extended_schema: frozenset[str]
    defaulted: frozenset[str] = field(default=frozenset())

    def warnings(self) -> list[str]:
        return [
            f"no trust triple from {self.peer} to {q}; treating it as 'same'" for q in sorted(self.defaulted)
        ]


def neighborhood(system: System, peer: str) -> Neighborhood:
    system.peer(peer)
    less, same, defaulted = set(), set(), set()
    extended = set(system.peer(peer).relation_names)
    for dec in system.decs_of(peer):
        extended |= dec.relations()
        level = system.trust_level(peer, dec.target)
        if level is None:
            defaulted.add(dec.target)
            level = SAME
        (less if level == LESS else same).add(dec.target)
    for t in system.trust:
        if t.subject == peer:
            (less if t.level == LESS else same).add(t.object)
    return Neighborhood(peer, frozenset(less), frozenset(same - less), frozenset(extended), frozenset(defaulted))


def dec_level(system: System, peer: str, target: str) -> str:
    return system.trust_level(peer, target) or SAME
