"""Solutions through the logic-program route."""

from __future__ import annotations

from .asp import answer_sets, solutions_from_models
from .compiler import Compilation, compile_direct, compile_lav, compile_transitive
from .oracle import SolutionSet
from .system import System


def compile_for(system: System, peer: str, method: str = "asp", mode: str = "direct") -> Compilation:
    if method == "lav":
        return compile_lav(system, peer)
    if mode == "transitive":
        return compile_transitive(system, peer)
    return compile_direct(system, peer)


def project(comp: Compilation, models, fixed) -> SolutionSet:
    """Solutions encoded by ``models`` of a compiled program."""
    sols = solutions_from_models(models, comp.projection, fixed, annotated=comp.mode == "lav")
    return SolutionSet(sols.solutions, (), comp.warnings)


def solutions_asp(system: System, peer: str, method: str = "asp", mode: str = "direct") -> SolutionSet:
    comp = compile_for(system, peer, method, mode)
    return project(comp, answer_sets(comp.program), system.global_instance())
