"""Command-line front end.

Exit codes: 0 ok, 1 empty result (no solutions / no models / routes disagree),
2 input error, 3 unsupported constraint or failed transformation.
"""

from __future__ import annotations

import argparse
import json
import sys

from .asp import answer_sets, render_answer_set
from .errors import PeerError, SearchCapExceeded, UnsupportedError
from .lang import classify_dec, parse_query, parse_system
from .oracle import solutions_direct, solutions_transitive
from .program import parse_program
from .query import peer_consistent_answers
from .solve import compile_for, solutions_asp
from .transforms import head_cycle, shift_disjunctions, unfold_choice
from .trust import validate_trust

OK, EMPTY, INPUT, UNSUPPORTED = 0, 1, 2, 3


class Report:
    def __init__(self, status="ok", **payload):
        self.status = status
        self.payload = payload
        self.warnings: list[str] = []
        self.lines: list[str] = []

    def to_json(self) -> str:
        data = {"status": self.status}
        data.update(self.payload)
        data["warnings"] = self.warnings
        return json.dumps(data, indent=2, sort_keys=False)


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as e:
        raise _InputError(f"cannot read {path}: {e.strerror}") from None


class _InputError(Exception):
    pass


def _load_system(path: str):
    system = parse_system(_read(path))
    validate_trust(system.trust)
    return system


def _instance_str(inst) -> str:
    return str(inst)


def _solutions(args, system):
    if args.method == "oracle":
        fn = solutions_transitive if args.mode == "transitive" else solutions_direct
        return fn(system, args.peer, max_new_atoms=args.max_new_atoms, threads=args.threads)
    return solutions_asp(system, args.peer, args.method, args.mode)


# ---------------------------------------------------------------- commands


def cmd_validate(args) -> tuple[int, Report]:
    system = _load_system(args.system)
    decs = [{"source": d.source, "target": d.target, "class": classify_dec(d.ast), "constraint": str(d.ast)} for d in system.decs]
    rep = Report(decs=decs)
    rep.lines.append(f"ok: {len(system.peers)} peers, {len(system.decs)} DECs")
    for d in decs:
        rep.lines.append(f"{d['source']} -> {d['target']}: {d['class']}: {d['constraint']}")
    for p in system.peers:
        for ic in p.ics:
            rep.lines.append(f"{p.name} local: {classify_dec(ic)}: {ic}")
    return OK, rep


def cmd_solutions(args) -> tuple[int, Report]:
    system = _load_system(args.system)
    _require_peer(args, system)
    sols = _solutions(args, system)
    rep = Report(solutions=[[str(a) for a in s.sorted_atoms()] for s in sols.solutions])
    rep.warnings.extend(sols.warnings)
    if sols.inconsistent:
        rep.status = "inconsistent"
        rep.lines.append("no solutions")
        return EMPTY, rep
    for i, s in enumerate(sols.solutions, 1):
        rep.lines.append(f"solution {i}: {_instance_str(s)}")
    return OK, rep


def cmd_answer(args) -> tuple[int, Report]:
    system = _load_system(args.system)
    _require_peer(args, system)
    q = parse_query(_read(args.query))
    methods = ["oracle", "asp"] if args.method == "both" else [args.method]
    results = [
        peer_consistent_answers(system, args.peer, q, m, args.mode, args.max_new_atoms, args.threads) for m in methods
    ]
    res = results[0]
    rep = Report(answers=[list(r) for r in res.answers.sorted()])
    rep.warnings.extend(res.warnings)
    if len(results) == 2 and (results[0].answers != results[1].answers or results[0].inconsistent != results[1].inconsistent):
        rep.status = "error"
        rep.lines.append("oracle and asp answers differ")
        rep.lines.append("oracle: " + str(results[0].answers))
        rep.lines.append("asp: " + str(results[1].answers))
        return EMPTY, rep
    if res.inconsistent:
        rep.status = "inconsistent"
        rep.lines.append("no solutions: the system is inconsistent for this peer")
        return EMPTY, rep
    rep.lines.extend("(" + ",".join(r) + ")" for r in res.answers.sorted())
    if not res.answers:
        rep.lines.append("no peer-consistent answers")
    return OK, rep


def cmd_compile(args) -> tuple[int, Report]:
    system = _load_system(args.system)
    _require_peer(args, system)
    if args.shift_hcf and not args.unfold_choice:
        raise _InputError("--shift-hcf requires --unfold-choice")
    method = "lav" if args.method == "lav" else "asp"
    comp = compile_for(system, args.peer, method, args.mode)
    program = comp.program
    if args.unfold_choice:
        program = unfold_choice(program)
    if args.shift_hcf:
        cycle = head_cycle(program)
        if cycle is not None:
            rep = Report("error")
            rep.lines.append("program is not head-cycle free; head cycle through " + " -> ".join(cycle))
            return UNSUPPORTED, rep
        program = shift_disjunctions(program)
    text = str(program)
    rep = Report(program=text)
    rep.warnings.extend(comp.warnings)
    rep.lines.append(text.rstrip("\n"))
    return OK, rep


def cmd_solve(args) -> tuple[int, Report]:
    program = parse_program(_read(args.program))
    models = answer_sets(program)
    rep = Report(models=[sorted(str(l) for l in m) for m in models])
    if not models:
        rep.status = "inconsistent"
        rep.lines.append("no answer sets")
        return EMPTY, rep
    rep.lines.extend(render_answer_set(m) for m in models)
    return OK, rep


def cmd_check(args) -> tuple[int, Report]:
    system = _load_system(args.system)
    _require_peer(args, system)
    fn = solutions_transitive if args.mode == "transitive" else solutions_direct
    oracle = fn(system, args.peer, max_new_atoms=args.max_new_atoms, threads=args.threads)
    args.method = "asp"
    asp = _solutions(args, system)
    a, b = oracle.atom_sets(), asp.atom_sets()
    rep = Report(solutions=[[str(x) for x in s.sorted_atoms()] for s in oracle.solutions])
    rep.warnings.extend(dict.fromkeys(oracle.warnings + asp.warnings))
    if a == b:
        rep.lines.append(f"equal ({len(a)} solutions)")
        return OK, rep
    rep.status = "error"
    rep.lines.append("unequal")
    for s in oracle.solutions:
        if s.atoms not in b:
            rep.lines.append(f"only oracle: {s}")
    for s in asp.solutions:
        if s.atoms not in a:
            rep.lines.append(f"only asp: {s}")
    return EMPTY, rep


def _require_peer(args, system):
    if not args.peer:
        raise _InputError("--peer is required")
    system.peer(args.peer)


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="peercqa", description="Peer-to-peer data exchange: solutions, answers, programs.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, methods=("oracle", "asp", "lav"), default="oracle"):
        p.add_argument("system", help="system description file")
        p.add_argument("--peer", help="peer whose solutions are computed")
        p.add_argument("--method", choices=methods, default=default)
        p.add_argument("--mode", choices=("direct", "transitive"), default="direct")
        p.add_argument("--max-new-atoms", type=int, default=None, help="cap on inserted atoms per repair branch")
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--format", choices=("text", "json"), default="text")

    p = sub.add_parser("validate", help="parse a system and classify its constraints")
    p.add_argument("system")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("solutions", help="list a peer's solutions")
    common(p)
    p.set_defaults(fn=cmd_solutions)

    p = sub.add_parser("answer", help="peer-consistent answers to a query")
    common(p, ("oracle", "asp", "lav", "both"))
    p.add_argument("query", help="query file")
    p.set_defaults(fn=cmd_answer)

    p = sub.add_parser("compile", help="print the program specifying a peer's solutions")
    common(p, ("asp", "lav"), "asp")
    p.add_argument("--unfold-choice", action="store_true")
    p.add_argument("--shift-hcf", action="store_true")
    p.set_defaults(fn=cmd_compile)

    p = sub.add_parser("solve", help="answer sets of a program file")
    p.add_argument("program")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(fn=cmd_solve)

    p = sub.add_parser("check", help="compare oracle and program solutions")
    common(p, ("asp",), "asp")
    p.set_defaults(fn=cmd_check)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        code, rep = args.fn(args)
    except (_InputError, PeerError) as e:
        code = UNSUPPORTED if isinstance(e, (UnsupportedError, SearchCapExceeded)) else INPUT
        rep = Report("error", error=str(e))
        rep.lines.append(f"error: {e}")
    if args.format == "json":
        print(rep.to_json())
    else:
        out = sys.stdout if rep.status != "error" or code == EMPTY else sys.stderr
        for line in rep.lines:
            print(line, file=out)
        for w in rep.warnings:
            print(f"warning: {w}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
