"""CLI invocations with checked-in expected output (fixtures/golden/<name>.txt).

Regenerate with ``python3 tests/golden_cases.py`` after reviewing a change.
"""

import contextlib
import io
from pathlib import Path

from peercqa.cli import main

ROOT = Path(__file__).resolve().parent.parent
FX = "fixtures/"

CASES = {
    "validate_fix_a": ["validate", FX + "fix_a.p2p"],
    "validate_fix_b": ["validate", FX + "fix_b.p2p"],
    "solutions_fix_a_oracle": ["solutions", FX + "fix_a.p2p", "--peer", "P1"],
    "solutions_fix_b_asp": ["solutions", FX + "fix_b.p2p", "--peer", "P", "--method", "asp"],
    "solutions_fix_b_lav": ["solutions", FX + "fix_b.p2p", "--peer", "P", "--method", "lav"],
    "solutions_fix_c_transitive": ["solutions", FX + "fix_c.p2p", "--peer", "P", "--mode", "transitive"],
    "answer_fix_a": ["answer", FX + "fix_a.p2p", FX + "fix_a_r1.q", "--peer", "P1", "--method", "both"],
    "answer_fix_b": ["answer", FX + "fix_b.p2p", FX + "fix_b_q.q", "--peer", "P", "--method", "both"],
    "compile_fix_b": ["compile", FX + "fix_b.p2p", "--peer", "P"],
    "compile_fix_b_unfold": ["compile", FX + "fix_b.p2p", "--peer", "P", "--unfold-choice"],
    "compile_fix_b_shift": ["compile", FX + "fix_b.p2p", "--peer", "P", "--unfold-choice", "--shift-hcf"],
    "compile_fix_b_lav": ["compile", FX + "fix_b.p2p", "--peer", "P", "--method", "lav"],
    "compile_fix_c_transitive": ["compile", FX + "fix_c.p2p", "--peer", "P", "--mode", "transitive"],
    "solve_layered": ["solve", FX + "lav_layered.lp"],
    "solve_fix_c_combined": ["solve", FX + "fix_c_combined.lp"],
    "check_fix_a": ["check", FX + "fix_a.p2p", "--peer", "P1"],
    "check_fix_b": ["check", FX + "fix_b.p2p", "--peer", "P"],
    "check_fix_c": ["check", FX + "fix_c.p2p", "--peer", "P", "--mode", "transitive"],
    "solutions_fix_a_json": ["solutions", FX + "fix_a.p2p", "--peer", "P1", "--format", "json"],
}


def run(argv):
    out, err = io.StringIO(), io.StringIO()
    with contextlib.chdir(ROOT) if hasattr(contextlib, "chdir") else _cd(ROOT):
        with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
            code = main(argv)
    return code, out.getvalue(), err.getvalue()


@contextlib.contextmanager
def _cd(path):
    import os

    old = os.getcwd()
    os.chdir(path)
    try:
        yield
    finally:
        os.chdir(old)


def render(argv) -> str:
    code, out, err = run(argv)
    return f"$ peercqa {' '.join(argv)}\n{out}{err}[exit {code}]\n"


if __name__ == "__main__":
    for name, argv in CASES.items():
        (ROOT / "fixtures" / "golden" / f"{name}.txt").write_text(render(argv))
