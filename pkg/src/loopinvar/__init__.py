"""Invariant synthesis for loops with unsolvable polynomial recurrences.

Typical use::

    from loopinvar import parse_program, synthesize
    prog = parse_program(open("squares.loop").read())
    for inv in synthesize(prog, 1):
        print(inv)
"""

from loopinvar.dependency import analyze, build_graph, is_solvable, partition
from loopinvar.frontend import Program, desugar, format_program, parse_program
from loopinvar.oracle import check, unroll_expectation
from loopinvar.recurrences import MomentContext
from loopinvar.synthesis import Invariant, run_synthesis, synthesize, system_size

__version__ = "0.1.0"

__all__ = [
    "Invariant",
    "MomentContext",
    "Program",
    "analyze",
    "build_graph",
    "check",
    "desugar",
    "format_program",
    "is_solvable",
    "parse_program",
    "partition",
    "run_synthesis",
    "synthesize",
    "system_size",
    "unroll_expectation",
]
