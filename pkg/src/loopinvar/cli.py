"""Command-line driver: ``loopinvar analyze|synth|check|bench``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

from loopinvar import benchmarks
from loopinvar.algebra import format_monomial, format_rational
from loopinvar.dependency import analyze
from loopinvar.errors import (
    BudgetExceeded,
    ClosureBudgetExceeded,
    DefectiveLeak,
    DesugarError,
    InvalidDistribution,
    LoopSyntaxError,
    MissingBinding,
    NoDefectiveVariables,
    Timeout,
    UnsupportedSpectrum,
    ValidationError,
)
from loopinvar.frontend import Program, parse_program
from loopinvar.oracle import check
from loopinvar.synthesis import FULL, PURE, Invariant, run_synthesis

EXIT_OK = 0
EXIT_EMPTY = 1
EXIT_INPUT = 2
EXIT_SPECTRUM = 3
EXIT_SOLVABLE = 4
EXIT_MISMATCH = 5
EXIT_LIMIT = 6

INPUT_ERRORS = (LoopSyntaxError, ValidationError, DesugarError, InvalidDistribution, MissingBinding, OSError, UnicodeDecodeError)
LIMIT_ERRORS = (ClosureBudgetExceeded, BudgetExceeded, DefectiveLeak)

FOUND, LOWER, NONE, TIMEOUT, SPECTRUM = "found-at-this-degree", "found-lower-degree-only", "none", "timeout", "unsupported-spectrum"
SOLVABLE, ERROR = "solvable", "error"


class UsageError(Exception):
    pass


# --------------------------------------------------------------------------
# loading


def load_program(path: str) -> tuple[str, Program]:
    """Parse a .loop file; a bare name refers to the bundled corpus."""
    p = Path(path)
    if p.is_file():
        return p.stem, parse_program(p.read_text())
    if p.suffix == "" and p.name in benchmarks.names():
        return p.name, benchmarks.load(p.name)
    raise FileNotFoundError(f"no such file: {path}")


# --------------------------------------------------------------------------
# serialisation


def invariant_json(name: str, inv: Invariant) -> dict:
    F = inv.field
    expr = inv.closed_form.expr
    return {
        "benchmark": name,
        "degree": inv.degree,
        "kappa": format_rational(inv.kappa),
        "candidate": [format_monomial(m, inv.variables) for m in inv.candidate],
        "coefficients": [F.format(c) for c in inv.coefficients],
        "closed_form": [
            {"base": format_rational(b), "poly_in_n": [F.format(c) for c in expr.terms[b]]} for b in expr.bases()
        ],
        "valid_from": inv.valid_from,
        "kind": inv.kind,
    }


def invariant_text(inv: Invariant) -> str:
    lines = [f"kappa = {format_rational(inv.kappa)}  (dimension {inv.dimension})"]
    if inv.weights:
        lines.append(f"  free weights: {', '.join(inv.weights)}")
    lines.append(f"  {inv.format()}")
    if inv.valid_from:
        values = ", ".join(inv.field.format(v) for v in inv.closed_form.initial)
        lines.append(f"  values before n = {inv.valid_from}: {values}")
    return "\n".join(lines)


# --------------------------------------------------------------------------
# cancellation


class Deadline:
    """Checkpoint callable raising Timeout once the budget is spent."""

    def __init__(self, seconds: float | None):
        self.end = None if seconds is None else time.monotonic() + seconds

    def __call__(self):
        if self.end is not None and time.monotonic() > self.end:
            raise Timeout("time budget exhausted")


# --------------------------------------------------------------------------
# subcommands


def cmd_analyze(args) -> int:
    name, program = load_program(args.path)
    graph, part = analyze(program, args.graph)
    report = {"effective": list(part.effective), "defective": list(part.defective), "solvable": part.solvable}
    if args.dot:
        Path(args.dot).write_text(graph.to_dot(part))
    if (args.format or "json") == "json":
        print(json.dumps(report))
    else:
        print(f"{name}: {'solvable' if part.solvable else 'unsolvable'}")
        print(f"  effective: {', '.join(part.effective) or '(none)'}")
        print(f"  defective: {', '.join(part.defective) or '(none)'}")
        for (a, b), label in sorted(graph.labels.items()):
            print(f"  {a} -> {b} [{label}]")
    return EXIT_OK


def cmd_synth(args) -> int:
    name, program = load_program(args.path)
    run = run_synthesis(program, args.degree, args.mode)
    fmt = args.format or "text"
    if fmt == "json":
        print(json.dumps([invariant_json(name, inv) for inv in run.invariants], indent=2))
    else:
        if not run.invariants:
            print(f"no polynomial of degree <= {args.degree} with a closed form")
        for inv in run.invariants:
            print(invariant_text(inv))
        if run.invariants and not run.found_at_degree():
            print(f"(no invariant with a monomial of degree exactly {args.degree})")
        if run.space.unexplored:
            print(f"note: factor {run.space.unexplored} has no rational roots and was not searched", file=sys.stderr)
    return EXIT_OK if run.found_at_degree() else EXIT_EMPTY


def cmd_check(args) -> int:
    name, program = load_program(args.path)
    run = run_synthesis(program, args.degree, args.mode)
    reports = [check(run.ctx, inv, args.iterations) for inv in run.invariants]
    fmt = args.format or "text"
    if fmt == "json":
        out = {
            "benchmark": name,
            "degree": args.degree,
            "reports": [r.to_json(inv.field) for r, inv in zip(reports, run.invariants)],
        }
        print(json.dumps(out, indent=2))
    else:
        if not reports:
            print(f"no invariant of degree <= {args.degree} to check")
        for r in reports:
            status = r.verdict if r.passed else f"fail at n = {r.first_failure}"
            span = f"n = {r.rows[0].n}..{r.rows[-1].n}" if r.rows else "no iterations"
            extra = f", unrolling stopped at n = {r.truncated_at}" if r.truncated_at is not None else ""
            print(f"{status}: {r.invariant}  ({span}{extra})")
    if any(not r.passed for r in reports):
        return EXIT_MISMATCH
    return EXIT_OK if reports else EXIT_EMPTY


# --------------------------------------------------------------------------
# benchmark grid


@dataclass
class BenchResult:
    benchmark: str
    degree: int
    outcome: str
    elapsed_ms: int
    candidate_count: int | None
    equation_count: int | None
    message: str = ""


def bench_job(name: str, source: str, degree: int, mode: str, timeout: float | None) -> BenchResult:
    counts: dict = {}
    start = time.monotonic()
    message = ""
    try:
        run = run_synthesis(parse_program(source), degree, mode, Deadline(timeout), sizes=counts)
        if run.found_at_degree():
            outcome = FOUND
        else:
            outcome = LOWER if run.invariants else NONE
    except Timeout:
        outcome = TIMEOUT
    except UnsupportedSpectrum as exc:
        outcome, message = SPECTRUM, exc.residual
    except NoDefectiveVariables:
        outcome = SOLVABLE
    except Exception as exc:  # a failing job must not abort the grid
        outcome, message = ERROR, f"{type(exc).__name__}: {exc}"
    elapsed = int(round((time.monotonic() - start) * 1000))
    return BenchResult(name, degree, outcome, elapsed, counts.get("candidate_count"), counts.get("equation_count"), message)


def run_bench(files: list[Path], degrees: list[int], mode: str = PURE, timeout: float | None = 60, jobs: int = 1) -> list[BenchResult]:
    tasks = [(f.stem, f.read_text(), d, mode, timeout) for f in files for d in degrees]
    if jobs <= 1:
        results = [bench_job(*t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(bench_job, *t) for t in tasks]
            results = [f.result() for f in futures]
    return sorted(results, key=lambda r: (r.benchmark, r.degree))


_MARK = {FOUND: "*", LOWER: "", NONE: "", TIMEOUT: "-", SPECTRUM: "?", SOLVABLE: "s", ERROR: "!"}


def bench_table(results: list[BenchResult], degrees: list[int]) -> str:
    by_name: dict[str, dict[int, BenchResult]] = {}
    for r in results:
        by_name.setdefault(r.benchmark, {})[r.degree] = r
    top = max(degrees)
    header = ["BENCHMARK"] + [str(d) for d in degrees] + [f"CAND-{top}", f"EQN-{top}"]
    rows = [header]
    for name, cells in by_name.items():
        row = [name]
        for d in degrees:
            r = cells[d]
            row.append("-" if r.outcome == TIMEOUT else f"{_MARK[r.outcome]}{r.elapsed_ms / 1000:.2f}")
        last = cells[top]
        row.append("-" if last.candidate_count is None else str(last.candidate_count))
        row.append("-" if last.equation_count is None else str(last.equation_count))
        rows.append(row)
    widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows]
    lines.append("* = invariant with a monomial of exactly this degree; - = timeout; ? = unsupported spectrum; s = solvable; ! = error")
    return "\n".join(lines)


def bench_csv(results: list[BenchResult]) -> str:
    buf = io.StringIO()
    fields = list(BenchResult.__dataclass_fields__)
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for r in results:
        writer.writerow(asdict(r))
    return buf.getvalue()


def parse_degrees(text: str) -> list[int]:
    out: set[int] = set()
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..")
            out.update(range(int(lo), int(hi) + 1))
        elif part:
            out.add(int(part))
    if not out or min(out) < 1:
        raise UsageError(f"bad degree list {text!r}")
    return sorted(out)


def cmd_bench(args) -> int:
    root = Path(args.path) if args.path else benchmarks.directory()
    if not root.is_dir():
        raise FileNotFoundError(f"not a directory: {root}")
    files = sorted(root.glob("*.loop"))
    if not files:
        print(f"error: no .loop files in {root}", file=sys.stderr)
        return EXIT_INPUT
    degrees = parse_degrees(args.degrees)
    results = run_bench(files, degrees, args.mode, args.timeout_secs, args.jobs)
    if args.csv:
        Path(args.csv).write_text(bench_csv(results))
    if args.json:
        Path(args.json).write_text(json.dumps([asdict(r) for r in results], indent=2) + "\n")
    if (args.format or "text") == "json":
        print(json.dumps([asdict(r) for r in results], indent=2))
    else:
        print(bench_table(results, degrees))
    return EXIT_OK


# --------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="loopinvar", description="Closed-form invariants for loops with unsolvable recurrences.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, degree=True):
        p.add_argument("--format", choices=("json", "text"))
        if degree:
            p.add_argument("-d", "--degree", type=int, default=1)
            p.add_argument("--mode", choices=(PURE, FULL), default=PURE)

    p = sub.add_parser("analyze", help="effective/defective partition and dependency graph")
    p.add_argument("path")
    p.add_argument("--dot", metavar="FILE", help="write the dependency graph in DOT format")
    p.add_argument("--graph", choices=("auto", "recurrence", "assignment"), default="auto")
    common(p, degree=False)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("synth", help="synthesize invariants of a given degree")
    p.add_argument("path")
    common(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("check", help="synthesize and validate against exact unrolling")
    p.add_argument("path")
    common(p)
    p.add_argument("-n", "--iterations", type=int, default=8)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("bench", help="run the benchmark grid")
    p.add_argument("path", nargs="?", help="directory of .loop files (default: bundled corpus)")
    p.add_argument("--degrees", default="1..7")
    p.add_argument("--timeout-secs", type=float, default=60)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--mode", choices=(PURE, FULL), default=PURE)
    p.add_argument("--csv", metavar="FILE")
    p.add_argument("--json", metavar="FILE")
    p.add_argument("--format", choices=("json", "text"))
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "degree", 1) < 1:
        print("error: degree must be at least 1", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except INPUT_ERRORS + (UsageError,) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except UnsupportedSpectrum as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SPECTRUM
    except NoDefectiveVariables:
        print("the program has no defective variables, so its recurrence operator is solvable; nothing to synthesize", file=sys.stderr)
        return EXIT_SOLVABLE
    except LIMIT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_LIMIT


if __name__ == "__main__":
    sys.exit(main())
