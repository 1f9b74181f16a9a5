"""Variable dependency graphs and the effective/defective partition.

An edge ``x -> y`` means the update of ``x`` reads ``y``; it is labelled
``N`` when some monomial witnessing the dependency has degree at least two.
A variable is defective when it lies on, or can reach, a cycle through an
``N`` edge.  The recurrence operator is solvable exactly when no variable is
defective.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from loopinvar.errors import TooLarge
from loopinvar.frontend import Assign, Choice, Draw, Program, desugar, occurrence_degrees
from loopinvar.recurrences import MomentContext

LINEAR, NONLINEAR = "L", "N"


@dataclass
class DependencyGraph:
    vertices: tuple[str, ...]
    labels: dict[tuple[str, str], str] = field(default_factory=dict)

    @property
    def edges(self) -> set[tuple[str, str]]:
        return set(self.labels)

    def add(self, src: str, dst: str, nonlinear: bool):
        if nonlinear or self.labels.get((src, dst)) != NONLINEAR:
            self.labels[(src, dst)] = NONLINEAR if nonlinear else LINEAR

    def successors(self, v: str) -> list[str]:
        return [b for (a, b) in self.labels if a == v]

    def predecessors(self, v: str) -> list[str]:
        return [a for (a, b) in self.labels if b == v]

    def reachable_from(self, v: str) -> set[str]:
        return _dfs(v, self.successors)

    def reaching(self, v: str) -> set[str]:
        """Vertices with a path to ``v`` (``v`` included)."""
        return _dfs(v, self.predecessors)

    def to_dot(self, partition: "Partition | None" = None) -> str:
        lines = ["digraph dependencies {"]
        for v in self.vertices:
            attrs = ""
            if partition is not None:
                attrs = ' [style=filled, fillcolor="#f4cccc"]' if v in partition.defective else ""
            lines.append(f'  "{v}"{attrs};')
        for (a, b) in sorted(self.labels, key=lambda e: (self.vertices.index(e[0]), self.vertices.index(e[1]))):
            lines.append(f'  "{a}" -> "{b}" [label="{self.labels[(a, b)]}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def _dfs(start: str, step) -> set[str]:
    seen = {start}
    stack = [start]
    while stack:
        v = stack.pop()
        for w in step(v):
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return seen


@dataclass(frozen=True)
class Partition:
    effective: tuple[str, ...]
    defective: tuple[str, ...]

    @property
    def solvable(self) -> bool:
        return not self.defective


# --------------------------------------------------------------------------
# graph construction


def build_graph(program: Program | MomentContext, mode: str = "auto") -> DependencyGraph:
    """Dependency graph of a program.

    ``mode`` is ``"recurrence"`` (edges read off the expanded R[x]),
    ``"assignment"`` (edges read off the update expressions) or ``"auto"``,
    which picks assignment level exactly for probabilistic programs.
    """
    ctx = program if isinstance(program, MomentContext) else MomentContext(program)
    if mode == "auto":
        mode = "assignment" if ctx.probabilistic else "recurrence"
    if mode == "recurrence":
        return _recurrence_graph(ctx)
    if mode == "assignment":
        return _assignment_graph(ctx.program)
    raise ValueError(f"unknown graph mode {mode!r}")


def _recurrence_graph(ctx: MomentContext) -> DependencyGraph:
    g = DependencyGraph(ctx.variables)
    n = len(ctx.variables)
    for i, x in enumerate(ctx.variables):
        unit = tuple(1 if j == i else 0 for j in range(n))
        for m in ctx.recurrence_of(unit).terms:
            deg = sum(m)
            for j, e in enumerate(m):
                if e:
                    g.add(x, ctx.variables[j], deg >= 2)
    return g


def _assignment_graph(program: Program) -> DependencyGraph:
    if program.has_sugar:
        program = desugar(program)
    g = DependencyGraph(tuple(program.vars))
    counted = set(program.vars)
    for target, e in _updates(program.body):
        for y in program.vars:
            degrees = occurrence_degrees(e, y, counted)
            if degrees:
                g.add(target, y, max(degrees) >= 2)
    return g


def _updates(stmts) -> Iterable[tuple[str, object]]:
    for s in stmts:
        if isinstance(s, Assign):
            yield from zip(s.targets, s.exprs)
        elif isinstance(s, Draw):
            for a in s.dist.args:
                yield s.target, a
        elif isinstance(s, Choice):
            for _, block in s.branches:
                yield from _updates(block)


# --------------------------------------------------------------------------
# classification


def partition(graph: DependencyGraph) -> Partition:
    """Effective and defective variables, following the N-edge cycle search."""
    defective: set[str] = set()
    for (x, y), label in graph.labels.items():
        if label != NONLINEAR:
            continue
        if x == y:
            defective |= graph.reaching(x)
        elif x in graph.reachable_from(y):
            defective |= graph.reaching(y)
    eff = tuple(v for v in graph.vertices if v not in defective)
    dfc = tuple(v for v in graph.vertices if v in defective)
    return Partition(eff, dfc)


def is_solvable(program: Program | MomentContext, mode: str = "auto") -> tuple[bool, Partition]:
    part = partition(build_graph(program, mode))
    return part.solvable, part


def analyze(program: Program | MomentContext, mode: str = "auto") -> tuple[DependencyGraph, Partition]:
    graph = build_graph(program, mode)
    return graph, partition(graph)


# --------------------------------------------------------------------------
# brute-force solvability search


def ordered_partitions(items: tuple[str, ...]):
    """All ordered set partitions (W1, ..., Wk) of ``items``."""
    if not items:
        yield ()
        return
    first, rest = items[0], items[1:]
    for part in ordered_partitions(rest):
        # put ``first`` into an existing block, or into a new block at any position
        for i in range(len(part)):
            yield part[:i] + (part[i] | {first},) + part[i + 1 :]
        for i in range(len(part) + 1):
            yield part[:i] + (frozenset({first}),) + part[i:]


def brute_force_solvable(program: Program | MomentContext, max_vars: int = 5) -> bool:
    """Search every ordered variable partition for the block-triangular linear shape."""
    ctx = program if isinstance(program, MomentContext) else MomentContext(program)
    names = ctx.variables
    if len(names) > max_vars:
        raise TooLarge(f"{len(names)} variables exceed the brute-force limit of {max_vars}")
    n = len(names)
    recs = {}
    for i, x in enumerate(names):
        recs[x] = [
            frozenset(names[j] for j, e in enumerate(m) if e) | ({"^"} if sum(m) >= 2 else set())
            for m in ctx.recurrence_of(tuple(1 if j == i else 0 for j in range(n))).terms
        ]
    for blocks in ordered_partitions(names):
        level = {v: k for k, block in enumerate(blocks) for v in block}
        if all(_fits(level, x, recs[x]) for x in names):
            return True
    return False


def _fits(level: dict[str, int], x: str, monomials) -> bool:
    j = level[x]
    for support in monomials:
        vars_in = support - {"^"}
        levels = [level[v] for v in vars_in]
        if not levels or max(levels) < j:
            continue
        # a monomial touching block j must be a single block-j variable to the first power
        if max(levels) > j or len(vars_in) != 1 or "^" in support:
            return False
    return True


def defective_by_definition(graph: DependencyGraph) -> set[str]:
    """Independent check: vertices reaching a strongly connected N-cycle."""
    bad = set()
    for (x, y), label in graph.labels.items():
        if label == NONLINEAR and x in graph.reachable_from(y):
            bad.add(x)
    out = set()
    for v in graph.vertices:
        if graph.reachable_from(v) & bad:
            out.add(v)
    return out


__all__ = [
    "DependencyGraph",
    "Partition",
    "analyze",
    "brute_force_solvable",
    "build_graph",
    "defective_by_definition",
    "is_solvable",
    "ordered_partitions",
    "partition",
]
