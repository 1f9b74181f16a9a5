"""Synthesis of polynomials in defective variables with closed forms.

For a candidate ``S = sum_W c_W W`` over defective monomials of degree at
most ``d`` we look for every ``(kappa, c)`` such that

    R[S] = kappa * S + (a combination of effective monomials).

Splitting the monomials of ``R[S]`` into candidate monomials, other
defective monomials and effective monomials turns this into

    A_cand c = kappa c,   A_extra c = 0,

with the effective part read off afterwards.  We first restrict to the
kernel of ``A_extra`` and then solve a small eigenproblem on it, which yields
the complete solution space for rational ``kappa``.  Each solution gives
``S(n+1) = kappa S(n) + h(n)`` with ``h`` an exponential polynomial, which
is solved in closed form.
"""

from __future__ import annotations

import string
from dataclasses import dataclass, field
from math import comb
from typing import Callable

from gmpy2 import mpq

from loopinvar.algebra import ExpPolynomial, Polynomial, char_poly, grlex_key, kernel_basis, monomials_up_to, rational_roots, rref
from loopinvar.algebra.linalg import mat_vec
from loopinvar.algebra.polynomial import Monomial, format_monomial
from loopinvar.algebra.scalars import ScalarField, format_rational
from loopinvar.algebra.univariate import format_upoly
from loopinvar.cfinite import ClosedForm, closed_forms_for
from loopinvar.dependency import Partition, analyze
from loopinvar.errors import NoDefectiveVariables
from loopinvar.frontend import Program
from loopinvar.recurrences import MomentContext

PURE, FULL = "pure", "full"


@dataclass
class Candidate:
    degree: int
    monomials: list[Monomial]
    mode: str
    variables: tuple[str, ...]

    def names(self) -> list[str]:
        return [format_monomial(m, self.variables) for m in self.monomials]


@dataclass
class ConstraintSystem:
    candidate: Candidate
    A_cand: list[list]
    extra_monomials: list[Monomial]
    A_extra: list[list]
    effective_monomials: list[Monomial]
    effective_rows: list[list]

    @property
    def equation_count(self) -> int:
        trivial = (0,) * len(self.candidate.variables)
        effective = set(self.effective_monomials) | {trivial}
        return len(self.candidate.monomials) + len(self.extra_monomials) + len(effective)


@dataclass
class SolutionSpace:
    candidate: Candidate
    eigenspaces: list[tuple[object, list[list]]]
    # factor of the characteristic polynomial without rational roots (not searched)
    unexplored: str | None = None

    @property
    def dimension(self) -> int:
        return sum(len(b) for _, b in self.eigenspaces)

    def __bool__(self):
        return bool(self.eigenspaces)


@dataclass
class Invariant:
    degree: int
    kappa: object
    candidate: list[Monomial]
    variables: tuple[str, ...]
    coefficients: list
    weights: tuple[str, ...]
    basis: list[list]
    polynomial: Polynomial
    closed_form: ClosedForm
    kind: str
    field: ScalarField

    @property
    def valid_from(self) -> int:
        return self.closed_form.valid_from

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def has_degree(self, d: int) -> bool:
        return any(c and sum(m) == d for v in self.basis for m, c in zip(self.candidate, v))

    def value(self, n: int):
        return self.closed_form(n)

    def lhs(self) -> str:
        text = self.polynomial.format()
        return f"E[{text}]" if self.kind == "expectation" else text

    def format(self) -> str:
        rhs = self.closed_form.expr.format()
        suffix = f"  (n >= {self.valid_from})" if self.valid_from else ""
        return f"{self.lhs()} = {rhs}{suffix}"

    __str__ = format


# --------------------------------------------------------------------------
# candidate and constraints


def candidate_monomials(partition: Partition, variables: tuple[str, ...], degree: int, mode: str = PURE) -> Candidate:
    if not partition.defective:
        raise NoDefectiveVariables("no defective variables: the recurrence operator is solvable")
    if degree < 1:
        raise ValueError("candidate degree must be at least 1")
    defective = {variables.index(v) for v in partition.defective}
    if mode == PURE:
        monos = monomials_up_to(len(variables), degree, allowed=defective, mindeg=1)
    elif mode == FULL:
        monos = [m for m in monomials_up_to(len(variables), degree, mindeg=1) if any(m[i] for i in defective)]
    else:
        raise ValueError(f"unknown candidate mode {mode!r}")
    return Candidate(degree, monos, mode, variables)


def pure_candidate_count(defective: int, degree: int) -> int:
    return comb(degree + defective, defective) - 1


def constraint_matrices(ctx: MomentContext, partition: Partition, cand: Candidate, checkpoint=None) -> ConstraintSystem:
    effective = {ctx.variables.index(v) for v in partition.effective}
    index = {m: i for i, m in enumerate(cand.monomials)}
    n = len(cand.monomials)
    zero = ctx.field.zero
    cand_rows = [[zero] * n for _ in range(n)]
    extra: dict[Monomial, list] = {}
    eff: dict[Monomial, list] = {}
    for j, w in enumerate(cand.monomials):
        if checkpoint is not None:
            checkpoint()
        for t, c in ctx.recurrence_of(w).terms.items():
            if t in index:
                cand_rows[index[t]][j] = c
            elif all(e == 0 or i in effective for i, e in enumerate(t)):
                eff.setdefault(t, [zero] * n)[j] = c
            else:
                extra.setdefault(t, [zero] * n)[j] = c
    extra_monos = sorted(extra, key=grlex_key)
    eff_monos = sorted(eff, key=grlex_key)
    return ConstraintSystem(
        cand,
        cand_rows,
        extra_monos,
        [extra[m] for m in extra_monos],
        eff_monos,
        [eff[m] for m in eff_monos],
    )


# --------------------------------------------------------------------------
# solving


def solve_solution_space(sys: ConstraintSystem, field: ScalarField, checkpoint=None) -> SolutionSpace:
    """All (kappa, basis) with A_cand v = kappa v and A_extra v = 0, kappa rational."""
    cand = sys.candidate
    n = len(cand.monomials)
    if sys.A_extra:
        K, free = kernel_basis(sys.A_extra, n, field, checkpoint, with_free=True)
    else:
        K, free = _unit_vectors(n, field), list(range(n))
    if not K:
        return SolutionSpace(cand, [])
    k = len(K)
    AK = [mat_vec(sys.A_cand, vec, field) for vec in K]  # columns A_cand K
    B = [[AK[col][row] for col in range(k)] for row in free]
    cp = char_poly(B, field)
    roots, residual = rational_roots(cp, field)
    unexplored = format_upoly(residual, field, "kappa") if len(residual) > 1 else None
    free_set = set(free)
    spaces = []
    for kappa in sorted(roots):
        if checkpoint is not None:
            checkpoint()
        kap = field(kappa)
        rows = []
        for r_i, row in enumerate(free):
            rows.append({c: AK[c][row] - (kap if c == r_i else field.zero) for c in range(k) if AK[c][row] or c == r_i})
        for row in range(n):
            if row in free_set:
                continue
            entries = {c: AK[c][row] - kap * K[c][row] for c in range(k)}
            entries = {c: v for c, v in entries.items() if v}
            if entries:
                rows.append(entries)
        ys = kernel_basis(rows, k, field, checkpoint)
        if not ys:
            continue
        vectors = [[sum((y[c] * K[c][i] for c in range(k) if y[c] and K[c][i]), field.zero) for i in range(n)] for y in ys]
        spaces.append((kappa, canonical_basis(vectors, cand, field)))
    return SolutionSpace(cand, spaces, unexplored)


def _unit_vectors(n, field):
    return [[field.one if i == j else field.zero for i in range(n)] for j in range(n)]


def lex_order(cand: Candidate) -> list[int]:
    """Candidate positions sorted lexicographically ascending (x > y > ...)."""
    return sorted(range(len(cand.monomials)), key=lambda i: cand.monomials[i])


def canonical_basis(vectors: list[list], cand: Candidate, field: ScalarField) -> list[list]:
    """Deterministic basis of span(vectors).

    Reduced row echelon form with columns in ascending lexicographic order,
    so every basis vector owns one of the lex-smallest coordinates.  Over the
    rationals the basis is then scaled to integer entries by a common
    denominator; a single vector is made primitive with its first graded
    entry positive.
    """
    order = lex_order(cand)
    pos = {c: i for i, c in enumerate(order)}
    permuted = [{pos[c]: v for c, v in enumerate(vec) if v} for vec in vectors]
    reduced, _ = rref(permuted, len(order), field)
    basis = [[row.get(pos[c], field.zero) for c in range(len(order))] for row in reduced]
    if not all(field.is_constant(x) for vec in basis for x in vec):
        return basis
    lcm = 1
    for vec in basis:
        for x in vec:
            q = field.to_rational(x)
            lcm = _lcm(lcm, int(q.denominator))
    basis = [[x * lcm for x in vec] for vec in basis]
    if len(basis) == 1:
        vec = basis[0]
        g = 0
        for x in vec:
            g = _gcd(g, int(field.to_rational(x).numerator))
        lead = next(x for x in vec if x)
        sign = -1 if field.to_rational(lead) < 0 else 1
        basis = [[x * mpq(sign, g) for x in vec]]
    return basis


def _gcd(a, b):
    a, b = abs(a), abs(b)
    while b:
        a, b = b, a % b
    return a


def _lcm(a, b):
    return a * b // _gcd(a, b)


def verify_eigenpair(sys: ConstraintSystem, kappa, vec, field: ScalarField) -> bool:
    """Independent post-hoc check of A_cand v = kappa v and A_extra v = 0."""
    av = mat_vec(sys.A_cand, vec, field)
    if any(a - field(kappa) * v for a, v in zip(av, vec)):
        return False
    return not any(mat_vec(sys.A_extra, vec, field)) if sys.A_extra else True


# --------------------------------------------------------------------------
# invariants


def weight_names(count: int, taken) -> list[str]:
    taken = set(taken)
    out = []
    pool = list(string.ascii_lowercase)
    i = 0
    while len(out) < count:
        name = pool[i] if i < len(pool) else f"w{i - len(pool) + 1}"
        if name not in taken:
            out.append(name)
        i += 1
    return out


def invariant_for(
    ctx: MomentContext,
    partition: Partition,
    sys: ConstraintSystem,
    kappa,
    basis: list[list],
) -> Invariant:
    """Closed form for S = sum of weighted basis vectors (no weights for a single vector)."""
    cand = sys.candidate
    if len(basis) == 1:
        weights: tuple[str, ...] = ()
        W = ctx.value_field
        coeffs = [W(c) for c in basis[0]]
    else:
        taken = set(ctx.variables) | set(ctx.program.params) | set(ctx.atom_names.values())
        weights = tuple(weight_names(len(basis), taken))
        W = ctx.value_field.extend(weights)
        syms = [W.symbol(w) for w in weights]
        coeffs = [sum((s * W(vec[i]) for s, vec in zip(syms, basis) if vec[i]), W.zero) for i in range(len(cand.monomials))]
    form = closed_form_of_candidate(ctx, partition, sys, kappa, coeffs, W)
    poly = Polynomial(ctx.variables, W, {m: c for m, c in zip(cand.monomials, coeffs)})
    kind = "expectation" if ctx.probabilistic else "value"
    return Invariant(cand.degree, kappa, list(cand.monomials), ctx.variables, coeffs, weights, basis, poly, form, kind, W)


def closed_form_of_candidate(ctx, partition, sys: ConstraintSystem, kappa, coeffs, W: ScalarField) -> ClosedForm:
    """Solve S(n+1) = kappa S(n) + h(n) for the candidate with the given coefficients."""
    forms = closed_forms_for(ctx, partition.effective, sys.effective_monomials) if sys.effective_monomials else {}
    h = ClosedForm(ExpPolynomial(W))
    for m, row in zip(sys.effective_monomials, sys.effective_rows):
        c = sum((W(r) * x for r, x in zip(row, coeffs) if r and x), W.zero)
        if c:
            h = h + forms[m].convert(W).scale(c)
    s0 = W.zero
    for m, c in zip(sys.candidate.monomials, coeffs):
        if c:
            s0 = s0 + c * W(ctx.initial_moment(m))
    return solve_with_offset(kappa, h, s0, W)


def solve_with_offset(kappa, h: ClosedForm, s0, W: ScalarField) -> ClosedForm:
    """Closed form of S with S(0) = s0 and S(n+1) = kappa S(n) + h(n)."""
    kappa = mpq(kappa)
    k = W(kappa)
    start = h.valid_from
    values = [s0]
    for n in range(start):
        values.append(k * values[-1] + h(n))
    if kappa == 0:
        expr = h.expr.shift(-1) if h.expr else ExpPolynomial(W)
        prefix = values[: start + 1]
        return ClosedForm(expr, start + 1, tuple(prefix)).tightened()
    from loopinvar.algebra import solve_first_order

    tail = solve_first_order(kappa, h.expr.shift(start), values[start])
    expr = tail.shift(-start) if start else tail
    return ClosedForm(expr, start, tuple(values[:start])).tightened()


# --------------------------------------------------------------------------
# pipeline


@dataclass
class SynthesisResult:
    ctx: MomentContext
    partition: Partition
    candidate: Candidate
    system: ConstraintSystem
    space: SolutionSpace
    invariants: list[Invariant] = field(default_factory=list)

    def found_at_degree(self) -> bool:
        return any(inv.has_degree(self.candidate.degree) for inv in self.invariants)


def run_synthesis(
    program: Program | MomentContext,
    degree: int,
    mode: str = PURE,
    checkpoint: Callable[[], None] | None = None,
    closed_forms: bool = True,
    sizes: dict | None = None,
) -> SynthesisResult:
    """The whole pipeline; ``sizes`` receives the system size as soon as it is known."""
    ctx = program if isinstance(program, MomentContext) else MomentContext(program)
    _, part = analyze(ctx)
    cand = candidate_monomials(part, ctx.variables, degree, mode)
    if sizes is not None:
        sizes["candidate_count"] = len(cand.monomials)
    if checkpoint is not None:
        checkpoint()
    sys = constraint_matrices(ctx, part, cand, checkpoint)
    if sizes is not None:
        sizes["equation_count"] = sys.equation_count
    space = solve_solution_space(sys, ctx.field, checkpoint)
    result = SynthesisResult(ctx, part, cand, sys, space)
    if closed_forms:
        for kappa, basis in space.eigenspaces:
            if checkpoint is not None:
                checkpoint()
            result.invariants.append(invariant_for(ctx, part, sys, kappa, basis))
    return result


def synthesize(program: Program | MomentContext, degree: int, mode: str = PURE, checkpoint=None) -> list[Invariant]:
    """Invariants of the given candidate degree; empty when no well-behaved polynomial exists."""
    return run_synthesis(program, degree, mode, checkpoint).invariants


@dataclass(frozen=True)
class SystemSize:
    candidate_count: int
    equation_count: int


def system_size(program: Program | MomentContext, degree: int, mode: str = PURE) -> SystemSize:
    ctx = program if isinstance(program, MomentContext) else MomentContext(program)
    _, part = analyze(ctx)
    cand = candidate_monomials(part, ctx.variables, degree, mode)
    sys = constraint_matrices(ctx, part, cand)
    return SystemSize(len(cand.monomials), sys.equation_count)


def format_kappa(kappa) -> str:
    return format_rational(kappa)
