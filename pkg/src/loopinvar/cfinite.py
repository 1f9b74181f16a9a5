"""Closed forms for expected values of effective monomials.

The moments of effective variables are closed under the recurrence
operator, so a finite set of monomials satisfies a linear system
``u(n+1) = A u(n)``.  Its closed forms come from an ansatz over the rational
roots of ``det(xI - A)``: the sequence is unrolled exactly and the
coefficients of ``n^j * lam^n`` are fitted by a linear solve, then checked
against an extra term.

A zero root means a component of the state is forgotten after finitely many
steps (e.g. a variable that is redrawn every iteration).  Such sequences are
exponential polynomials only from some index on; :class:`ClosedForm` records
that index together with the exact values before it.
"""

from __future__ import annotations

from dataclasses import dataclass

from gmpy2 import mpq

from loopinvar.algebra import ExpPolynomial, Polynomial, char_poly, grlex_key, rational_roots, scalar_field
from loopinvar.algebra.linalg import inverse, mat_vec
from loopinvar.algebra.polynomial import Monomial
from loopinvar.algebra.univariate import format_upoly
from loopinvar.errors import ClosureBudgetExceeded, DefectiveLeak, UnsupportedSpectrum
from loopinvar.recurrences import MomentContext

CLOSURE_BUDGET = 5000


@dataclass
class ClosureSystem:
    """E[m_i(n+1)] = sum_j matrix[i][j] E[m_j(n)] over ``monomials``."""

    monomials: list[Monomial]
    matrix: list[list]
    init: list
    ctx: MomentContext

    @property
    def dim(self) -> int:
        return len(self.monomials)

    def unroll(self, steps: int) -> list[list]:
        """State vectors for n = 0..steps, in the context's value field."""
        F = self.ctx.value_field
        A = [[F(a) for a in row] for row in self.matrix]
        vecs = [list(self.init)]
        for _ in range(steps):
            vecs.append(mat_vec(A, vecs[-1], F))
        return vecs


@dataclass
class ClosedForm:
    """A sequence equal to ``expr(n)`` for n >= valid_from and to ``initial[n]`` before."""

    expr: ExpPolynomial
    valid_from: int = 0
    initial: tuple = ()

    def __call__(self, n: int):
        if n < self.valid_from:
            return self.initial[n]
        return self.expr.evaluate(n)

    def __add__(self, other: "ClosedForm") -> "ClosedForm":
        start = max(self.valid_from, other.valid_from)
        values = tuple(self(n) + other(n) for n in range(start))
        return ClosedForm(self.expr + other.expr, start, values).tightened()

    def scale(self, c) -> "ClosedForm":
        return ClosedForm(self.expr.scale(c), self.valid_from, tuple(v * c for v in self.initial)).tightened()

    def tightened(self) -> "ClosedForm":
        """Lower ``valid_from`` while the expression already matches the stored values."""
        start = self.valid_from
        while start > 0 and self.expr.evaluate(start - 1) == self.initial[start - 1]:
            start -= 1
        return ClosedForm(self.expr, start, self.initial[:start])

    def convert(self, field) -> "ClosedForm":
        return ClosedForm(self.expr.convert(field), self.valid_from, tuple(field(v) for v in self.initial))


def moment_closure(ctx: MomentContext, effective, targets, budget: int = CLOSURE_BUDGET) -> ClosureSystem:
    """Smallest monomial set containing ``targets`` and closed under the operator."""
    eff_index = {ctx.variables.index(v) for v in effective}
    trivial = (0,) * len(ctx.variables)
    seen = {trivial}
    work = []
    for m in targets:
        m = tuple(m)
        _check_effective(ctx, m, eff_index, "target")
        if m not in seen:
            seen.add(m)
            work.append(m)
    images = {trivial: ctx.recurrence_of(trivial)}
    while work:
        m = work.pop()
        image = ctx.recurrence_of(m)
        images[m] = image
        for t in image.terms:
            if t not in seen:
                _check_effective(ctx, t, eff_index, f"image of {_fmt(ctx, m)}")
                seen.add(t)
                work.append(t)
                if len(seen) > budget:
                    raise ClosureBudgetExceeded(f"moment closure exceeded {budget} monomials")
    monomials = sorted((m for m in seen if any(m)), key=grlex_key) + [trivial]
    pos = {m: i for i, m in enumerate(monomials)}
    zero = ctx.field.zero
    matrix = []
    for m in monomials:
        row = [zero] * len(monomials)
        for t, c in images[m].terms.items():
            row[pos[t]] = c
        matrix.append(row)
    init = [ctx.initial_moment(m) for m in monomials]
    return ClosureSystem(monomials, matrix, init, ctx)


def _fmt(ctx, m):
    return Polynomial.monomial(ctx.variables, ctx.field, m).format()


def _check_effective(ctx, m, eff_index, where):
    bad = [ctx.variables[i] for i, e in enumerate(m) if e and i not in eff_index]
    if bad:
        raise DefectiveLeak(f"defective variable(s) {', '.join(bad)} in {where}: {_fmt(ctx, m)}")


def spectrum(system: ClosureSystem) -> dict:
    """Rational eigenvalues of the closure matrix with multiplicities."""
    field = system.ctx.field
    cp = char_poly(system.matrix, field)
    roots, residual = rational_roots(cp, field)
    if len(residual) > 1:
        raise UnsupportedSpectrum(format_upoly(residual, field, "x"))
    return roots


def closed_forms(system: ClosureSystem) -> dict[Monomial, ClosedForm]:
    """Closed form of every monomial of the closure system."""
    roots = spectrum(system)
    F = system.ctx.value_field
    zero_mult = roots.get(mpq(0), 0)
    basis = [(lam, j) for lam, mult in roots.items() if lam != 0 for j in range(mult)]
    D = len(basis)
    start = zero_mult
    vecs = system.unroll(start + D + 1)
    Q = scalar_field()
    if D:
        V = [[_basis_value(lam, j, n) for lam, j in basis] for n in range(start, start + D)]
        Vinv = inverse(V, Q)
        Vinv = [[F(c) for c in row] for row in Vinv]
    out = {}
    for i, m in enumerate(system.monomials):
        seq = [v[i] for v in vecs]
        coeffs = mat_vec(Vinv, seq[start : start + D], F) if D else []
        terms: dict = {}
        for (lam, j), a in zip(basis, coeffs):
            cs = terms.setdefault(lam, [F.zero] * roots[lam])
            cs[j] = a
        expr = ExpPolynomial(F, terms)
        check = start + D
        if expr.evaluate(check) != seq[check]:  # pragma: no cover - would mean an arithmetic bug
            raise ArithmeticError(f"closed form of {_fmt(system.ctx, m)} fails at n = {check}")
        form = ClosedForm(expr, start, tuple(seq[:start])).tightened()
        out[m] = form
    return out


def _basis_value(lam, j, n):
    return mpq(n) ** j * lam**n


def closed_forms_for(ctx: MomentContext, effective, monomials) -> dict[Monomial, ClosedForm]:
    """Closed forms of the given effective monomials, memoised on the context."""
    cache = ctx.__dict__.setdefault("_closed_forms", {})
    missing = [tuple(m) for m in monomials if tuple(m) not in cache]
    if missing:
        system = moment_closure(ctx, effective, missing)
        cache.update(closed_forms(system))
    return {tuple(m): cache[tuple(m)] for m in monomials}


def closed_form_of_polynomial(ctx: MomentContext, effective, p: Polynomial) -> ClosedForm:
    """Closed form of E[p(n)] for a polynomial over effective variables."""
    forms = closed_forms_for(ctx, effective, list(p.terms))
    F = ctx.value_field
    total = ClosedForm(ExpPolynomial(F))
    for m, c in p.terms.items():
        total = total + forms[m].scale(F(c))
    return total
