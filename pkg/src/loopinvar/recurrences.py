"""The recurrence operator: one-step moment pushforward of polynomials.

``pushforward(p)`` is the polynomial ``q`` with ``E[p(next state)] =
q(current state)``.  Statements are processed from the end of the body to
the start: assignments substitute, probabilistic choices average over the
branches and a draw replaces powers of the drawn variable by moments of its
distribution.  For deterministic programs this is plain bottom-up
substitution.
"""

from __future__ import annotations

from math import comb
from typing import Mapping

from loopinvar.algebra import Polynomial, ScalarField, scalar_field
from loopinvar.algebra.polynomial import Monomial
from loopinvar.errors import InvalidDistribution
from loopinvar.frontend import (
    Add,
    Assign,
    Choice,
    Distribution,
    Draw,
    Mul,
    Neg,
    Num,
    Pow,
    Program,
    Sym,
    desugar,
    expr_to_scalar,
)


def expr_to_poly(e, variables: tuple[str, ...], field: ScalarField) -> Polynomial:
    """Expand an expression tree into a Polynomial; parameters become field symbols."""
    if isinstance(e, Num):
        return Polynomial.constant(variables, field, e.value)
    if isinstance(e, Sym):
        if e.name in variables:
            return Polynomial.var(variables, field, e.name)
        return Polynomial.constant(variables, field, field.symbol(e.name))
    if isinstance(e, Neg):
        return -expr_to_poly(e.arg, variables, field)
    if isinstance(e, Add):
        acc = Polynomial(variables, field)
        for t in e.terms:
            acc = acc + expr_to_poly(t, variables, field)
        return acc
    if isinstance(e, Mul):
        acc = Polynomial.constant(variables, field, 1)
        for t in e.factors:
            acc = acc * expr_to_poly(t, variables, field)
        return acc
    if isinstance(e, Pow):
        return expr_to_poly(e.base, variables, field) ** e.exp
    raise TypeError(f"cannot convert {e!r} to a polynomial")


def initial_value_names(program: Program) -> dict[str, str]:
    """Symbol used for the unknown initial value of each variable, e.g. x -> x0."""
    taken = set(program.vars) | set(program.params)
    names = {}
    for v in program.vars:
        name = f"{v}0"
        if name in taken:
            name = f"{v}_init"
        taken.add(name)
        names[v] = name
    return names


class MomentContext:
    """Recurrence operator of one program, with memoised monomial images.

    ``field`` holds coefficients (rational functions of the parameters);
    ``value_field`` additionally contains the symbolic initial values of
    variables that the initialisation leaves unset.
    """

    def __init__(self, program: Program):
        if program.has_sugar:
            program = desugar(program)
        self.program = program
        self.variables = tuple(program.vars)
        self.field = scalar_field(tuple(program.params))
        self.probabilistic = program.is_probabilistic
        self._body_deterministic = all(isinstance(s, Assign) for s in program.body)
        initialised = _definitely_assigned(program.inits)
        self.atom_names = {v: n for v, n in initial_value_names(program).items() if v not in initialised}
        self.value_field = self.field.extend(self.atom_names[v] for v in self.variables if v in self.atom_names)
        self._moments: dict = {}
        self._images: dict[Monomial, Polynomial] = {}
        self._initial: dict[Monomial, object] = {}
        self._zero = Polynomial(self.variables, self.field)
        self._convert: dict = {}

    # helpers -------------------------------------------------------------

    def poly(self, e) -> Polynomial:
        key = id(e)
        hit = self._convert.get(key)
        if hit is None or hit[0] is not e:
            hit = (e, expr_to_poly(e, self.variables, self.field))
            self._convert[key] = hit
        return hit[1]

    def monomial(self, m: Monomial) -> Polynomial:
        return Polynomial.monomial(self.variables, self.field, tuple(m))

    def var(self, name: str) -> Polynomial:
        return Polynomial.var(self.variables, self.field, name)

    # distribution moments ------------------------------------------------------

    def dist_moment(self, d: Distribution, k: int) -> Polynomial:
        """E[X^k] for X ~ d, as a polynomial (constant unless arguments read state)."""
        key = (d, k)
        hit = self._moments.get(key)
        if hit is not None:
            return hit
        one = Polynomial.constant(self.variables, self.field, 1)
        args = [self.poly(a) for a in d.args]
        if k == 0:
            value = one
        elif d.kind == "Bernoulli":
            value = args[0]
        elif d.kind == "Normal":
            mean, var = args
            value = self._zero
            for j in range(0, k + 1, 2):
                value = value + (mean ** (k - j)) * (var ** (j // 2)) * (comb(k, j) * _double_factorial(j - 1))
        elif d.kind == "Uniform":
            low, high = args
            value = self._zero
            for i in range(k + 1):
                value = value + (low**i) * (high ** (k - i))
            value = value * (self.field.one / (k + 1))
        else:  # pragma: no cover - rejected by Distribution itself
            raise InvalidDistribution(d.kind)
        self._moments[key] = value
        return value

    # the operator --------------------------------------------------------------

    def recurrence_of(self, m: Monomial) -> Polynomial:
        """R[m]: the polynomial giving E[m] one iteration later."""
        m = tuple(m)
        hit = self._images.get(m)
        if hit is not None:
            return hit
        if not any(m):
            image = Polynomial.constant(self.variables, self.field, 1)
        elif self._body_deterministic and sum(m) > 1:
            # substitution is a ring homomorphism: R[m] = R[m / x] * R[x]
            i = next(j for j, e in enumerate(m) if e)
            rest = list(m)
            rest[i] -= 1
            unit = [0] * len(m)
            unit[i] = 1
            image = self.recurrence_of(tuple(rest)) * self.recurrence_of(tuple(unit))
        else:
            image = self.run_block(self.monomial(m), self.program.body)
        self._images[m] = image
        return image

    def pushforward(self, p: Polynomial) -> Polynomial:
        """E[p after one loop iteration] as a polynomial in the current state."""
        acc: dict = {}
        for m, c in p.terms.items():
            for tm, tc in self.recurrence_of(m).terms.items():
                v = acc.get(tm)
                acc[tm] = tc * c if v is None else v + tc * c
        return Polynomial(self.variables, self.field, acc)

    def run_block(self, p: Polynomial, block) -> Polynomial:
        for s in reversed(block):
            p = self.run_statement(p, s)
        return p

    def run_statement(self, p: Polynomial, s) -> Polynomial:
        if isinstance(s, Assign):
            touched = p.used_variables().intersection(s.targets)
            if not touched:
                return p
            return p.partial_compose({t: self.poly(e) for t, e in zip(s.targets, s.exprs) if t in touched})
        if isinstance(s, Draw):
            return self._apply_draw(p, s)
        if isinstance(s, Choice):
            acc = self._zero
            for prob, block in s.branches:
                acc = acc + self.run_block(p, block) * expr_to_scalar(prob, self.field)
            return acc
        raise TypeError(f"unexpected statement {s!r}")

    def _apply_draw(self, p: Polynomial, s: Draw) -> Polynomial:
        i = self.variables.index(s.target)
        if p.degree_in(s.target) <= 0:
            return p
        groups: dict[int, dict] = {}
        for m, c in p.terms.items():
            rest = m[:i] + (0,) + m[i + 1 :]
            groups.setdefault(m[i], {})[rest] = c
        acc = self._zero
        for k, terms in groups.items():
            part = Polynomial(self.variables, self.field, terms)
            acc = acc + (part if k == 0 else part * self.dist_moment(s.dist, k))
        return acc

    # initial state -----------------------------------------------------------------

    def initial_moment(self, m: Monomial):
        """E[m] right after the initialisation block, in ``value_field``."""
        m = tuple(m)
        hit = self._initial.get(m)
        if hit is None:
            hit = self.initial_value(self.monomial(m))
            self._initial[m] = hit
        return hit

    def initial_value(self, p: Polynomial):
        """E[p] right after the initialisation block, for any polynomial p."""
        q = self.run_block(p, self.program.inits)
        F = self.value_field
        values = {v: F.symbol(self.atom_names[v]) for v in q.used_variables()}
        total = F.zero
        for mono, c in q.terms.items():
            t = F(c)
            for name, e in zip(self.variables, mono):
                if e:
                    t = t * values[name] ** e
            total = total + t
        return total

    def initial_value_at(self, p: Polynomial, values: Mapping | None = None):
        """Like :meth:`initial_value` but with unset variables bound to given values."""
        q = self.run_block(p, self.program.inits)
        if not values:
            return self.initial_value(p)
        F = self.value_field
        total = F.zero
        for mono, c in q.terms.items():
            t = F(c)
            for name, e in zip(self.variables, mono):
                if e:
                    v = values[name] if name in values else F.symbol(self.atom_names[name])
                    t = t * F(v) ** e
            total = total + t
        return total


def _double_factorial(n: int) -> int:
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


def _definitely_assigned(inits) -> set[str]:
    out: set[str] = set()
    for s in inits:
        if isinstance(s, Assign):
            out.update(s.targets)
        elif isinstance(s, Draw):
            out.add(s.target)
    return out


def recurrence_system(ctx: MomentContext) -> dict[str, Polynomial]:
    """R[x] for every program variable."""
    out = {}
    for i, v in enumerate(ctx.variables):
        m = [0] * len(ctx.variables)
        m[i] = 1
        out[v] = ctx.recurrence_of(tuple(m))
    return out
