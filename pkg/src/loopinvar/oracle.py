"""Independent evaluation of programs, used to validate synthesized invariants.

``unroll_expectation`` pushes a polynomial backwards through the loop body
``n`` times and evaluates it on the initial state.  No closed forms are
involved, so agreement with a synthesized invariant is real evidence.
``interpret`` runs a deterministic loop on concrete values and
``monte_carlo`` samples a probabilistic one; both are cruder cross-checks.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

import numpy as np

from loopinvar.algebra import Polynomial, format_rational, to_mpq
from loopinvar.errors import BudgetExceeded, ValidationError
from loopinvar.frontend import (
    Add,
    Assign,
    Choice,
    Draw,
    If,
    InlineChoice,
    Mul,
    Neg,
    Num,
    Pow,
    Program,
    Sym,
)
from loopinvar.recurrences import MomentContext

TERM_BUDGET = 200_000
WEIGHT_SAMPLES = ((2, 3), (-1, 5), (7, -2))


def unroll_polynomials(ctx: MomentContext, p: Polynomial, n: int, budget: int = TERM_BUDGET) -> list[Polynomial]:
    """[p, R[p], R[R[p]], ...] up to n applications of the recurrence operator."""
    if n < 0:
        raise ValueError("iteration count must be non-negative")
    out = [p]
    for k in range(n):
        q = ctx.pushforward(out[-1])
        if len(q.terms) > budget:
            raise BudgetExceeded(f"pushforward at n = {k + 1} has {len(q.terms)} terms (budget {budget})", reached=k)
        out.append(q)
    return out


def unroll_expectation(ctx: MomentContext, p: Polynomial, n: int, budget: int = TERM_BUDGET):
    """E[p(state at iteration n)] exactly, in the context's value field."""
    return ctx.initial_value(unroll_polynomials(ctx, p, n, budget)[-1])


def unroll_sequence(ctx: MomentContext, p: Polynomial, n_max: int, budget: int = TERM_BUDGET) -> list:
    """E[p] at iterations 0..n_max."""
    return [ctx.initial_value(q) for q in unroll_polynomials(ctx, p, n_max, budget)]


# --------------------------------------------------------------------------
# checking invariants


@dataclass
class CheckRow:
    n: int
    expected: object
    actual: object
    equal: bool


@dataclass
class CheckReport:
    invariant: str
    rows: list[CheckRow] = field(default_factory=list)
    # rational values substituted for free weights, each checked separately
    instantiations: list[dict] = field(default_factory=list)
    truncated_at: int | None = None

    @property
    def passed(self) -> bool:
        return all(r.equal for r in self.rows)

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    @property
    def first_failure(self) -> int | None:
        return next((r.n for r in self.rows if not r.equal), None)

    def to_json(self, field_) -> dict:
        return {
            "invariant": self.invariant,
            "verdict": self.verdict,
            "first_failure": self.first_failure,
            "truncated_at": self.truncated_at,
            "rows": [
                {"n": r.n, "expected": field_.format(r.expected), "actual": field_.format(r.actual), "equal": r.equal}
                for r in self.rows
            ],
        }


def check(ctx: MomentContext, invariant, n_max: int = 8, budget: int = TERM_BUDGET) -> CheckReport:
    """Compare an invariant's closed form with the unrolled expectation for n in valid_from..n_max.

    The sequence of each basis vector is unrolled separately, so invariants
    carrying free weights are compared symbolically; the comparison is then
    repeated at a few rational values of the weights.
    """
    W = invariant.field
    report = CheckReport(invariant.format())
    start = invariant.valid_from
    if n_max < start:
        raise ValueError(f"n_max = {n_max} is below valid_from = {start}")
    if invariant.weights:
        syms = [W.symbol(w) for w in invariant.weights]
        parts = [(s, _basis_polynomial(ctx, invariant, vec)) for s, vec in zip(syms, invariant.basis)]
    else:
        parts = [(W.one, _basis_polynomial(ctx, invariant, None))]
    seqs = []
    reached = n_max
    for _, p in parts:
        try:
            seqs.append(unroll_sequence(ctx, p, n_max, budget))
        except BudgetExceeded as exc:
            reached = min(reached, exc.reached)
            seqs.append(unroll_sequence(ctx, p, exc.reached, budget))
    if reached < n_max:
        report.truncated_at = reached
    for n in range(start, reached + 1):
        expected = sum((s * W(seq[n]) for (s, _), seq in zip(parts, seqs)), W.zero)
        actual = invariant.closed_form(n)
        report.rows.append(CheckRow(n, expected, actual, expected == actual))
    symbolic = list(report.rows)
    for a, b in WEIGHT_SAMPLES[: 3 if invariant.weights else 0]:
        values = {w: Fraction(a * (i + 1), b) for i, w in enumerate(invariant.weights)}
        report.instantiations.append(values)
        for row in symbolic:
            if W.substitute(row.expected, values) != W.substitute(row.actual, values):
                report.rows.append(CheckRow(row.n, row.expected, row.actual, False))
    return report


def _basis_polynomial(ctx: MomentContext, invariant, vec) -> Polynomial:
    """The candidate polynomial for one basis vector, with coefficients in ``ctx.field``."""
    F = ctx.field
    src = invariant.field if vec is None else F
    entries = invariant.coefficients if vec is None else vec
    coeffs = [src.to_rational(c) if F.is_rational else F(c) for c in entries]
    return Polynomial(ctx.variables, F, {m: c for m, c in zip(invariant.candidate, coeffs) if c})


# --------------------------------------------------------------------------
# concrete execution


def evaluate_expr(e, env: Mapping, const=Fraction):
    """Evaluate an expression tree; ``const`` converts literals (Fraction or float)."""
    if isinstance(e, Num):
        return const(e.value)
    if isinstance(e, Sym):
        return env[e.name]
    if isinstance(e, Neg):
        return -evaluate_expr(e.arg, env, const)
    if isinstance(e, Add):
        acc = const(0)
        for t in e.terms:
            acc = acc + evaluate_expr(t, env, const)
        return acc
    if isinstance(e, Mul):
        acc = const(1)
        for t in e.factors:
            acc = acc * evaluate_expr(t, env, const)
        return acc
    if isinstance(e, Pow):
        return evaluate_expr(e.base, env, const) ** e.exp
    raise TypeError(f"cannot evaluate {e!r}")


def interpret(program: Program, n: int, values: Mapping | None = None) -> dict[str, Fraction]:
    """State of a deterministic loop after n iterations, with exact Fractions.

    ``values`` binds parameters and variables the initialisation leaves unset.
    """
    if program.is_probabilistic:
        raise ValidationError("interpret only runs deterministic programs")
    env = {k: Fraction(v) for k, v in (values or {}).items()}
    _exec_exact(program.inits, env)
    for _ in range(n):
        _exec_exact(program.body, env)
    missing = [v for v in program.vars if v not in env]
    if missing:
        raise ValidationError(f"no value for {', '.join(missing)}")
    return {v: env[v] for v in program.vars}


def _exec_exact(stmts, env):
    for s in stmts:
        new = [Fraction(evaluate_expr(e, env)) for e in s.exprs]
        env.update(zip(s.targets, new))


def enumerate_states(program: Program, n: int, values: Mapping | None = None) -> dict[tuple, Fraction]:
    """Exact distribution of the state after n iterations, for discrete programs.

    Only Bernoulli draws and finite choices are allowed; the result maps
    state tuples (ordered like ``program.vars``) to probabilities.
    """
    start = {k: Fraction(v) for k, v in (values or {}).items()}
    dist = {_freeze(start): Fraction(1)}
    dist = _exec_discrete(program.inits, dist)
    for _ in range(n):
        dist = _exec_discrete(program.body, dist)
    out: dict[tuple, Fraction] = {}
    for state, prob in dist.items():
        env = dict(state)
        key = tuple(env.get(v) for v in program.vars)
        out[key] = out.get(key, 0) + prob
    return out


def expectation_by_enumeration(program: Program, p: Polynomial, n: int, values: Mapping | None = None) -> Fraction:
    total = Fraction(0)
    for state, prob in enumerate_states(program, n, values).items():
        env = dict(zip(program.vars, state))
        total += prob * _poly_at(p, env, values or {})
    return total


def _poly_at(p: Polynomial, env, values) -> Fraction:
    total = Fraction(0)
    for m, c in p.terms.items():
        q = p.field.specialize(c, values)
        term = Fraction(int(q.numerator), int(q.denominator))
        for name, e in zip(p.variables, m):
            if e:
                term *= env[name] ** e
        total += term
    return total


def _freeze(env: dict) -> tuple:
    return tuple(sorted(env.items()))


def _exec_discrete(stmts, dist: dict) -> dict:
    for s in stmts:
        out: dict = {}
        for state, prob in dist.items():
            for env, q in _step_discrete(s, dict(state)):
                key = _freeze(env)
                out[key] = out.get(key, 0) + prob * q
        dist = out
    return dist


def _step_discrete(s, env):
    """Successor environments of one statement with their probabilities."""
    if isinstance(s, Assign):
        if any(isinstance(e, InlineChoice) for e in s.exprs):
            e = s.exprs[0]
            p = Fraction(evaluate_expr(e.prob, env))
            return [({**env, s.targets[0]: evaluate_expr(e.left, env)}, p), ({**env, s.targets[0]: evaluate_expr(e.right, env)}, 1 - p)]
        new = [evaluate_expr(e, env) for e in s.exprs]
        return [({**env, **dict(zip(s.targets, new))}, Fraction(1))]
    if isinstance(s, Draw):
        if s.dist.kind != "Bernoulli":
            raise ValidationError(f"cannot enumerate a {s.dist.kind} draw")
        p = Fraction(evaluate_expr(s.dist.args[0], env))
        return [({**env, s.target: Fraction(1)}, p), ({**env, s.target: Fraction(0)}, 1 - p)]
    if isinstance(s, Choice):
        out = []
        for prob, block in s.branches:
            p = Fraction(evaluate_expr(prob, env))
            for state, q in _exec_discrete(block, {_freeze(env): Fraction(1)}).items():
                out.append((dict(state), p * q))
        return out
    if isinstance(s, If):
        block = s.then if env[s.var] == s.value else s.orelse
        return [(dict(state), q) for state, q in _exec_discrete(block, {_freeze(env): Fraction(1)}).items()]
    raise TypeError(f"unexpected statement {s!r}")  # pragma: no cover


def monte_carlo(
    program: Program,
    p: Polynomial,
    n: int,
    samples: int = 10_000,
    seed: int = 0,
    values: Mapping | None = None,
) -> tuple[float, float]:
    """Sample mean of p at iteration n and its standard error."""
    if samples < 1:
        raise ValueError("need at least one sample")
    rng = np.random.default_rng(seed)
    env = {k: np.full(samples, float(Fraction(v))) for k, v in (values or {}).items()}
    _exec_sampled(program.inits, env, rng, samples)
    for _ in range(n):
        _exec_sampled(program.body, env, rng, samples)
    total = np.zeros(samples)
    for m, c in p.terms.items():
        term = np.full(samples, float(p.field.specialize(c, values or {})))
        for name, e in zip(p.variables, m):
            if e:
                term = term * env[name] ** e
        total += term
    mean = float(total.mean())
    err = float(total.std(ddof=1) / np.sqrt(samples)) if samples > 1 else 0.0
    return mean, err


def _exec_sampled(stmts, env, rng, size, mask=None):
    for s in stmts:
        if isinstance(s, Assign):
            if any(isinstance(e, InlineChoice) for e in s.exprs):
                e = s.exprs[0]
                pick = rng.random(size) < float(_fval(e.prob, env))
                new = [np.where(pick, _fval(e.left, env), _fval(e.right, env))]
            else:
                new = [np.broadcast_to(np.asarray(_fval(e, env), dtype=float), (size,)) for e in s.exprs]
            for t, v in zip(s.targets, new):
                _store(env, t, v, mask)
        elif isinstance(s, Draw):
            _store(env, s.target, _draw(s.dist, env, rng, size), mask)
        elif isinstance(s, Choice):
            u = rng.random(size)
            lower = np.zeros(size)
            for prob, block in s.branches:
                upper = lower + np.broadcast_to(np.asarray(_fval(prob, env), dtype=float), (size,))
                sel = (u >= lower) & (u < upper)
                _exec_sampled(block, env, rng, size, sel if mask is None else mask & sel)
                lower = upper
        elif isinstance(s, If):
            sel = env[s.var] == s.value
            _exec_sampled(s.then, env, rng, size, sel if mask is None else mask & sel)
            _exec_sampled(s.orelse, env, rng, size, ~sel if mask is None else mask & ~sel)
        else:  # pragma: no cover
            raise TypeError(f"unexpected statement {s!r}")


def _fval(e, env):
    return evaluate_expr(e, env, float)


def _store(env, name, value, mask):
    value = np.asarray(value, dtype=float)
    if mask is None or name not in env:
        env[name] = np.array(np.broadcast_to(value, mask.shape if mask is not None else value.shape), dtype=float)
    else:
        env[name] = np.where(mask, value, env[name])


def _draw(dist, env, rng, size):
    args = [np.broadcast_to(np.asarray(_fval(a, env), dtype=float), (size,)) for a in dist.args]
    if dist.kind == "Bernoulli":
        return (rng.random(size) < args[0]).astype(float)
    if dist.kind == "Normal":
        return rng.normal(args[0], np.sqrt(args[1]))
    if dist.kind == "Uniform":
        return rng.uniform(args[0], args[1])
    raise ValidationError(f"cannot sample {dist.kind}")  # pragma: no cover


def format_value(field_, x) -> str:
    if field_.is_rational:
        return format_rational(to_mpq(x))
    return field_.format(x)
