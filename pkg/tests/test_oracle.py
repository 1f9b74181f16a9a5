import json
from dataclasses import replace
from fractions import Fraction

import pytest

from loopinvar import benchmarks
from loopinvar.errors import BudgetExceeded
from loopinvar.frontend import parse_expression, parse_program
from loopinvar.oracle import (
    check,
    expectation_by_enumeration,
    interpret,
    monte_carlo,
    unroll_expectation,
    unroll_polynomials,
    unroll_sequence,
)
from loopinvar.recurrences import MomentContext, expr_to_poly
from loopinvar.synthesis import run_synthesis, synthesize
from tests.conftest import MARKOV, SQUARES
from tests.corpus import corpus


def P(ctx, text):
    return expr_to_poly(parse_expression(text), ctx.variables, ctx.field)


def at(ctx, value, **init):
    return ctx.value_field.specialize(value, {f"{k}0": v for k, v in init.items()})


def test_unroll_squares_from_zero():
    ctx = MomentContext(parse_program(SQUARES))
    seq = unroll_sequence(ctx, P(ctx, "x + y"), 2)
    assert [at(ctx, v, x=0, y=0) for v in seq] == [0, 3, 6]
    assert at(ctx, unroll_expectation(ctx, P(ctx, "1"), 5), x=0, y=0) == 1


def test_unroll_rejects_negative_count():
    ctx = MomentContext(parse_program(SQUARES))
    with pytest.raises(ValueError):
        unroll_polynomials(ctx, P(ctx, "x"), -1)


def test_budget_exceeded_reports_progress():
    ctx = MomentContext(parse_program(SQUARES))
    with pytest.raises(BudgetExceeded) as info:
        unroll_polynomials(ctx, P(ctx, "x"), 10, budget=20)
    assert info.value.reached >= 1


@pytest.mark.parametrize("index", range(0, 200, 20))
def test_interpreter_agrees_with_unrolling(index):
    prog = parse_program(corpus()[index])
    ctx = MomentContext(prog)
    values = {v: Fraction(i + 2, 3) for i, v in enumerate(ctx.variables)}
    init = {f"{v}0": q for v, q in values.items()}
    steps = 5 if len(ctx.variables) > 2 else 8
    states = [interpret(prog, n, values) for n in range(steps + 1)]
    for i, v in enumerate(ctx.variables):
        unit = tuple(1 if j == i else 0 for j in range(len(ctx.variables)))
        try:
            polys = unroll_polynomials(ctx, ctx.monomial(unit), steps, budget=300)
        except BudgetExceeded as exc:
            polys = unroll_polynomials(ctx, ctx.monomial(unit), exc.reached)
        for n, q in enumerate(polys):
            assert ctx.value_field.specialize(ctx.initial_value(q), init) == states[n][v]


def test_interpreter_on_squares():
    prog = parse_program(SQUARES)
    for n in range(13):
        s = interpret(prog, n, {"x": 0, "y": 0})
        ctx = MomentContext(prog)
        assert at(ctx, unroll_expectation(ctx, P(ctx, "x + y"), n), x=0, y=0) == s["x"] + s["y"]


def test_check_passes_on_squares():
    prog = parse_program(SQUARES)
    (inv,) = synthesize(prog, 1)
    report = check(MomentContext(prog), inv, n_max=8)
    assert report.passed and report.first_failure is None
    assert [r.n for r in report.rows] == list(range(9))


def test_check_passes_on_weighted_family():
    prog = benchmarks.load("deg-9")
    (inv,) = synthesize(prog, 3)
    report = check(MomentContext(prog), inv, n_max=6)
    assert report.passed
    assert report.rows[0].n == inv.valid_from == 1
    assert len(report.instantiations) == 3


def test_corrupted_closed_form_fails_first_row():
    prog = parse_program(SQUARES)
    (inv,) = synthesize(prog, 1)
    W = inv.field
    cf = inv.closed_form
    bad = replace(inv, closed_form=replace(cf, expr=cf.expr + cf.expr.constant(W, 1)))
    report = check(MomentContext(prog), bad, n_max=4)
    assert not report.passed and report.first_failure == 0
    assert report.verdict == "fail"


def test_corrupted_weighted_family_fails():
    prog = benchmarks.load("deg-9")
    (inv,) = synthesize(prog, 3)
    W = inv.field
    cf = inv.closed_form
    a = W.symbol("a")
    bad = replace(inv, closed_form=replace(cf, expr=cf.expr + cf.expr.constant(W, a)))
    assert not check(MomentContext(prog), bad, n_max=3).passed


def test_check_truncates_on_budget():
    prog = parse_program(SQUARES)
    (inv,) = synthesize(prog, 1)
    report = check(MomentContext(prog), inv, n_max=30, budget=3)
    assert report.truncated_at is not None and report.truncated_at < 30
    assert report.passed


def test_check_report_json():
    prog = parse_program(SQUARES)
    (inv,) = synthesize(prog, 1)
    report = check(MomentContext(prog), inv, n_max=2)
    data = report.to_json(inv.field)
    json.dumps(data)
    assert data["verdict"] == "pass" and data["first_failure"] is None
    assert data["rows"][1] == {"n": 1, "expected": "2*x0 + 2*y0 + 3", "actual": "2*x0 + 2*y0 + 3", "equal": True}


def test_markov_by_enumeration():
    prog = parse_program(MARKOV)
    ctx = MomentContext(prog)
    p = P(ctx, "x - y")
    exact = expectation_by_enumeration(prog, p, 3, {"x": 0, "y": 1})
    assert exact == -Fraction(5, 6) ** 3
    unrolled = unroll_expectation(ctx, p, 3)
    assert at(ctx, unrolled, x=0, y=1, s=0) == exact


def test_monte_carlo_markov():
    prog = parse_program(MARKOV)
    ctx = MomentContext(prog)
    mean, err = monte_carlo(prog, P(ctx, "x - y"), 3, samples=20_000, seed=1, values={"x": 0, "y": 1})
    assert abs(mean + (5 / 6) ** 3) < 4 * err + 1e-9


def test_monte_carlo_deterministic_is_exact():
    prog = parse_program(SQUARES)
    ctx = MomentContext(prog)
    mean, err = monte_carlo(prog, P(ctx, "x + y"), 2, samples=50, values={"x": 0, "y": 0})
    assert mean == 6 and err == 0


def test_monte_carlo_bees_first_moment():
    prog = benchmarks.load("bees")
    ctx = MomentContext(prog)
    params = {"dt": Fraction(1, 100), "alpha": Fraction(1, 1000), "beta1": Fraction(1, 1000),
              "beta2": Fraction(1, 1000), "gamma": Fraction(1, 10), "delta": Fraction(1, 1000)}
    mean, err = monte_carlo(prog, P(ctx, "x + y1 + y2 + z1 + z2"), 5, samples=10_000, seed=3, values=params)
    assert abs(mean - 1045) < 3 * err


def test_monte_carlo_rejects_empty_sample():
    prog = parse_program(SQUARES)
    ctx = MomentContext(prog)
    with pytest.raises(ValueError):
        monte_carlo(prog, P(ctx, "x"), 1, samples=0)


def test_every_invariant_of_small_benchmarks_checks():
    for name in ("squares", "non-lin-markov-1", "non-lin-markov-2", "pts", "prob-squares"):
        prog = benchmarks.load(name)
        res = run_synthesis(prog, 2)
        for inv in res.invariants:
            assert check(res.ctx, inv, n_max=5).passed, (name, inv.format())
