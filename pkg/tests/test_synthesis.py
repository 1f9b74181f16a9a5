import itertools
import random

import pytest
import sympy
from gmpy2 import mpq

from loopinvar import benchmarks
from loopinvar.algebra import ExpPolynomial, monomials_up_to
from loopinvar.algebra.linalg import mat_vec, rank
from loopinvar.dependency import analyze
from loopinvar.errors import NoDefectiveVariables
from loopinvar.frontend import parse_program
from loopinvar.recurrences import MomentContext
from loopinvar.synthesis import (
    FULL,
    Candidate,
    PURE,
    candidate_monomials,
    closed_form_of_candidate,
    constraint_matrices,
    pure_candidate_count,
    run_synthesis,
    solve_solution_space,
    synthesize,
    system_size,
    verify_eigenpair,
    weight_names,
)
from tests.conftest import MARKOV, SQUARES, SQUARES_FREE

CAND7 = {
    "squares": 35,
    "squares+": 35,
    "non-lin-markov-1": 35,
    "non-lin-markov-2": 35,
    "prob-squares": 119,
    "squares-and-cube": 119,
    "pts": 35,
    "squares-squared": 329,
    "bees": 791,
    "deg-5": 35,
    "deg-6": 35,
    "deg-7": 35,
    "deg-8": 35,
    "deg-9": 35,
    "deg-500": 35,
}


def setup(src_or_prog, degree, mode=PURE):
    prog = parse_program(src_or_prog) if isinstance(src_or_prog, str) else src_or_prog
    ctx = MomentContext(prog)
    _, part = analyze(ctx)
    cand = candidate_monomials(part, ctx.variables, degree, mode)
    return ctx, part, cand, constraint_matrices(ctx, part, cand)


def names(cand):
    return set(cand.names())


def test_full_candidate_of_squares():
    ctx, part, cand, _ = setup(SQUARES, 2, FULL)
    assert names(cand) == {"x", "y", "x^2", "y^2", "x*y", "z*x", "z*y"}


def test_pure_candidate_of_squares():
    _, _, cand, _ = setup(SQUARES, 2)
    assert names(cand) == {"x", "y", "x^2", "y^2", "x*y"}


@pytest.mark.parametrize("name", sorted(CAND7))
def test_degree7_candidate_counts(name):
    prog = benchmarks.load(name)
    ctx = MomentContext(prog)
    _, part = analyze(ctx)
    cand = candidate_monomials(part, ctx.variables, 7)
    assert len(cand.monomials) == CAND7[name]
    assert pure_candidate_count(len(part.defective), 7) == CAND7[name]


def test_candidates_are_graded():
    _, _, cand, _ = setup(SQUARES, 3)
    degrees = [sum(m) for m in cand.monomials]
    assert degrees == sorted(degrees)


def test_solvable_program_has_no_candidate():
    with pytest.raises(NoDefectiveVariables):
        synthesize(parse_program("while true:\n  (x, y) = 2*x + 3*y, y\nend\n"), 1)


def test_constraint_matrices_of_squares():
    ctx, _, cand, sys = setup(SQUARES, 1)
    assert cand.names() == ["x", "y"]
    assert sys.A_cand == [[2, 0], [0, 2]]
    assert [ctx.monomial(m).format() for m in sys.extra_monomials] == ["y^2"]
    assert sys.A_extra == [[1, -1]]
    rows = {ctx.monomial(m).format(): r for m, r in zip(sys.effective_monomials, sys.effective_rows)}
    assert rows == {"z": [-1, -2], "1": [1, 2]}


def test_constraint_matrices_of_markov_chain():
    ctx, _, cand, sys = setup(MARKOV, 1)
    # row i holds the coefficient of candidate monomial i in R[x], R[y]
    assert sys.A_cand == [[1, mpq(1, 6)], [mpq(1, 2), mpq(4, 3)]]
    assert [list(col) for col in zip(*sys.A_cand)] == [[1, mpq(1, 2)], [mpq(1, 6), mpq(4, 3)]]
    assert [ctx.monomial(m).format() for m in sys.extra_monomials] == ["x*y"]
    assert sys.A_extra == [[mpq(5, 6), mpq(5, 6)]]


def test_doubling_update_has_no_extra_rows():
    ctx = MomentContext(parse_program("while true:\n  (v, w) = 2*v, w^2\nend\n"))
    part = analyze(ctx)[1]
    cand = Candidate(1, [(1, 0)], PURE, ctx.variables)
    sys = constraint_matrices(ctx, part, cand)
    assert sys.A_cand == [[2]]
    assert sys.A_extra == []


def test_solution_spaces():
    ctx, _, _, sys = setup(SQUARES, 1)
    space = solve_solution_space(sys, ctx.field)
    assert space.eigenspaces == [(2, [[1, 1]])]
    ctx, _, _, sys = setup(MARKOV, 1)
    assert solve_solution_space(sys, ctx.field).eigenspaces == [(mpq(5, 6), [[1, -1]])]
    ctx, _, _, sys = setup(benchmarks.load("deg-9"), 3)
    assert solve_solution_space(sys, ctx.field).dimension == 6


def test_squares_invariant():
    (inv,) = synthesize(parse_program(SQUARES_FREE), 1)
    assert inv.kappa == 2 and inv.kind == "value"
    assert inv.valid_from == 0
    assert inv.format() == "x + y = 2^n*(-z0 + x0 + y0 + 2) + (-1)^n*((2*z0 - 1)/2) - 3/2"
    (inv,) = synthesize(parse_program(SQUARES), 1)
    F = inv.field
    x0, y0 = F.symbol("x0"), F.symbol("y0")
    assert inv.closed_form.expr == ExpPolynomial(F, {2: [x0 + y0 + 2], -1: [mpq(-1, 2)], 1: [mpq(-3, 2)]})
    assert inv.format() == "x + y = 2^n*(x0 + y0 + 2) - (-1)^n/2 - 3/2"


def test_bees_first_moment():
    (inv,) = synthesize(benchmarks.load("bees"), 1)
    assert inv.kind == "expectation" and inv.kappa == 1
    assert inv.polynomial.format() == "x + y1 + y2 + z1 + z2"
    assert inv.closed_form.expr == ExpPolynomial.constant(inv.field, 1045)


def test_markov_second_moment():
    invs = synthesize(parse_program(MARKOV), 2)
    by_kappa = {inv.kappa: inv for inv in invs}
    inv = by_kappa[mpq(13, 18)]
    assert inv.polynomial.format() == "x^2 - 2*x*y + y^2"
    F = inv.field
    x0, y0 = F.symbol("x0"), F.symbol("y0")
    assert inv.closed_form.expr == ExpPolynomial(F, {mpq(13, 18): [(x0 - y0) ** 2]})


def test_deg9_cubic_family():
    (inv,) = synthesize(benchmarks.load("deg-9"), 3)
    assert inv.kappa == 0 and inv.weights == ("a", "b", "c", "d", "e", "f") and inv.valid_from == 1
    a, b, c, d, e, f, x, y = sympy.symbols("a b c d e f x y")
    expected = (
        12 * (a * y + b * y**2 + c * y**3 + d * x + e * x * y + f * x * y**2)
        - (3 * a + 24 * b + 117 * c + 2 * d + 17 * e + 26 * f) * x**2
        - (6 * a - 6 * b + 315 * c + 4 * d - 2 * e + 88 * f) * x**2 * y
        + 3 * (3 * a - 3 * b + 144 * c + 2 * d - e + 35 * f) * x**3
    )
    ours = sympy.sympify(inv.polynomial.format().replace("^", "**"))
    assert sympy.expand(ours - expected) == 0
    assert inv.closed_form.expr.format() == "-108*a + 312*b - 1962*c - 68*d + 52*e - 68*f"


def test_weight_names_skip_program_symbols():
    assert weight_names(3, {"a", "b", "x"}) == ["c", "d", "e"]
    (inv,) = synthesize(benchmarks.load("pts"), 1)
    assert inv.weights == ("c", "d") and inv.dimension == 2


@pytest.mark.parametrize("name", sorted(CAND7))
@pytest.mark.parametrize("degree", [1, 2])
def test_eigenpairs_verified_independently(name, degree):
    result = run_synthesis(benchmarks.load(name), degree, closed_forms=False)
    for kappa, basis in result.space.eigenspaces:
        assert basis
        assert rank(basis, len(result.candidate.monomials), result.ctx.field) == len(basis)
        for v in basis:
            assert verify_eigenpair(result.system, kappa, v, result.ctx.field)


def _in_span(basis, v, field, n):
    return rank(basis + [v], n, field) == rank(basis, n, field)


@pytest.mark.parametrize("name", [n for n in sorted(CAND7) if n != "bees"] + ["bees"])
def test_degree_monotonicity(name):
    prog = benchmarks.load(name)
    top = 2 if name == "bees" else 3
    previous = None
    for d in range(1, top + 1):
        res = run_synthesis(prog, d, closed_forms=False)
        spaces = dict(res.space.eigenspaces)
        if previous is not None:
            cand = res.candidate.monomials
            pos = {m: i for i, m in enumerate(cand)}
            for kappa, basis, old in previous:
                assert kappa in spaces
                for v in basis:
                    padded = [res.ctx.field.zero] * len(cand)
                    for m, c in zip(old, v):
                        padded[pos[m]] = c
                    assert _in_span(spaces[kappa], padded, res.ctx.field, len(cand))
        previous = [(k, b, res.candidate.monomials) for k, b in res.space.eigenspaces]


def test_scaling_invariance():
    res = run_synthesis(parse_program(SQUARES_FREE), 1)
    (inv,) = res.invariants
    W = inv.field
    for r in (mpq(3), mpq(-2, 7)):
        scaled = closed_form_of_candidate(res.ctx, res.partition, res.system, inv.kappa, [c * r for c in inv.coefficients], W)
        assert scaled.expr == inv.closed_form.expr.scale(W(r))


def _brute_force_solutions(res, bound=3):
    """All integer vectors in [-bound, bound]^k that satisfy the constraints for some rational kappa."""
    F = res.ctx.field
    sys = res.system
    k = len(res.candidate.monomials)
    for v in itertools.product(range(-bound, bound + 1), repeat=k):
        if not any(v):
            continue
        v = [mpq(x) for x in v]
        if sys.A_extra and any(mat_vec(sys.A_extra, v, F)):
            continue
        av = mat_vec(sys.A_cand, v, F)
        i = next(i for i, x in enumerate(v) if x)
        kappa = av[i] / v[i]
        if all(a == kappa * x for a, x in zip(av, v)):
            yield kappa, v


def _random_defective_program(rng):
    c = lambda: rng.randint(-3, 3)
    return (
        "while true:\n"
        f"  (x, y) = {c()}*x + {c()}*y + {c()}*x^2 + {c()}*x*y + {c()}*y^2, "
        f"{c()}*x + {c()}*y + {c()}*x^2 + {c()}*x*y + {c()}*y^2 + x*y\n"
        "end\n"
    )


def _completeness_cases():
    cases = [("squares", 2), ("non-lin-markov-1", 2), ("pts", 2), ("squares-and-cube", 1)]
    rng = random.Random(7)
    progs = []
    while len(progs) < 6:
        src = _random_defective_program(rng)
        ctx = MomentContext(parse_program(src))
        if analyze(ctx)[1].defective:
            progs.append((src, 1 if len(progs) % 2 else 2))
    return [(benchmarks.source(n), d) for n, d in cases] + progs


@pytest.mark.parametrize("src, degree", _completeness_cases())
def test_completeness_on_small_grid(src, degree):
    res = run_synthesis(parse_program(src), degree, closed_forms=False)
    spaces = dict(res.space.eigenspaces)
    n = len(res.candidate.monomials)
    bound = 3 if n <= 4 else 2
    for kappa, v in _brute_force_solutions(res, bound):
        assert kappa in spaces, (kappa, v)
        assert _in_span(spaces[kappa], v, res.ctx.field, n)


def test_system_size():
    prog = parse_program(SQUARES)
    assert system_size(prog, 1).candidate_count == 2
    size = system_size(prog, 7)
    assert size.candidate_count == 35
    # extra rows plus the effective rows; not comparable with the published count
    assert size.equation_count > size.candidate_count


def test_monomials_up_to_counts():
    for v in range(1, 5):
        for d in range(1, 6):
            assert len(monomials_up_to(v, d, mindeg=1)) == pure_candidate_count(v, d)
