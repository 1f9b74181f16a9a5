from fractions import Fraction

import pytest
import sympy
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from loopinvar.algebra import (
    ExpPolynomial,
    Polynomial,
    char_poly,
    kernel_basis,
    rank,
    rational_roots,
    scalar_field,
    solve_first_order,
)
from loopinvar.algebra import poly_eval_subst
from loopinvar.algebra.linalg import mat_mul, mat_vec
from loopinvar.algebra.univariate import poly_eval

Q = scalar_field()
small = st.integers(-6, 6)
rationals = st.fractions(min_value=-5, max_value=5, max_denominator=7)


def test_parameter_free_scalars_are_rationals():
    F = scalar_field(("a",))
    a = F.symbol("a")
    x = (a + 1) * (a - 1) / (a - 1) - a
    assert F.is_constant(x)
    assert F.to_rational(x) == 1


def test_scalar_specialization_and_substitution():
    F = scalar_field(("a", "b"))
    a, b = F.symbol("a"), F.symbol("b")
    x = (a**2 + b) / (a - b)
    assert F.specialize(x, {"a": 2, "b": Fraction(1, 2)}) == mpq(9, 3)
    y = F.substitute(x, {"a": 1})
    assert F.free_symbols(y) == {"b"}
    with pytest.raises(ZeroDivisionError):
        F.specialize(x, {"a": 1, "b": 1})


def test_substitution_composes_expansion():
    V = ("w", "x", "y")
    w, x, y = (Polynomial.var(V, Q, v) for v in V)
    assert poly_eval_subst(w, {"w": x + y}) == x + y
    assert poly_eval_subst(w * w, {"w": x + y}) == x * x + x * y * 2 + y * y
    c = Polynomial.constant(V, Q, 7)
    assert poly_eval_subst(c, {"w": x}) == c


def test_substitution_requires_bindings():
    from loopinvar.errors import MissingBinding

    V = ("x", "y")
    x, y = (Polynomial.var(V, Q, v) for v in V)
    with pytest.raises(MissingBinding):
        (x * y).compose({"x": y})


def test_polynomial_zero_coefficients_are_dropped():
    V = ("x",)
    x = Polynomial.var(V, Q, "x")
    assert (x - x).terms == {}
    assert not (x - x)


def test_kernel_examples():
    assert kernel_basis([[Q(1), Q(-1)]], 2, Q) == [[1, 1]]
    eye = [[Q(int(i == j)) for j in range(3)] for i in range(3)]
    assert kernel_basis(eye, 3, Q) == []


def test_parametric_kernel_agrees_with_specializations():
    F = scalar_field(("D",))
    D = F.symbol("D")
    basis = kernel_basis([[D, -D]], 2, F)
    assert len(basis) == 1
    for value in (Fraction(3), Fraction(-2, 7), Fraction(5, 3), Fraction(11), Fraction(1, 9)):
        spec = [[F.specialize(D, {"D": value}), -F.specialize(D, {"D": value})]]
        v = [F.specialize(c, {"D": value}) for c in basis[0]]
        assert v[0] * spec[0][0] + v[1] * spec[0][1] == 0
        assert kernel_basis(spec, 2, Q) == [[1, 1]]


@settings(max_examples=60, deadline=None)
@given(st.lists(st.lists(small, min_size=4, max_size=4), min_size=1, max_size=4))
def test_kernel_rank_nullity(rows):
    M = [[Q(v) for v in r] for r in rows]
    basis = kernel_basis(M, 4, Q)
    for v in basis:
        assert all(x == 0 for x in mat_vec(M, v, Q))
    assert rank(M, 4, Q) + len(basis) == 4
    assert rank(M, 4, Q) == sympy.Matrix(rows).rank()


def test_char_poly_examples():
    assert char_poly([[Q(-1), Q(1)], [Q(0), Q(1)]], Q) == [-1, 0, 1]
    assert char_poly([[Q(2)]], Q) == [-2, 1]
    assert char_poly([[Q(1), Q(1)], [Q(1), Q(0)]], Q) == [-1, -1, 1]


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4).flatmap(lambda n: st.lists(st.lists(small, min_size=n, max_size=n), min_size=n, max_size=n)))
def test_char_poly_matches_sympy_and_cayley_hamilton(rows):
    n = len(rows)
    M = [[Q(v) for v in r] for r in rows]
    cp = char_poly(M, Q)
    x = sympy.Symbol("x")
    expected = sympy.Poly(sympy.Matrix(rows).charpoly(x).as_expr(), x).all_coeffs()[::-1]
    assert [Fraction(int(c.numerator), int(c.denominator)) for c in cp] == [Fraction(int(c)) for c in expected]
    acc = [[Q(0)] * n for _ in range(n)]
    power = [[Q(int(i == j)) for j in range(n)] for i in range(n)]
    for c in cp:
        acc = [[a + c * p for a, p in zip(ra, rp)] for ra, rp in zip(acc, power)]
        power = mat_mul(power, M, Q)
    assert all(v == 0 for row in acc for v in row)


def test_rational_roots_examples():
    roots, residual = rational_roots([Q(-1), Q(0), Q(1)], Q)
    assert roots == {-1: 1, 1: 1} and residual == [1]
    roots, residual = rational_roots([Q(-1), Q(-1), Q(1)], Q)
    assert roots == {} and residual == [-1, -1, 1]
    # (x - 5/6)(x - 13/18)
    roots, _ = rational_roots([mpq(65, 108), -(mpq(5, 6) + mpq(13, 18)), Q(1)], Q)
    assert roots == {mpq(5, 6): 1, mpq(13, 18): 1}


@settings(max_examples=60, deadline=None)
@given(st.lists(rationals, min_size=1, max_size=4), st.lists(small, min_size=1, max_size=3))
def test_rational_roots_recover_products(roots, extra):
    x = sympy.Symbol("x")
    q = sympy.prod([x - sympy.Rational(r.numerator, r.denominator) for r in roots])
    q = q * (x**2 + 1 + extra[0] ** 2)  # a factor with no real roots
    coeffs = [Q(Fraction(str(c))) for c in sympy.Poly(sympy.expand(q), x).all_coeffs()[::-1]]
    found, residual = rational_roots(coeffs, Q)
    expected: dict = {}
    for r in roots:
        expected[mpq(r.numerator, r.denominator)] = expected.get(mpq(r.numerator, r.denominator), 0) + 1
    assert found == expected
    assert len(residual) == 3


def test_parametric_roots_are_verified_symbolically():
    F = scalar_field(("g",))
    g = F.symbol("g")
    # (x - 2)(x - g): only 2 is a root for generic g
    roots, residual = rational_roots([2 * g, -(g + 2), F.one], F)
    assert roots == {2: 1}
    assert len(residual) == 2


def test_exp_poly_add_mul():
    z = ExpPolynomial(Q, {1: [mpq(1, 2)], -1: [mpq(-1, 2)]})
    one_minus_z = ExpPolynomial(Q, {1: [mpq(1, 2)], -1: [mpq(1, 2)]})
    assert z + one_minus_z == ExpPolynomial.constant(Q, 1)
    two = ExpPolynomial.geometric(Q, 2)
    assert two * two == ExpPolynomial.geometric(Q, 4)
    assert z * z == z
    assert [(z * z).evaluate(n) for n in range(6)] == [0, 1, 0, 1, 0, 1]


def test_solve_first_order_examples():
    S = scalar_field(("s",))
    s = S.symbol("s")
    h = ExpPolynomial(S, {1: [mpq(3, 2)], -1: [mpq(3, 2)]})
    sol = solve_first_order(2, h, s)
    assert sol == ExpPolynomial(S, {2: [s + 2], -1: [mpq(-1, 2)], 1: [mpq(-3, 2)]})
    assert solve_first_order(1, ExpPolynomial(S), s) == ExpPolynomial.constant(S, s)
    res = solve_first_order(2, ExpPolynomial.geometric(S, 2).convert(S), s)
    for n in range(7):
        assert res.evaluate(n) == s * 2**n + n * mpq(2) ** (n - 1)


@settings(max_examples=80, deadline=None)
@given(
    rationals.filter(lambda k: k != 0),
    st.dictionaries(rationals.filter(lambda b: b != 0), st.lists(rationals, min_size=1, max_size=3), max_size=3),
    rationals,
)
def test_solve_first_order_satisfies_recurrence(kappa, terms, s0):
    h = ExpPolynomial(Q, {b: [mpq(c) for c in cs] for b, cs in terms.items()})
    sol = solve_first_order(mpq(kappa), h, mpq(s0))
    assert sol.evaluate(0) == s0
    for n in range(11):
        assert sol.evaluate(n + 1) == mpq(kappa) * sol.evaluate(n) + h.evaluate(n)
    # symbolic check: S(n+1) - kappa S(n) - h(n) normalises to the zero exp-polynomial
    assert sol.shift(1) - sol.scale(mpq(kappa)) - h == ExpPolynomial(Q)


@settings(max_examples=40, deadline=None)
@given(st.lists(small, min_size=3, max_size=3), st.lists(small, min_size=3, max_size=3), rationals, rationals)
def test_specialization_commutes_with_operations(c1, c2, a_val, b_val):
    F = scalar_field(("a", "b"))
    a, b = F.symbol("a"), F.symbol("b")
    p = [F(c1[0]) + a * c1[1], b * c1[2], F.one]
    q = [F(c2[0]), a + b * c2[1], F(c2[2])]
    point = {"a": a_val, "b": b_val}
    for x, y in zip(p, q):
        assert F.specialize(x * y + x, point) == F.specialize(x, point) * F.specialize(y, point) + F.specialize(x, point)
    for v in (Fraction(1, 3), Fraction(-2)):
        assert F.specialize(poly_eval(p, F(v), F), point) == poly_eval([F.specialize(c, point) for c in p], mpq(v), Q)
