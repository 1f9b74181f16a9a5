"""Exact arithmetic: scalars, polynomials, linear algebra, exponential polynomials."""

from loopinvar.algebra.exppoly import ExpPolynomial, solve_first_order
from loopinvar.algebra.linalg import char_poly, kernel_basis, rank, rref
from loopinvar.algebra.polynomial import Monomial, Polynomial, format_monomial, grlex_key, monomials_up_to
from loopinvar.algebra.scalars import ScalarField, format_rational, scalar_field, to_mpq
from loopinvar.algebra.univariate import rational_roots

__all__ = [
    "ExpPolynomial",
    "Monomial",
    "Polynomial",
    "ScalarField",
    "char_poly",
    "format_monomial",
    "format_rational",
    "grlex_key",
    "kernel_basis",
    "monomials_up_to",
    "rank",
    "rational_roots",
    "rref",
    "scalar_field",
    "solve_first_order",
    "to_mpq",
]


def poly_eval_subst(p: Polynomial, subst) -> Polynomial:
    """Substitute polynomials for the variables of ``p`` and expand."""
    return p.compose(subst)
