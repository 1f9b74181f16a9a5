"""Univariate polynomials (coefficient lists, low degree first) and their rational roots."""

from __future__ import annotations

import random
from typing import Sequence

from gmpy2 import mpq
from sympy import ZZ
from sympy.polys.rings import ring

from loopinvar.algebra.scalars import ScalarField, format_rational

__all__ = ["rational_roots", "poly_eval", "poly_divide_linear", "format_upoly", "poly_from_roots"]

_ZX, _X = ring("x", ZZ)

# parameter specialisation attempts for root finding over Q(params)
SPECIALIZATIONS = 5


def trim(coeffs):
    coeffs = list(coeffs)
    while coeffs and not coeffs[-1]:
        coeffs.pop()
    return coeffs


def poly_eval(coeffs: Sequence, x, field: ScalarField):
    acc = field.zero
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def poly_divide_linear(coeffs: Sequence, root, field: ScalarField):
    """Synthetic division by (x - root); returns (quotient, remainder)."""
    n = len(coeffs) - 1
    if n < 1:
        return [], coeffs[0] if coeffs else field.zero
    out = [field.zero] * n
    acc = field.zero
    for i in range(n, 0, -1):
        acc = acc * root + coeffs[i]
        out[i - 1] = acc
    remainder = acc * root + coeffs[0]
    return out, remainder


def poly_from_roots(roots: dict, field: ScalarField):
    poly = [field.one]
    for r, mult in roots.items():
        for _ in range(mult):
            shifted = [field.zero] + poly
            for i, c in enumerate(poly):
                shifted[i] = shifted[i] - field(r) * c
            poly = shifted
    return poly


def format_upoly(coeffs: Sequence, field: ScalarField, var: str = "x") -> str:
    from loopinvar.algebra.polynomial import Polynomial

    p = Polynomial((var,), field, {(i,): c for i, c in enumerate(coeffs)})
    return p.format()


def _rational_roots_qq(coeffs: Sequence[mpq]) -> tuple[dict, list]:
    coeffs = [mpq(c) for c in trim(coeffs)]
    roots: dict = {}
    zeros = 0
    while coeffs and coeffs[0] == 0:
        coeffs.pop(0)
        zeros += 1
    if zeros:
        roots[mpq(0)] = zeros
    if len(coeffs) <= 1:
        return roots, coeffs
    den = 1
    for c in coeffs:
        den = den * c.denominator // _gcd(den, c.denominator)
    ints = [int(c * den) for c in coeffs]
    p = _ZX.from_list(list(reversed(ints)))
    _, factors = p.factor_list()
    residual = [mpq(1)]
    for f, mult in factors:
        if f.degree() == 1:
            a = f.coeff(_X)
            b = f.coeff(1)
            r = mpq(-int(b), int(a))
            roots[r] = roots.get(r, 0) + mult
        else:
            fl = [mpq(int(f.coeff(_X**i))) for i in range(f.degree() + 1)]
            for _ in range(mult):
                residual = _mul(residual, fl)
    lead = residual[-1]
    residual = [c / lead for c in residual]
    return dict(sorted(roots.items())), residual


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


def _mul(a, b):
    out = [mpq(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def rational_roots(coeffs: Sequence, field: ScalarField, seed: int = 0) -> tuple[dict, list]:
    """Rational roots with multiplicities and the root-free residual factor.

    Over Q this is exact factorisation.  With parameters, candidate roots
    are the rationals that are roots under several random specialisations;
    each survivor is then confirmed symbolically, so every reported root is
    genuine (roots that only exist for special parameter values are not).
    """
    coeffs = trim(coeffs)
    if not coeffs:
        raise ValueError("zero polynomial")
    if field.is_rational:
        roots, residual = _rational_roots_qq(coeffs)
        lead = coeffs[-1]
        return roots, [c * lead for c in residual]
    if all(field.is_constant(c) for c in coeffs):
        roots, residual = _rational_roots_qq([field.to_rational(c) for c in coeffs])
        lead = coeffs[-1]
        return roots, [field(c) * lead for c in residual]
    rng = random.Random(seed)
    candidates = None
    attempts = 0
    while attempts < SPECIALIZATIONS:
        point = {s: mpq(rng.randint(-97, 97), rng.randint(1, 31)) for s in field.symbols}
        try:
            spec = [field.specialize(c, point) for c in coeffs]
        except ZeroDivisionError:
            continue
        if spec[-1] == 0:
            continue
        attempts += 1
        found = set(_rational_roots_qq(spec)[0])
        candidates = found if candidates is None else candidates & found
        if not candidates:
            break
    roots = {}
    rest = list(coeffs)
    for r in sorted(candidates or ()):
        mult = 0
        while len(rest) > 1:
            quotient, remainder = poly_divide_linear(rest, field(r), field)
            if remainder:
                break
            rest = quotient
            mult += 1
        if mult:
            roots[r] = mult
    return roots, rest


def describe_roots(roots: dict) -> str:
    return ", ".join(f"{format_rational(r)}^{m}" if m > 1 else format_rational(r) for r, m in roots.items())
