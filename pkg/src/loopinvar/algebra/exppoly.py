"""Exponential polynomials  sum_k P_k(n) * lam_k^n  with rational bases.

Coefficient polynomials in ``n`` are stored low degree first.  Base 0 is
allowed with a constant coefficient only and stands for the Kronecker delta
at n = 0 (the convention 0^0 = 1); it is what makes a rate-0 first-order
recurrence representable from n = 0.
"""

from __future__ import annotations

from math import comb
from typing import Mapping

from gmpy2 import mpq

from loopinvar.algebra.polynomial import Polynomial, _needs_parens
from loopinvar.algebra.scalars import ScalarField, format_rational, to_mpq

__all__ = ["ExpPolynomial", "solve_first_order"]


def _trim(coeffs):
    coeffs = list(coeffs)
    while coeffs and not coeffs[-1]:
        coeffs.pop()
    return tuple(coeffs)


class ExpPolynomial:
    __slots__ = ("field", "terms")

    def __init__(self, field: ScalarField, terms: Mapping[object, object] | None = None):
        self.field = field
        clean = {}
        for base, coeffs in (terms or {}).items():
            base = to_mpq(base)
            coeffs = _trim(field(c) for c in coeffs)
            if base == 0 and len(coeffs) > 1:
                raise ValueError("base 0 only admits a constant coefficient")
            if coeffs:
                clean[base] = coeffs
        self.terms = clean

    @classmethod
    def constant(cls, field, value):
        return cls(field, {1: [value]})

    @classmethod
    def geometric(cls, field, base, coeff=1):
        return cls(field, {base: [coeff]})

    def _raw(self, terms):
        e = ExpPolynomial.__new__(ExpPolynomial)
        e.field = self.field
        e.terms = terms
        return e

    def convert(self, field: ScalarField) -> "ExpPolynomial":
        return ExpPolynomial(field, {b: [field(c) for c in cs] for b, cs in self.terms.items()})

    # arithmetic -------------------------------------------------------------

    def __add__(self, other: "ExpPolynomial"):
        if not isinstance(other, ExpPolynomial):
            other = ExpPolynomial.constant(self.field, other)
        terms = dict(self.terms)
        for base, cs in other.terms.items():
            if base in terms:
                mine = terms[base]
                n = max(len(mine), len(cs))
                merged = _trim(
                    (mine[i] if i < len(mine) else self.field.zero) + (cs[i] if i < len(cs) else self.field.zero)
                    for i in range(n)
                )
                if merged:
                    terms[base] = merged
                else:
                    del terms[base]
            else:
                terms[base] = cs
        return self._raw(terms)

    __radd__ = __add__

    def __neg__(self):
        return self._raw({b: tuple(-c for c in cs) for b, cs in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, ExpPolynomial):
            other = ExpPolynomial.constant(self.field, other)
        return self + (-other)

    def scale(self, s):
        s = self.field(s)
        if not s:
            return self._raw({})
        return self._raw({b: tuple(c * s for c in cs) for b, cs in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, ExpPolynomial):
            return self.scale(other)
        result = self._raw({})
        zero = self.field.zero
        for b1, p in self.terms.items():
            for b2, q in other.terms.items():
                if b1 == 0 or b2 == 0:
                    # 0^n kills every n > 0; only the n = 0 values survive
                    result = result + self._raw({mpq(0): (p[0] * q[0],)})
                    continue
                prod = [zero] * (len(p) + len(q) - 1)
                for i, a in enumerate(p):
                    for j, c in enumerate(q):
                        prod[i + j] = prod[i + j] + a * c
                result = result + ExpPolynomial(self.field, {b1 * b2: prod})
        return result

    __rmul__ = __mul__

    # evaluation --------------------------------------------------------------

    def __call__(self, n: int):
        return self.evaluate(n)

    def evaluate(self, n: int):
        total = self.field.zero
        for base, cs in self.terms.items():
            if base == 0:
                if n == 0:
                    total = total + cs[0]
                continue
            poly = self.field.zero
            for c in reversed(cs):
                poly = poly * n + c
            total = total + poly * self.field(base**n if n >= 0 else mpq(1) / base ** (-n))
        return total

    def shift(self, k: int) -> "ExpPolynomial":
        """The sequence n -> f(n + k)."""
        terms = {}
        for base, cs in self.terms.items():
            if base == 0:
                if k < 0:
                    raise ValueError("cannot shift a delta term backwards")
                if k == 0:
                    terms[base] = cs
                continue
            factor = self.field(base**k if k >= 0 else mpq(1) / base ** (-k))
            new = [self.field.zero] * len(cs)
            for i, c in enumerate(cs):
                for j in range(i + 1):
                    new[j] = new[j] + c * comb(i, j) * k ** (i - j)
            new = _trim(x * factor for x in new)
            if new:
                terms[base] = new
        return self._raw(terms)

    def without_delta(self) -> "ExpPolynomial":
        return self._raw({b: cs for b, cs in self.terms.items() if b != 0})

    # queries -------------------------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, ExpPolynomial):
            return self == ExpPolynomial.constant(self.field, other)
        return self.terms == other.terms

    def __bool__(self):
        return bool(self.terms)

    def bases(self):
        return sorted(self.terms)

    def is_constant(self):
        return set(self.terms) <= {mpq(1)} and all(len(cs) <= 1 for cs in self.terms.values())

    def __repr__(self):
        return f"ExpPolynomial({self.format()})"

    # printing ------------------------------------------------------------------

    def format(self, var: str = "n") -> str:
        if not self.terms:
            return "0"
        order = sorted(self.terms, key=lambda b: (b == 1, -abs(b), -b))
        pieces = []
        for base in order:
            pieces.extend(self._format_term(base, self.terms[base], var))
        text = " ".join(pieces)
        if text.startswith("+ "):
            text = text[2:]
        elif text.startswith("- "):
            text = "-" + text[2:]
        return text

    __str__ = format

    def _format_term(self, base, cs, var):
        f = self.field
        if base == 1:
            power = ""
        elif base == 0:
            power = f"0^{var}"
        elif base > 0 and base.denominator == 1:
            power = f"{base.numerator}^{var}"
        else:
            power = f"({format_rational(base)})^{var}"
        nonzero = [(i, c) for i, c in enumerate(cs) if c]
        if len(nonzero) == 1 and f.is_constant(nonzero[0][1]):
            i, c = nonzero[0]
            q = f.to_rational(c)
            atom = "*".join(x for x in (power, _npow(var, i)) if x)
            sign = "-" if q < 0 else "+"
            q = abs(q)
            if not atom:
                return [f"{sign} {format_rational(q)}"]
            if q == 1:
                return [f"{sign} {atom}"]
            if q.numerator == 1:
                return [f"{sign} {atom}/{q.denominator}"]
            return [f"{sign} {format_rational(q)}*{atom}"]
        body = Polynomial((var,), f, {(i,): c for i, c in nonzero}).format()
        if not power:
            return [f"- {body[1:]}" if body.startswith("-") else f"+ {body}"]
        if _needs_parens(body):
            return [f"+ {power}*({body})"]
        return [f"+ {power}*{body}"]


def _npow(var, i):
    if i == 0:
        return ""
    if i == 1:
        return var
    return f"{var}^{i}"


def solve_first_order(kappa, h: ExpPolynomial, s0) -> ExpPolynomial:
    """The unique S with S(0) = s0 and S(n+1) = kappa*S(n) + h(n) for n >= 0."""
    field = h.field
    kappa = to_mpq(kappa)
    k = field(kappa)
    particular = ExpPolynomial(field)
    for base, p in h.terms.items():
        if base == 0:
            if kappa == 0:
                raise ValueError("rate 0 with a delta forcing term is not an exponential polynomial")
            c = p[0] / k
            particular = particular + ExpPolynomial(field, {kappa: [c], 0: [-c]})
            continue
        lam = field(base)
        deg = len(p) - 1
        if base != kappa:
            q = [field.zero] * (deg + 1)
            for j in range(deg, -1, -1):
                acc = p[j]
                for i in range(j + 1, deg + 1):
                    acc = acc - lam * comb(i, j) * q[i]
                q[j] = acc / (lam - k)
        else:
            q = [field.zero] * (deg + 2)
            for j in range(deg, -1, -1):
                acc = p[j] / k
                for i in range(j + 2, deg + 2):
                    acc = acc - comb(i, j) * q[i]
                q[j + 1] = acc / (j + 1)
        particular = particular + ExpPolynomial(field, {base: q})
    start = field(s0) - particular.evaluate(0)
    homogeneous = ExpPolynomial(field, {kappa: [start]})
    return homogeneous + particular
