"""Exact scalars: rationals, or rational functions over named symbols.

A :class:`ScalarField` with no symbols hands out ``gmpy2.mpq`` values, which
keeps parameter-free programs on the fast path.  With symbols the elements
are sympy ``FracElement`` objects of ``QQ(symbols)``; those are kept
GCD-reduced with a normalised denominator by sympy itself.
"""

from __future__ import annotations

import functools
from fractions import Fraction
from typing import Iterable, Mapping

import sympy
from gmpy2 import mpq
from sympy import QQ
from sympy.polys.fields import field as _sympy_field

__all__ = ["ScalarField", "scalar_field", "to_mpq", "format_rational"]


def to_mpq(value) -> mpq:
    if isinstance(value, Fraction):
        return mpq(value.numerator, value.denominator)
    if isinstance(value, str):
        return mpq(Fraction(value).numerator, Fraction(value).denominator)
    return mpq(value)


def format_rational(q) -> str:
    q = mpq(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


class ScalarField:
    """The field Q(symbols).  Obtain instances through :func:`scalar_field`."""

    def __init__(self, symbols: tuple[str, ...]):
        self.symbols = symbols
        if symbols:
            self._K, *gens = _sympy_field([sympy.Symbol(s) for s in symbols], QQ)
            self._gens = dict(zip(symbols, gens))
            self.zero = self._K.zero
            self.one = self._K.one
        else:
            self._K = None
            self._gens = {}
            self.zero = mpq(0)
            self.one = mpq(1)

    def __repr__(self):
        return f"ScalarField({', '.join(self.symbols) or 'QQ'})"

    @property
    def is_rational(self) -> bool:
        return self._K is None

    def __call__(self, value):
        """Convert an int, Fraction, mpq, string or element of a subfield."""
        if self._K is None:
            if isinstance(value, (int, Fraction, str)) or type(value) is type(self.zero):
                return to_mpq(value)
            if hasattr(value, "numer"):
                if value.numer.is_ground and value.denom.is_ground:
                    return mpq(value.numer.LC) / mpq(value.denom.LC)
                raise ValueError(f"{value} is not a rational number")
            return to_mpq(value)
        if hasattr(value, "field"):
            if value.field is self._K:
                return value
            return value.set_field(self._K)
        return self._K.field_new(QQ.convert(to_mpq(value)))

    def symbol(self, name: str):
        return self._gens[name]

    def extend(self, more: Iterable[str]) -> "ScalarField":
        extra = tuple(s for s in more if s not in self.symbols)
        return scalar_field(self.symbols + extra)

    # queries -----------------------------------------------------------

    def is_constant(self, x) -> bool:
        if self._K is None:
            return True
        return x.numer.is_ground and x.denom.is_ground

    def to_rational(self, x) -> mpq:
        if self._K is None:
            return x
        if not self.is_constant(x):
            raise ValueError(f"{x} is not a rational number")
        return mpq(x.numer.LC) / mpq(x.denom.LC)

    def free_symbols(self, x) -> set[str]:
        if self._K is None:
            return set()
        used = set()
        for part in (x.numer, x.denom):
            for monom in part.monoms():
                used.update(s for s, e in zip(self.symbols, monom) if e)
        return used

    def size(self, x) -> int:
        """Rough cost measure used for pivot selection."""
        if self._K is None:
            return x.numerator.bit_length() + x.denominator.bit_length()
        return 64 * (len(x.numer) + len(x.denom) - 1)

    def specialize(self, x, values: Mapping[str, object]) -> mpq:
        """Substitute rationals for every symbol; ZeroDivisionError at a pole."""
        if self._K is None:
            return x
        num = _eval_ring_element(x.numer, self.symbols, values)
        den = _eval_ring_element(x.denom, self.symbols, values)
        if den == 0:
            raise ZeroDivisionError("specialization hits a pole")
        return num / den

    def substitute(self, x, values: Mapping[str, object]):
        """Partially substitute rationals for some symbols, staying in this field."""
        if self._K is None or not values:
            return x
        pairs = [(self.symbols.index(s), QQ.convert(to_mpq(v))) for s, v in values.items() if s in self._gens]
        num = x.numer.subs(pairs) if pairs else x.numer
        den = x.denom.subs(pairs) if pairs else x.denom
        return self._K.new(num, den)

    def format(self, x) -> str:
        if self._K is None:
            return format_rational(x)
        text = str(x)
        return text.replace("**", "^")

    def to_sympy(self, x):
        if self._K is None:
            return sympy.Rational(int(x.numerator), int(x.denominator))
        return x.as_expr()


def _eval_ring_element(p, symbols, values) -> mpq:
    total = mpq(0)
    vals = [to_mpq(values[s]) for s in symbols]
    for monom, coeff in p.terms():
        term = mpq(coeff)
        for v, e in zip(vals, monom):
            if e:
                term *= v**e
        total += term
    return total


@functools.lru_cache(maxsize=None)
def scalar_field(symbols: tuple[str, ...] = ()) -> ScalarField:
    return ScalarField(tuple(symbols))
