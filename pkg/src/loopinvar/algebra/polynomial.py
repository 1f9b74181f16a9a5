"""Sparse multivariate polynomials over a :class:`ScalarField`.

Monomials are exponent tuples over a fixed, ordered variable list.  All
listings use the graded order: lower total degree first and, within one
degree, lexicographically larger exponent vectors first (so ``x`` precedes
``y`` when ``x`` is declared first).
"""

from __future__ import annotations

from itertools import combinations_with_replacement
from typing import Iterable, Mapping

from loopinvar.algebra.scalars import ScalarField, format_rational
from loopinvar.errors import MissingBinding

Monomial = tuple[int, ...]


def grlex_key(m: Monomial):
    return (sum(m), tuple(-e for e in m))


def monomial_degree(m: Monomial) -> int:
    return sum(m)


def monomial_mul(a: Monomial, b: Monomial) -> Monomial:
    return tuple(x + y for x, y in zip(a, b))


def format_monomial(m: Monomial, variables: tuple[str, ...]) -> str:
    parts = []
    for name, e in zip(variables, m):
        if e == 1:
            parts.append(name)
        elif e > 1:
            parts.append(f"{name}^{e}")
    return "*".join(parts) if parts else "1"


def monomials_up_to(nvars: int, degree: int, allowed: Iterable[int] | None = None, mindeg: int = 0):
    """All monomials of total degree in [mindeg, degree] over the allowed positions, graded order."""
    allowed = range(nvars) if allowed is None else sorted(allowed)
    out = []
    for d in range(mindeg, degree + 1):
        for combo in combinations_with_replacement(allowed, d):
            m = [0] * nvars
            for i in combo:
                m[i] += 1
            out.append(tuple(m))
    return sorted(out, key=grlex_key)


class Polynomial:
    """Immutable sparse polynomial; ``terms`` maps exponent tuples to nonzero scalars."""

    __slots__ = ("variables", "field", "terms", "_hash")

    def __init__(self, variables: tuple[str, ...], field: ScalarField, terms: Mapping[Monomial, object] | None = None):
        self.variables = variables
        self.field = field
        self.terms = {m: c for m, c in (terms or {}).items() if c}
        self._hash = None

    # constructors -------------------------------------------------------

    @classmethod
    def constant(cls, variables, field, value):
        return cls(variables, field, {(0,) * len(variables): field(value)})

    @classmethod
    def var(cls, variables, field, name):
        m = [0] * len(variables)
        m[variables.index(name)] = 1
        return cls(variables, field, {tuple(m): field.one})

    @classmethod
    def monomial(cls, variables, field, m: Monomial, coeff=None):
        return cls(variables, field, {m: field.one if coeff is None else coeff})

    def _new(self, terms):
        p = Polynomial.__new__(Polynomial)
        p.variables = self.variables
        p.field = self.field
        p.terms = terms
        p._hash = None
        return p

    def zero(self):
        return self._new({})

    def one(self):
        return self._new({(0,) * len(self.variables): self.field.one})

    # arithmetic ---------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, Polynomial):
            return other
        return Polynomial.constant(self.variables, self.field, other)

    def __add__(self, other):
        other = self._coerce(other)
        terms = dict(self.terms)
        for m, c in other.terms.items():
            v = terms.get(m)
            if v is None:
                terms[m] = c
            else:
                v = v + c
                if v:
                    terms[m] = v
                else:
                    del terms[m]
        return self._new(terms)

    __radd__ = __add__

    def __neg__(self):
        return self._new({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def scale(self, s):
        if not s:
            return self._new({})
        return self._new({m: c * s for m, c in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            return self.scale(self.field(other))
        if len(self.terms) > len(other.terms):
            a, b = other.terms, self.terms
        else:
            a, b = self.terms, other.terms
        terms: dict = {}
        get = terms.get
        for ma, ca in a.items():
            for mb, cb in b.items():
                m = tuple(x + y for x, y in zip(ma, mb))
                v = get(m)
                terms[m] = ca * cb if v is None else v + ca * cb
        return self._new({m: c for m, c in terms.items() if c})

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative exponent")
        result = self.one()
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    # queries --------------------------------------------------------------

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self):
        return not self.terms

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            if not self.terms:
                return not other
            return self.is_constant() and self.constant_term() == other
        return self.variables == other.variables and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset((m, str(c)) for m, c in self.terms.items()))
        return self._hash

    def __len__(self):
        return len(self.terms)

    def degree(self) -> int:
        return max((sum(m) for m in self.terms), default=-1)

    def degree_in(self, name: str) -> int:
        i = self.variables.index(name)
        return max((m[i] for m in self.terms), default=-1)

    def is_constant(self):
        return all(not any(m) for m in self.terms)

    def constant_term(self):
        return self.terms.get((0,) * len(self.variables), self.field.zero)

    def coeff(self, m: Monomial):
        return self.terms.get(m, self.field.zero)

    def monomials(self) -> list[Monomial]:
        return sorted(self.terms, key=grlex_key)

    def used_variables(self) -> set[str]:
        used = set()
        for m in self.terms:
            used.update(v for v, e in zip(self.variables, m) if e)
        return used

    # substitution ---------------------------------------------------------

    def compose(self, subst: Mapping[str, "Polynomial"], target=None) -> "Polynomial":
        """Replace variables by polynomials and expand.

        ``target`` is a polynomial supplying the output variable list and
        field; by default the images' own.  Variables not occurring in ``p``
        need no binding.
        """
        used = self.used_variables()
        missing = used - set(subst)
        if missing:
            raise MissingBinding(f"no binding for {', '.join(sorted(missing))}")
        if target is None:
            target = next(iter(subst.values())) if subst else self
        powers = {name: [target.one(), subst[name]] for name in used}

        def power(name, e):
            cache = powers[name]
            while len(cache) <= e:
                cache.append(cache[-1] * subst[name])
            return cache[e]

        acc: dict = {}
        for m, c in self.terms.items():
            term = None
            for name, e in zip(self.variables, m):
                if e:
                    term = power(name, e) if term is None else term * power(name, e)
            if term is None:
                term = target.one()
            c = target.field(c) if target.field is not self.field else c
            for tm, tc in term.terms.items():
                v = acc.get(tm)
                acc[tm] = tc * c if v is None else v + tc * c
        return target._new({m: c for m, c in acc.items() if c})

    def partial_compose(self, subst: Mapping[str, "Polynomial"]) -> "Polynomial":
        """Substitute only the given variables; the others stay as they are."""
        full = dict(subst)
        for name in self.used_variables():
            if name not in full:
                full[name] = Polynomial.var(self.variables, self.field, name)
        return self.compose(full, target=self)

    def map_coefficients(self, fn, field: ScalarField | None = None) -> "Polynomial":
        f = field or self.field
        return Polynomial(self.variables, f, {m: fn(c) for m, c in self.terms.items()})

    def with_variables(self, variables: tuple[str, ...]) -> "Polynomial":
        """Re-embed into a variable list that contains all used variables."""
        index = [variables.index(v) for v in self.variables]
        terms = {}
        for m, c in self.terms.items():
            new = [0] * len(variables)
            for i, e in zip(index, m):
                new[i] = e
            terms[tuple(new)] = c
        return Polynomial(variables, self.field, terms)

    def evaluate(self, values: Mapping[str, object]):
        """Evaluate at scalar values for every used variable."""
        f = self.field
        total = f.zero
        for m, c in self.terms.items():
            t = c
            for name, e in zip(self.variables, m):
                if e:
                    t = t * f(values[name]) ** e
            total = total + t
        return total

    # printing -------------------------------------------------------------

    def format(self) -> str:
        if not self.terms:
            return "0"
        if self.is_constant():
            return self.field.format(self.constant_term())
        order = sorted(self.terms, key=lambda m: (-sum(m), tuple(-e for e in m)))
        out = []
        for m in order:
            c = self.terms[m]
            mono = format_monomial(m, self.variables) if any(m) else ""
            out.append(_signed_term(self.field, c, mono))
        text = " ".join(out)
        if text.startswith("+ "):
            text = text[2:]
        elif text.startswith("- "):
            text = "-" + text[2:]
        return text

    __str__ = format

    def __repr__(self):
        return f"Polynomial({self.format()})"


def _signed_term(field: ScalarField, c, mono: str) -> str:
    """Render ``c*mono`` with a leading '+ ' or '- '."""
    if field.is_constant(c):
        q = field.to_rational(c)
        sign = "-" if q < 0 else "+"
        q = abs(q)
        if not mono:
            return f"{sign} {format_rational(q)}"
        if q == 1:
            return f"{sign} {mono}"
        if q.denominator != 1 and q.numerator == 1:
            return f"{sign} {mono}/{q.denominator}"
        return f"{sign} {format_rational(q)}*{mono}"
    text = field.format(c)
    sign = "+"
    if text.startswith("-") and not _needs_parens(text[1:]):
        sign, text = "-", text[1:]
    if not mono:
        return f"{sign} ({text})" if _needs_parens(text) else f"{sign} {text}"
    return f"{sign} ({text})*{mono}" if _needs_parens(text) else f"{sign} {text}*{mono}"


def _needs_parens(text: str) -> bool:
    depth = 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch in "+-/" and depth == 0 and i > 0:
            return True
    return text.startswith("-")
