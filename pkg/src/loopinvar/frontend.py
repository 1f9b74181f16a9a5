"""Loop language: tokenizer, parser, validation, desugaring and printing.

Example source::

    params p
    z = 0
    while true:
      s = Bernoulli(1/2)
      if s = 0 then
        (x, y) = x + x*y, 1/3*x + 2/3*y + x*y
      else
        (x, y) = x + y + 2/3*x*y, 2*y + 2/3*x*y
      end
      z = z - 1 {1/2} z + 2
    end

Multi-target assignments are simultaneous; statements on separate lines
run sequentially.  ``if`` tests a Bernoulli draw and ``e1 {p} e2`` is a
binary probabilistic choice; :func:`desugar` turns both into ``Choice``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Union

from loopinvar.errors import DesugarError, LoopSyntaxError, NonPolynomialError, ValidationError

DISTRIBUTIONS = {"Bernoulli": 1, "Normal": 2, "Uniform": 2}
KEYWORDS = {"params", "while", "true", "end", "choose", "if", "then", "else"}


# --------------------------------------------------------------------------
# expression AST


@dataclass(frozen=True)
class Num:
    value: Fraction


@dataclass(frozen=True)
class Sym:
    name: str


@dataclass(frozen=True)
class Add:
    terms: tuple


@dataclass(frozen=True)
class Mul:
    factors: tuple


@dataclass(frozen=True)
class Neg:
    arg: object


@dataclass(frozen=True)
class Pow:
    base: object
    exp: int


@dataclass(frozen=True)
class InlineChoice:
    """``left {prob} right``: left with probability ``prob``."""

    left: object
    prob: object
    right: object


Expr = Union[Num, Sym, Add, Mul, Neg, Pow]


def symbols_of(e) -> set[str]:
    if isinstance(e, Sym):
        return {e.name}
    if isinstance(e, Num):
        return set()
    if isinstance(e, (Add, Mul)):
        out = set()
        for part in e.terms if isinstance(e, Add) else e.factors:
            out |= symbols_of(part)
        return out
    if isinstance(e, Neg):
        return symbols_of(e.arg)
    if isinstance(e, Pow):
        return symbols_of(e.base)
    if isinstance(e, InlineChoice):
        return symbols_of(e.left) | symbols_of(e.prob) | symbols_of(e.right)
    raise TypeError(e)


def constant_value(e) -> Fraction | None:
    """Exact value of a symbol-free expression, else None."""
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Sym):
        return None
    if isinstance(e, Neg):
        v = constant_value(e.arg)
        return None if v is None else -v
    if isinstance(e, Pow):
        v = constant_value(e.base)
        return None if v is None else v**e.exp
    if isinstance(e, Add):
        vals = [constant_value(t) for t in e.terms]
        return None if None in vals else sum(vals, Fraction(0))
    if isinstance(e, Mul):
        vals = [constant_value(t) for t in e.factors]
        if None in vals:
            return None
        out = Fraction(1)
        for v in vals:
            out *= v
        return out
    return None


def num(q) -> Expr:
    q = Fraction(q)
    return Num(q) if q >= 0 else Neg(Num(-q))


def occurrence_degrees(e, name: str, counted) -> list[int]:
    """Degree of every monomial of the expanded expression that contains ``name``.

    Degrees count only the symbols in ``counted`` (program variables, not
    parameters).  Coefficients are ignored, so cancellations are not
    detected: the assignment-level dependency relation is syntactic.
    """
    return [sum(v for k, v in m.items() if k in counted) for m in _monomial_supports(e) if m.get(name)]


def _monomial_supports(e) -> list[dict]:
    if isinstance(e, Num):
        return [{}]
    if isinstance(e, Sym):
        return [{e.name: 1}]
    if isinstance(e, Neg):
        return _monomial_supports(e.arg)
    if isinstance(e, Add):
        out = []
        for t in e.terms:
            out.extend(_monomial_supports(t))
        return _dedupe(out)
    if isinstance(e, Mul):
        acc = [{}]
        for f in e.factors:
            acc = _dedupe([_merge(a, b) for a in acc for b in _monomial_supports(f)])
        return acc
    if isinstance(e, Pow):
        acc = [{}]
        for _ in range(e.exp):
            acc = _dedupe([_merge(a, b) for a in acc for b in _monomial_supports(e.base)])
        return acc
    if isinstance(e, InlineChoice):
        return _dedupe(_monomial_supports(e.left) + _monomial_supports(e.right))
    raise TypeError(e)


def _merge(a, b):
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, 0) + v
    return out


def _dedupe(ms):
    seen = {}
    for m in ms:
        seen[tuple(sorted(m.items()))] = m
    return list(seen.values())


# --------------------------------------------------------------------------
# statements


@dataclass(frozen=True)
class Distribution:
    kind: str
    args: tuple

    def __post_init__(self):
        if self.kind not in DISTRIBUTIONS:
            raise ValidationError(f"unknown distribution {self.kind}")


@dataclass(frozen=True)
class Assign:
    targets: tuple[str, ...]
    exprs: tuple

    @property
    def simultaneous(self) -> bool:
        return len(self.targets) > 1


@dataclass(frozen=True)
class Draw:
    target: str
    dist: Distribution


@dataclass(frozen=True)
class Choice:
    branches: tuple  # of (probability expr, tuple of statements)


@dataclass(frozen=True)
class If:
    var: str
    value: int
    then: tuple
    orelse: tuple


Statement = Union[Assign, Draw, Choice, If]


@dataclass(frozen=True)
class Program:
    params: tuple[str, ...]
    inits: tuple
    body: tuple
    vars: tuple[str, ...] = field(default=())

    @property
    def is_probabilistic(self) -> bool:
        return any(isinstance(s, (Draw, Choice, If)) or _has_inline(s) for s in walk(self.inits + self.body))

    @property
    def has_sugar(self) -> bool:
        return any(isinstance(s, If) or _has_inline(s) for s in walk(self.body + self.inits))


def _has_inline(s) -> bool:
    return isinstance(s, Assign) and any(isinstance(e, InlineChoice) for e in s.exprs)


def walk(stmts) -> Iterator:
    for s in stmts:
        yield s
        if isinstance(s, Choice):
            for _, block in s.branches:
                yield from walk(block)
        elif isinstance(s, If):
            yield from walk(s.then)
            yield from walk(s.orelse)


def assigned_in(stmts) -> list[str]:
    """Targets in order of first assignment."""
    out: list[str] = []
    for s in walk(stmts):
        names = s.targets if isinstance(s, Assign) else (s.target,) if isinstance(s, Draw) else ()
        for n in names:
            if n not in out:
                out.append(n)
    return out


# --------------------------------------------------------------------------
# tokenizer

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<number>\d+\.\d*|\.\d+|\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>\*\*|<-|←|[-+*/^(){},=:])
    """,
    re.VERBOSE,
)


@dataclass
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise LoopSyntaxError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        value = m.group()
        if kind not in ("ws", "comment"):
            if kind == "op" and value in ("<-", "←"):
                value = "="
            if kind == "op" and value == "**":
                value = "^"
            if kind == "ident" and value in KEYWORDS:
                kind = "kw"
            tokens.append(Token(kind, value, line, pos - line_start + 1))
        newlines = value.count("\n")
        if newlines:
            line += newlines
            line_start = m.start() + value.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


# --------------------------------------------------------------------------
# parser


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k=1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, expected: str):
        t = self.tok
        found = t.text or "end of input"
        raise LoopSyntaxError(f"expected {expected}, found {found!r}", t.line, t.col, expected)

    def accept(self, text: str) -> bool:
        if self.tok.text == text and self.tok.kind in ("op", "kw"):
            self.i += 1
            return True
        return False

    def expect(self, text: str):
        if not self.accept(text):
            self.error(repr(text))

    def ident(self) -> str:
        if self.tok.kind != "ident":
            self.error("identifier")
        name = self.tok.text
        self.i += 1
        return name

    # program ------------------------------------------------------------

    def program(self) -> Program:
        params: list[str] = []
        if self.accept("params"):
            params.append(self.ident())
            while self.accept(","):
                params.append(self.ident())
        inits = []
        while not (self.tok.kind == "kw" and self.tok.text == "while"):
            if self.tok.kind == "eof":
                self.error("'while'")
            inits.append(self.simple_statement())
        self.expect("while")
        if not (self.accept("true") or self.accept("*")):
            self.error("'true' or '*'")
        self.expect(":")
        body = self.block(("end",))
        self.expect("end")
        if self.tok.kind != "eof":
            self.error("end of input")
        return Program(tuple(params), tuple(inits), tuple(body))

    def block(self, stops) -> list:
        out = []
        while not (self.tok.text in stops and self.tok.kind in ("kw", "op")):
            if self.tok.kind == "eof":
                self.error(" or ".join(repr(s) for s in stops))
            out.append(self.statement())
        return out

    def statement(self):
        if self.tok.kind == "kw" and self.tok.text == "choose":
            return self.choice()
        if self.tok.kind == "kw" and self.tok.text == "if":
            return self.ifstmt()
        return self.simple_statement()

    def simple_statement(self):
        targets = self.lhs()
        self.expect("=")
        if len(targets) == 1 and self.tok.kind == "ident" and self.tok.text in DISTRIBUTIONS and self.peek().text == "(":
            return Draw(targets[0], self.distribution())
        exprs = [self.rhs()]
        while self.accept(","):
            exprs.append(self.rhs())
        if len(exprs) != len(targets):
            raise ValidationError(f"assignment to {', '.join(targets)} has {len(exprs)} right-hand sides")
        if len(set(targets)) != len(targets):
            raise ValidationError(f"repeated target in simultaneous assignment to {', '.join(targets)}")
        if len(targets) > 1 and any(isinstance(e, InlineChoice) for e in exprs):
            raise ValidationError("probabilistic choice is only allowed in single-target assignments")
        return Assign(tuple(targets), tuple(exprs))

    def lhs(self) -> list[str]:
        if self.accept("("):
            names = [self.ident()]
            while self.accept(","):
                names.append(self.ident())
            self.expect(")")
            return names
        names = [self.ident()]
        while self.tok.text == "," and self.peek().kind == "ident":
            self.i += 1
            names.append(self.ident())
        return names

    def rhs(self):
        left = self.expr()
        if self.accept("{"):
            prob = self.expr()
            self.expect("}")
            right = self.expr()
            return InlineChoice(left, prob, right)
        return left

    def distribution(self) -> Distribution:
        kind = self.ident()
        self.expect("(")
        args = [self.expr()]
        while self.accept(","):
            args.append(self.expr())
        self.expect(")")
        if len(args) != DISTRIBUTIONS[kind]:
            raise ValidationError(f"{kind} takes {DISTRIBUTIONS[kind]} argument(s), got {len(args)}")
        return Distribution(kind, tuple(args))

    def choice(self) -> Choice:
        self.expect("choose")
        branches = []
        while self.accept("{"):
            prob = self.expr()
            self.expect(":")
            block = self.block(("}",))
            self.expect("}")
            branches.append((prob, tuple(block)))
        if not branches:
            self.error("'{'")
        return Choice(tuple(branches))

    def ifstmt(self) -> If:
        self.expect("if")
        var = self.ident()
        self.expect("=")
        if self.tok.kind != "number" or not self.tok.text.isdigit():
            self.error("integer")
        value = int(self.tok.text)
        self.i += 1
        self.expect("then")
        then = self.block(("else", "end"))
        orelse = []
        if self.accept("else"):
            orelse = self.block(("end",))
        self.expect("end")
        return If(var, value, tuple(then), tuple(orelse))

    # expressions ----------------------------------------------------------

    def expr(self):
        terms = [self.term()]
        while self.tok.text in ("+", "-") and self.tok.kind == "op":
            op = self.tok.text
            self.i += 1
            t = self.term()
            terms.append(t if op == "+" else Neg(t))
        if len(terms) == 1:
            return terms[0]
        return Add(tuple(_flatten(Add, terms)))

    def term(self):
        if self.accept("-"):
            return Neg(self.term())
        if self.accept("+"):
            return self.term()
        factors = [self.power()]
        while self.tok.text in ("*", "/") and self.tok.kind == "op":
            op = self.tok.text
            self.i += 1
            f = self.power()
            if op == "/":
                value = constant_value(f)
                if value is None:
                    raise NonPolynomialError("division by a non-constant expression", self.tok.line, self.tok.col)
                if value == 0:
                    raise ValidationError("division by zero")
                f = num(1 / value)
            factors.append(f)
        if len(factors) == 1:
            return factors[0]
        return Mul(tuple(_flatten(Mul, factors)))

    def power(self):
        base = self.atom()
        if self.accept("^"):
            if self.tok.kind != "number" or not self.tok.text.isdigit():
                self.error("nonnegative integer exponent")
            exp = int(self.tok.text)
            self.i += 1
            return Pow(base, exp)
        return base

    def atom(self):
        t = self.tok
        if t.kind == "number":
            self.i += 1
            value = Fraction(t.text)
            # p/q literal
            if self.tok.text == "/" and self.peek().kind == "number" and self.peek(2).text not in ("^",):
                self.i += 1
                den = Fraction(self.tok.text)
                self.i += 1
                if den == 0:
                    raise ValidationError("division by zero")
                value = value / den
            return Num(value)
        if t.kind == "ident":
            if self.peek().text == "(" and self.peek().line == t.line:
                if t.text in DISTRIBUTIONS:
                    raise LoopSyntaxError(f"{t.text}(...) may only appear as a draw 'x = {t.text}(...)'", t.line, t.col)
                raise NonPolynomialError(f"non-polynomial function {t.text}(...) is not supported", t.line, t.col)
            self.i += 1
            return Sym(t.text)
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        self.error("expression")


def _flatten(cls, items):
    out = []
    for it in items:
        if isinstance(it, cls):
            out.extend(it.terms if cls is Add else it.factors)
        else:
            out.append(it)
    return out


# --------------------------------------------------------------------------
# validation


def parse_program(text: str) -> Program:
    """Parse and validate loop source text."""
    parser = _Parser(text)
    if _body_is_empty(parser):
        raise ValidationError("empty loop body")
    prog = parser.program()
    return validate(prog)


def parse_expression(text: str):
    """Parse a single polynomial expression."""
    parser = _Parser(text)
    e = parser.expr()
    if parser.tok.kind != "eof":
        parser.error("end of expression")
    return e


def _body_is_empty(parser: _Parser) -> bool:
    toks = parser.toks
    for k, t in enumerate(toks):
        if t.kind == "kw" and t.text == "while":
            rest = toks[k + 1 : k + 4]
            return len(rest) == 3 and rest[1].text == ":" and rest[2].kind == "kw" and rest[2].text == "end"
    return False


def validate(prog: Program) -> Program:
    params = set(prog.params)
    if len(params) != len(prog.params):
        raise ValidationError("duplicate parameter")
    if not prog.body:
        raise ValidationError("empty loop body")
    variables = assigned_in(prog.inits)
    for v in assigned_in(prog.body):
        if v not in variables:
            variables.append(v)
    clash = params.intersection(variables)
    if clash:
        raise ValidationError(f"parameter(s) assigned in the program: {', '.join(sorted(clash))}")
    known = params | set(variables)
    for s in walk(prog.inits + prog.body):
        for e in _expressions(s):
            unknown = symbols_of(e) - known
            if unknown:
                raise ValidationError(f"unknown symbol(s): {', '.join(sorted(unknown))}")
        if isinstance(s, If) and s.var not in known:
            raise ValidationError(f"unknown symbol(s): {s.var}")
        if isinstance(s, Draw):
            _check_distribution(s.dist)
        if isinstance(s, Choice):
            _check_probabilities([p for p, _ in s.branches], params)
        if isinstance(s, Assign):
            for e in s.exprs:
                if isinstance(e, InlineChoice):
                    _check_probabilities([e.prob], params, total=False)
    for s in walk(prog.inits):
        if isinstance(s, (Choice, If)):
            raise ValidationError("initialisation may only contain assignments and draws")
    out = Program(prog.params, prog.inits, prog.body, tuple(variables))
    if out.is_probabilistic:
        _check_single_assignment(prog.body)
    return out


def _expressions(s):
    if isinstance(s, Assign):
        for e in s.exprs:
            yield e
    elif isinstance(s, Draw):
        yield from s.dist.args
    elif isinstance(s, Choice):
        for p, _ in s.branches:
            yield p


def _check_distribution(d: Distribution):
    vals = [constant_value(a) for a in d.args]
    if d.kind == "Bernoulli" and vals[0] is not None and not 0 <= vals[0] <= 1:
        raise ValidationError(f"Bernoulli parameter {vals[0]} outside [0, 1]")
    if d.kind == "Uniform" and None not in vals and not vals[0] < vals[1]:
        raise ValidationError(f"Uniform bounds {vals[0]}, {vals[1]} need low < high")
    if d.kind == "Normal" and vals[1] is not None and vals[1] < 0:
        raise ValidationError(f"Normal variance {vals[1]} is negative")


def _check_probabilities(probs, params, total=True):
    consts = [constant_value(p) for p in probs]
    for p, v in zip(probs, consts):
        if v is None:
            if symbols_of(p) - params:
                raise ValidationError("branch probabilities may only depend on parameters")
        elif not 0 <= v <= 1:
            raise ValidationError(f"branch probability {v} outside [0, 1]")
    if total:
        if None not in consts:
            if sum(consts) != 1:
                raise ValidationError(f"branch probabilities sum to {sum(consts)}, not 1")
        elif not _symbolic_sum_is_one(probs, params):
            raise ValidationError("branch probabilities do not sum to 1")


def _symbolic_sum_is_one(probs, params) -> bool:
    from loopinvar.algebra import Polynomial, scalar_field

    F = scalar_field(tuple(sorted(params)))
    total = F.zero
    for p in probs:
        total = total + expr_to_scalar(p, F)
    return total == F.one


def _check_single_assignment(body):
    seen: set[str] = set()
    for s in body:
        names = set()
        if isinstance(s, Assign):
            names = set(s.targets)
        elif isinstance(s, Draw):
            names = {s.target}
        elif isinstance(s, (Choice, If)):
            blocks = [b for _, b in s.branches] if isinstance(s, Choice) else [s.then, s.orelse]
            for block in blocks:
                inner: list[str] = []
                for t in block:
                    inner.extend(t.targets if isinstance(t, Assign) else [t.target] if isinstance(t, Draw) else assigned_in([t]))
                if len(inner) != len(set(inner)):
                    raise ValidationError("probabilistic programs may assign each variable only once per branch")
                names |= set(inner)
        repeated = names & seen
        if repeated:
            raise ValidationError(
                f"probabilistic programs may assign each variable once in the loop body: {', '.join(sorted(repeated))}"
            )
        seen |= names


def expr_to_scalar(e, field):
    """Evaluate a parameter-only expression in a ScalarField."""
    if isinstance(e, Num):
        return field(e.value)
    if isinstance(e, Sym):
        return field.symbol(e.name)
    if isinstance(e, Neg):
        return -expr_to_scalar(e.arg, field)
    if isinstance(e, Add):
        acc = field.zero
        for t in e.terms:
            acc = acc + expr_to_scalar(t, field)
        return acc
    if isinstance(e, Mul):
        acc = field.one
        for t in e.factors:
            acc = acc * expr_to_scalar(t, field)
        return acc
    if isinstance(e, Pow):
        return expr_to_scalar(e.base, field) ** e.exp
    raise TypeError(e)


# --------------------------------------------------------------------------
# desugaring


def desugar(prog: Program) -> Program:
    """Rewrite if-on-Bernoulli and inline choices into Choice statements."""
    body = tuple(_desugar_block(prog.body))
    out = Program(prog.params, prog.inits, body, prog.vars)
    return out


def _desugar_block(stmts) -> list:
    out = []
    for s in stmts:
        if isinstance(s, If):
            dist = _bernoulli_for(s.var, out)
            if dist is None:
                raise DesugarError(f"'if {s.var} = ...' needs {s.var} drawn from a Bernoulli distribution earlier in the body")
            if s.value not in (0, 1):
                raise DesugarError(f"a Bernoulli draw is 0 or 1, cannot compare with {s.value}")
            p = dist.args[0]
            one_minus_p = _one_minus(p)
            p_then = one_minus_p if s.value == 0 else p
            p_else = p if s.value == 0 else one_minus_p
            # each branch pins the tested variable so later reads stay correlated with the branch
            then = (Assign((s.var,), (num(s.value),)),) + tuple(_desugar_block(s.then))
            orelse = (Assign((s.var,), (num(1 - s.value),)),) + tuple(_desugar_block(s.orelse))
            out.append(Choice(((p_then, then), (p_else, orelse))))
        elif isinstance(s, Assign) and _has_inline(s):
            (target,), (e,) = s.targets, s.exprs
            out.append(
                Choice(
                    (
                        (e.prob, (Assign((target,), (e.left,)),)),
                        (_one_minus(e.prob), (Assign((target,), (e.right,)),)),
                    )
                )
            )
        elif isinstance(s, Choice):
            out.append(Choice(tuple((p, tuple(_desugar_block(b))) for p, b in s.branches)))
        else:
            out.append(s)
    return out


def _one_minus(p):
    v = constant_value(p)
    if v is not None:
        return num(1 - v)
    return Add((Num(Fraction(1)), Neg(p)))


def _bernoulli_for(var, preceding):
    for s in reversed(preceding):
        if isinstance(s, Draw) and s.target == var:
            return s.dist if s.dist.kind == "Bernoulli" else None
        if isinstance(s, Assign) and var in s.targets:
            return None
    return None


# --------------------------------------------------------------------------
# printing

_PREC = {Add: 1, Neg: 2, Mul: 3, Pow: 4}


def format_expr(e, parent: int = 0) -> str:
    if isinstance(e, Num):
        v = e.value
        text = str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
        return f"({text})" if v.denominator != 1 and parent >= 3 else text
    if isinstance(e, Sym):
        return e.name
    if isinstance(e, Add):
        parts = [format_expr(e.terms[0], 1)]
        for t in e.terms[1:]:
            if isinstance(t, Neg):
                parts.append(f"- {format_expr(t.arg, 2)}")
            else:
                parts.append(f"+ {format_expr(t, 1)}")
        text = " ".join(parts)
        return f"({text})" if parent > 1 else text
    if isinstance(e, Neg):
        text = f"-{format_expr(e.arg, 2)}"
        return f"({text})" if parent > 1 else text
    if isinstance(e, Mul):
        text = "*".join(format_expr(f, 3) for f in e.factors)
        return f"({text})" if parent > 3 else text
    if isinstance(e, Pow):
        base = format_expr(e.base, 5)
        return f"({base})^{e.exp}" if isinstance(e.base, Pow) else f"{base}^{e.exp}"
    if isinstance(e, InlineChoice):
        return f"{format_expr(e.left)} {{{format_expr(e.prob)}}} {format_expr(e.right)}"
    raise TypeError(e)


def format_statement(s, indent: int = 0) -> list[str]:
    pad = "  " * indent
    if isinstance(s, Assign):
        lhs = s.targets[0] if len(s.targets) == 1 else f"({', '.join(s.targets)})"
        return [f"{pad}{lhs} = {', '.join(format_expr(e) for e in s.exprs)}"]
    if isinstance(s, Draw):
        return [f"{pad}{s.target} = {s.dist.kind}({', '.join(format_expr(a) for a in s.dist.args)})"]
    if isinstance(s, Choice):
        lines = [f"{pad}choose"]
        for p, block in s.branches:
            lines.append(f"{pad}  {{{format_expr(p)}:")
            for t in block:
                lines.extend(format_statement(t, indent + 2))
            lines.append(f"{pad}  }}")
        return lines
    if isinstance(s, If):
        lines = [f"{pad}if {s.var} = {s.value} then"]
        for t in s.then:
            lines.extend(format_statement(t, indent + 1))
        if s.orelse:
            lines.append(f"{pad}else")
            for t in s.orelse:
                lines.extend(format_statement(t, indent + 1))
        lines.append(f"{pad}end")
        return lines
    raise TypeError(s)


def format_program(prog: Program) -> str:
    lines = []
    if prog.params:
        lines.append(f"params {', '.join(prog.params)}")
    for s in prog.inits:
        lines.extend(format_statement(s))
    lines.append("while true:")
    for s in prog.body:
        lines.extend(format_statement(s, 1))
    lines.append("end")
    return "\n".join(lines) + "\n"
