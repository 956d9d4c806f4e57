"""Quantifier-free semialgebraic formulas over base variables ``x1..xm``.

Formulas are immutable trees of sign-condition atoms combined with
``&`` (and), ``|`` (or), ``!`` (not) and ``\\`` (set difference)::

    formula := or
    or      := and ("|" and)*
    and     := unary (("&" | "\\") unary)*      left associative
    unary   := "!" unary | "(" formula ")" | atom
    atom    := poly rel poly                     rel in = >= > <= < !=
    poly    := rational expressions in x1..xm with + - * / ^ and parentheses

``#`` starts a comment running to the end of the line.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

import numpy as np

from .circuit import PolyEvaluator
from .poly import Polynomial

__all__ = [
    "And", "Atom", "Diff", "Formula", "Not", "Or", "ParseError", "Rel", "Tri",
    "atoms", "base_names", "eval_float", "eval_float_batch", "eval_point",
    "is_nnf", "parse", "to_nnf", "to_text",
]


class Rel(enum.Enum):
    EQ = "="
    GE = ">="
    GT = ">"
    LE = "<="
    LT = "<"
    NE = "!="


class Tri(enum.IntEnum):
    """Three-valued truth; Kleene conjunction is ``min``, disjunction ``max``."""

    FALSE = 0
    BOUNDARY = 1
    TRUE = 2


def base_names(m: int) -> tuple[str, ...]:
    return tuple(f"x{i}" for i in range(1, m + 1))


@dataclass(frozen=True)
class Atom:
    poly: Polynomial
    rel: Rel

    @property
    def base_dim(self) -> int:
        return self.poly.nvars


@dataclass(frozen=True)
class And:
    children: tuple

    def __post_init__(self):
        if len(self.children) < 2:
            raise ValueError("And needs at least two children")

    @property
    def base_dim(self) -> int:
        return self.children[0].base_dim


@dataclass(frozen=True)
class Or:
    children: tuple

    def __post_init__(self):
        if len(self.children) < 2:
            raise ValueError("Or needs at least two children")

    @property
    def base_dim(self) -> int:
        return self.children[0].base_dim


@dataclass(frozen=True)
class Not:
    child: "Formula"

    @property
    def base_dim(self) -> int:
        return self.child.base_dim


@dataclass(frozen=True)
class Diff:
    left: "Formula"
    right: "Formula"

    @property
    def base_dim(self) -> int:
        return self.left.base_dim


Formula = Union[Atom, And, Or, Not, Diff]


def atoms(f: Formula) -> list[Atom]:
    if isinstance(f, Atom):
        return [f]
    if isinstance(f, (And, Or)):
        return [a for c in f.children for a in atoms(c)]
    if isinstance(f, Not):
        return atoms(f.child)
    return atoms(f.left) + atoms(f.right)


# ---------------------------------------------------------------------------
# printing

def to_text(f: Formula) -> str:
    """Canonical text; ``parse(to_text(f), f.base_dim) == f``."""
    if isinstance(f, Atom):
        return f"{f.poly} {f.rel.value} 0"
    if isinstance(f, And):
        return " & ".join(f"({to_text(c)})" for c in f.children)
    if isinstance(f, Or):
        return " | ".join(f"({to_text(c)})" for c in f.children)
    if isinstance(f, Not):
        return f"!({to_text(f.child)})"
    return f"({to_text(f.left)}) \\ ({to_text(f.right)})"


# ---------------------------------------------------------------------------
# parsing

class ParseError(ValueError):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"syntax error at {line}:{col}: {msg}")
        self.msg = msg
        self.line = line
        self.col = col


_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r\n]+|\#[^\n]*)
  | (?P<num>\d+(?:\.\d*)?|\.\d+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<rel>>=|<=|!=|==|=|>|<)
  | (?P<op>[-+*/^()&|\\!])
""", re.VERBOSE)

_VAR = re.compile(r"x([1-9][0-9]*)")


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind != "ws":
            toks.append(_Tok(kind, m.group(), line, pos - line_start + 1))
        else:
            nl = m.group().count("\n")
            if nl:
                line += nl
                line_start = m.start() + m.group().rindex("\n") + 1
        pos = m.end()
    # end of input is located just past the last token
    if toks:
        last = toks[-1]
        toks.append(_Tok("eof", "", last.line, last.col + len(last.text)))
    else:
        toks.append(_Tok("eof", "", 1, 1))
    return toks


class _Parser:
    def __init__(self, toks: list[_Tok], names: tuple[str, ...]):
        self.toks = toks
        self.pos = 0
        self.names = names
        self.furthest: ParseError | None = None

    def peek(self) -> _Tok:
        return self.toks[self.pos]

    def error(self, msg: str, tok: _Tok | None = None) -> ParseError:
        tok = tok or self.peek()
        err = ParseError(msg, tok.line, tok.col)
        if self.furthest is None or (tok.line, tok.col) > (self.furthest.line, self.furthest.col):
            self.furthest = err
        return err

    def take(self, text: str) -> bool:
        tok = self.peek()
        if tok.kind in ("op", "rel") and tok.text == text:
            self.pos += 1
            return True
        return False

    def expect(self, text: str):
        if not self.take(text):
            tok = self.peek()
            got = tok.text or "end of input"
            raise self.error(f"expected {text!r}, got {got!r}")

    # formula level

    def formula(self) -> Formula:
        kids = [self.conj()]
        while self.take("|"):
            kids.append(self.conj())
        return kids[0] if len(kids) == 1 else Or(tuple(kids))

    def conj(self) -> Formula:
        run = [self.unary()]
        while True:
            if self.take("&"):
                run.append(self.unary())
            elif self.take("\\"):
                left = run[0] if len(run) == 1 else And(tuple(run))
                run = [Diff(left, self.unary())]
            else:
                break
        return run[0] if len(run) == 1 else And(tuple(run))

    def unary(self) -> Formula:
        if self.take("!"):
            return Not(self.unary())
        tok = self.peek()
        if tok.kind == "op" and tok.text == "(":
            start = self.pos
            try:
                return self.atom()
            except ParseError:
                self.pos = start
            self.expect("(")
            inner = self.formula()
            self.expect(")")
            return inner
        return self.atom()

    def atom(self) -> Atom:
        lhs = self.poly()
        tok = self.peek()
        if tok.kind != "rel":
            raise self.error(f"expected a relation, got {tok.text or 'end of input'!r}")
        self.pos += 1
        rel = Rel("=" if tok.text == "==" else tok.text)
        rhs = self.poly()
        return Atom(lhs - rhs, rel)

    # polynomial level

    def poly(self) -> Polynomial:
        acc = self.term()
        while True:
            if self.take("+"):
                acc = acc + self.term()
            elif self.take("-"):
                acc = acc - self.term()
            else:
                return acc

    def term(self) -> Polynomial:
        acc = self.factor()
        while True:
            if self.take("*"):
                acc = acc * self.factor()
            elif self.peek().text == "/" and self.peek().kind == "op":
                tok = self.peek()
                self.pos += 1
                den = self.factor()
                if not den.is_constant():
                    raise self.error("division by a non-constant polynomial", tok)
                if den.is_zero():
                    raise self.error("division by zero", tok)
                acc = acc.scale(1 / den.constant_value())
            else:
                return acc

    def factor(self) -> Polynomial:
        if self.take("-"):
            return -self.factor()
        if self.take("+"):
            return self.factor()
        base = self.primary()
        if self.take("^"):
            tok = self.peek()
            if tok.kind != "num" or not tok.text.isdigit():
                raise self.error("exponent must be a non-negative integer")
            self.pos += 1
            base = base ** int(tok.text)
        return base

    def primary(self) -> Polynomial:
        tok = self.peek()
        if tok.kind == "num":
            self.pos += 1
            return Polynomial.constant(self.names, Fraction(tok.text))
        if tok.kind == "name":
            self.pos += 1
            return Polynomial.var(self.names, tok.text)
        if self.take("("):
            inner = self.poly()
            self.expect(")")
            return inner
        raise self.error(f"unexpected {tok.text or 'end of input'!r}")


def parse(text: str, base_dim: int | None = None) -> Formula:
    """Parse formula text.

    The base dimension is the highest referenced ``x`` index unless
    ``base_dim`` is given (it must be at least that large).
    """
    toks = _tokenize(text)
    highest = 0
    for tok in toks:
        if tok.kind == "name":
            m = _VAR.fullmatch(tok.text)
            if not m:
                raise ParseError(f"unknown variable {tok.text!r}", tok.line, tok.col)
            highest = max(highest, int(m.group(1)))
    if base_dim is None:
        base_dim = highest
    elif base_dim < highest:
        tok = next(t for t in toks if t.kind == "name" and int(t.text[1:]) > base_dim)
        raise ParseError(f"unknown variable {tok.text!r} (base dimension {base_dim})",
                         tok.line, tok.col)
    p = _Parser(toks, base_names(base_dim))
    try:
        f = p.formula()
        if p.peek().kind != "eof":
            raise p.error(f"unexpected {p.peek().text!r}")
    except ParseError:
        raise p.furthest from None
    return f


# ---------------------------------------------------------------------------
# negation normal form

_NEGATE = {
    Rel.EQ: lambda p: Atom(p, Rel.NE),
    Rel.NE: lambda p: Atom(p, Rel.EQ),
    Rel.GE: lambda p: Atom(-p, Rel.GT),
    Rel.GT: lambda p: Atom(-p, Rel.GE),
    Rel.LE: lambda p: Atom(p, Rel.GT),
    Rel.LT: lambda p: Atom(p, Rel.GE),
}


def _positive_atom(a: Atom) -> Atom:
    if a.rel is Rel.LE:
        return Atom(-a.poly, Rel.GE)
    if a.rel is Rel.LT:
        return Atom(-a.poly, Rel.GT)
    return a


def to_nnf(f: Formula, negate: bool = False) -> Formula:
    """Push negations into atoms and eliminate ``Diff``, ``LE`` and ``LT``."""
    if isinstance(f, Atom):
        return _NEGATE[f.rel](f.poly) if negate else _positive_atom(f)
    if isinstance(f, Not):
        return to_nnf(f.child, not negate)
    if isinstance(f, Diff):
        # A \ B == A & !B;  !(A \ B) == !A | B
        kids = (to_nnf(f.left, negate), to_nnf(f.right, not negate))
        return Or(kids) if negate else And(kids)
    kids = tuple(to_nnf(c, negate) for c in f.children)
    flip = isinstance(f, And) == negate
    return Or(kids) if flip else And(kids)


def is_nnf(f: Formula) -> bool:
    if isinstance(f, Atom):
        return f.rel in (Rel.EQ, Rel.GE, Rel.GT, Rel.NE)
    if isinstance(f, (And, Or)):
        return all(is_nnf(c) for c in f.children)
    return False


# ---------------------------------------------------------------------------
# evaluation

_EXACT = {
    Rel.EQ: lambda v: v == 0,
    Rel.NE: lambda v: v != 0,
    Rel.GE: lambda v: v >= 0,
    Rel.GT: lambda v: v > 0,
    Rel.LE: lambda v: v <= 0,
    Rel.LT: lambda v: v < 0,
}


def _check_dim(f: Formula, x: Sequence):
    if len(x) != f.base_dim:
        raise ValueError(f"point of length {len(x)} for a formula over {f.base_dim} variables")


def eval_point(f: Formula, x: Sequence) -> bool:
    """Exact membership test at a rational point."""
    _check_dim(f, x)
    pt = [Fraction(v) for v in x]
    return _eval_exact(f, pt)


def _eval_exact(f, pt) -> bool:
    if isinstance(f, Atom):
        return _EXACT[f.rel](f.poly.eval(pt))
    if isinstance(f, And):
        return all(_eval_exact(c, pt) for c in f.children)
    if isinstance(f, Or):
        return any(_eval_exact(c, pt) for c in f.children)
    if isinstance(f, Not):
        return not _eval_exact(f.child, pt)
    return _eval_exact(f.left, pt) and not _eval_exact(f.right, pt)


def _atom_tri(rel: Rel, v: np.ndarray, band: float) -> np.ndarray:
    # closed conditions hold within the band; open ones are ambiguous there
    if rel is Rel.LE:
        rel, v = Rel.GE, -v
    elif rel is Rel.LT:
        rel, v = Rel.GT, -v
    near = np.abs(v) <= band
    if rel is Rel.EQ:
        return np.where(near, Tri.TRUE, Tri.FALSE)
    if rel is Rel.GE:
        return np.where(v >= -band, Tri.TRUE, Tri.FALSE)
    if rel is Rel.GT:
        return np.where(near, Tri.BOUNDARY, np.where(v > 0, Tri.TRUE, Tri.FALSE))
    return np.where(near, Tri.BOUNDARY, Tri.TRUE)


class _FloatFormula:
    """Formula with per-atom vectorized evaluators, cached by identity."""

    def __init__(self, f: Formula):
        self.f = f
        self.evs: dict[int, PolyEvaluator] = {}
        for a in atoms(f):
            self.evs.setdefault(id(a), PolyEvaluator(a.poly))

    def run(self, X: np.ndarray, band: float) -> np.ndarray:
        return self._run(self.f, X, band)

    def _run(self, f, X, band):
        if isinstance(f, Atom):
            return _atom_tri(f.rel, self.evs[id(f)].value(X), band).astype(np.int8)
        if isinstance(f, And):
            return np.minimum.reduce([self._run(c, X, band) for c in f.children])
        if isinstance(f, Or):
            return np.maximum.reduce([self._run(c, X, band) for c in f.children])
        if isinstance(f, Not):
            return (2 - self._run(f.child, X, band)).astype(np.int8)
        return np.minimum(self._run(f.left, X, band),
                          2 - self._run(f.right, X, band)).astype(np.int8)


def eval_float_batch(f: Formula, X, band: float = 1e-6) -> np.ndarray:
    """Tri-state membership for each row of ``X`` (values are :class:`Tri` codes).

    Equalities and non-strict inequalities count as satisfied when the atom
    value is within ``band`` of satisfying them; strict inequalities and
    disequalities whose value lies within ``band`` of zero are ``BOUNDARY``.
    """
    X = np.asarray(X, dtype=float).reshape(-1, f.base_dim)
    return _FloatFormula(f).run(X, band)


def eval_float(f: Formula, x: Sequence, tau: float = 1e-6) -> Tri:
    _check_dim(f, x)
    return Tri(int(eval_float_batch(f, [list(map(float, x))], tau)[0]))
