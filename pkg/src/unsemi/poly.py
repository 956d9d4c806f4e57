"""Sparse multivariate polynomials with exact rational coefficients.

A :class:`Polynomial` is an immutable map from exponent vectors to nonzero
:class:`fractions.Fraction` coefficients over an explicit, ordered list of
variable names.  Arithmetic requires both operands to share the same variable
list; use :meth:`Polynomial.extend` or :meth:`Polynomial.rename` to align them.

Terms are kept in graded-lexicographic order (total degree descending, then
exponents compared left to right, larger first), which gives every polynomial
a canonical text and structured form.
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational
from typing import Iterable, Mapping, Sequence

__all__ = [
    "AffineMap",
    "AlignmentError",
    "Polynomial",
    "SingularMapError",
    "as_fraction",
    "format_fraction",
]


class AlignmentError(ValueError):
    """Operands live over different variable lists."""


class SingularMapError(ValueError):
    """An affine map with zero determinant was supplied."""


def as_fraction(value) -> Fraction:
    """Coerce ints, Fractions, decimal strings and ``"n/d"`` strings exactly.

    Floats are accepted only when they are integral or dyadic (their exact
    binary value is used).
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not coefficients")
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, float):
        return Fraction(value)
    raise TypeError(f"cannot interpret {value!r} as a rational")


def format_fraction(q: Fraction) -> str:
    """Serialize as ``"num/den"`` (denominator always present)."""
    return f"{q.numerator}/{q.denominator}"


def _term_key(exps: tuple[int, ...]):
    return (-sum(exps), tuple(-e for e in exps))


class Polynomial:
    """Immutable sparse polynomial over named variables."""

    __slots__ = ("_vars", "_terms", "_hash")

    def __init__(self, var_names: Iterable[str], terms: Mapping | None = None):
        names = tuple(var_names)
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate variable names in {names}")
        clean: dict[tuple[int, ...], Fraction] = {}
        if terms:
            n = len(names)
            for exps, coeff in terms.items():
                exps = tuple(int(e) for e in exps)
                if len(exps) != n:
                    raise ValueError(
                        f"exponent vector {exps} does not match {n} variables")
                if any(e < 0 for e in exps):
                    raise ValueError(f"negative exponent in {exps}")
                c = as_fraction(coeff)
                if c:
                    clean[exps] = clean.get(exps, Fraction(0)) + c
                    if not clean[exps]:
                        del clean[exps]
        self._vars = names
        self._terms = {e: clean[e] for e in sorted(clean, key=_term_key)}
        self._hash = None

    @classmethod
    def _raw(cls, names: tuple[str, ...], terms: dict) -> "Polynomial":
        # terms must already be nonzero and correctly sized
        obj = cls.__new__(cls)
        obj._vars = names
        obj._terms = {e: terms[e] for e in sorted(terms, key=_term_key)}
        obj._hash = None
        return obj

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, var_names: Sequence[str]) -> "Polynomial":
        return cls(var_names)

    @classmethod
    def constant(cls, var_names: Sequence[str], value) -> "Polynomial":
        names = tuple(var_names)
        return cls(names, {(0,) * len(names): value})

    @classmethod
    def var(cls, var_names: Sequence[str], name: str) -> "Polynomial":
        names = tuple(var_names)
        try:
            i = names.index(name)
        except ValueError:
            raise KeyError(f"unknown variable {name!r}") from None
        exps = [0] * len(names)
        exps[i] = 1
        return cls(names, {tuple(exps): 1})

    # -- basic accessors ----------------------------------------------------

    @property
    def var_names(self) -> tuple[str, ...]:
        return self._vars

    @property
    def nvars(self) -> int:
        return len(self._vars)

    @property
    def terms(self) -> dict[tuple[int, ...], Fraction]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __len__(self) -> int:
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(not any(e) for e in self._terms)

    def constant_value(self) -> Fraction:
        return self._terms.get((0,) * self.nvars, Fraction(0))

    def degree(self) -> int:
        """Total degree; ``-1`` for the zero polynomial."""
        if not self._terms:
            return -1
        return max(sum(e) for e in self._terms)

    def variables_used(self) -> set[str]:
        used = set()
        for exps in self._terms:
            used.update(n for n, e in zip(self._vars, exps) if e)
        return used

    def __eq__(self, other) -> bool:
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self._vars == other._vars and self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self._vars, tuple(self._terms.items())))
        return self._hash

    def __repr__(self) -> str:
        return f"Polynomial({list(self._vars)!r}, {self})"

    # -- alignment ----------------------------------------------------------

    def extend(self, var_names: Sequence[str]) -> "Polynomial":
        """Re-express over a variable list that contains all current names."""
        names = tuple(var_names)
        if names == self._vars:
            return self
        index = {n: i for i, n in enumerate(names)}
        missing = [n for n in self._vars if n not in index]
        if missing:
            used = self.variables_used()
            if used.intersection(missing):
                raise AlignmentError(
                    f"variables {sorted(used.intersection(missing))} "
                    f"absent from target list {names}")
        pos = [index.get(n) for n in self._vars]
        terms = {}
        for exps, c in self._terms.items():
            new = [0] * len(names)
            for p, e in zip(pos, exps):
                if e:
                    new[p] = e
            terms[tuple(new)] = c
        return Polynomial._raw(names, terms)

    def rename(self, mapping: Mapping[str, str]) -> "Polynomial":
        names = tuple(mapping.get(n, n) for n in self._vars)
        if len(set(names)) != len(names):
            raise ValueError(f"renaming produces duplicate names: {names}")
        return Polynomial._raw(names, dict(self._terms))

    def _check(self, other: "Polynomial"):
        if self._vars != other._vars:
            raise AlignmentError(
                f"variable lists differ: {self._vars} vs {other._vars}")

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            self._check(other)
            return other
        return Polynomial.constant(self._vars, as_fraction(other))

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other) -> "Polynomial":
        other = self._coerce(other)
        terms = dict(self._terms)
        for e, c in other._terms.items():
            s = terms.get(e, 0) + c
            if s:
                terms[e] = s
            else:
                terms.pop(e, None)
        return Polynomial._raw(self._vars, terms)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial._raw(self._vars, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other) -> "Polynomial":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Polynomial":
        return self._coerce(other) - self

    def scale(self, factor) -> "Polynomial":
        f = as_fraction(factor)
        if not f:
            return Polynomial._raw(self._vars, {})
        return Polynomial._raw(self._vars, {e: c * f for e, c in self._terms.items()})

    def __mul__(self, other) -> "Polynomial":
        if not isinstance(other, Polynomial):
            return self.scale(other)
        self._check(other)
        acc: dict[tuple[int, ...], Fraction] = {}
        for ea, ca in self._terms.items():
            for eb, cb in other._terms.items():
                e = tuple(x + y for x, y in zip(ea, eb))
                acc[e] = acc.get(e, 0) + ca * cb
        return Polynomial._raw(self._vars, {e: c for e, c in acc.items() if c})

    def __rmul__(self, other) -> "Polynomial":
        return self.scale(other)

    def __pow__(self, k: int) -> "Polynomial":
        if not isinstance(k, int) or k < 0:
            raise ValueError("exponent must be a non-negative integer")
        result = Polynomial.constant(self._vars, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def square(self) -> "Polynomial":
        return self * self

    # -- evaluation ---------------------------------------------------------

    def __call__(self, point: Sequence):
        return self.eval(point)

    def eval(self, point: Sequence):
        """Evaluate at ``point``.

        Rational coordinates (int/Fraction) give an exact Fraction; if any
        coordinate is a float the computation is done in floating point.
        """
        if len(point) != self.nvars:
            raise ValueError(
                f"point has {len(point)} coordinates, polynomial has {self.nvars} variables")
        exact = all(isinstance(v, (int, Fraction)) and not isinstance(v, bool) for v in point)
        if exact:
            pt = [Fraction(v) for v in point]
            total = Fraction(0)
        else:
            pt = [float(v) for v in point]
            total = 0.0
        for exps, c in self._terms.items():
            m = c if exact else float(c)
            for v, e in zip(pt, exps):
                if e:
                    m = m * v ** e
            total += m
        return total

    # -- calculus / substitution -------------------------------------------

    def derivative(self, name: str) -> "Polynomial":
        i = self._vars.index(name)
        terms = {}
        for exps, c in self._terms.items():
            e = exps[i]
            if e:
                new = exps[:i] + (e - 1,) + exps[i + 1:]
                terms[new] = c * e
        return Polynomial._raw(self._vars, terms)

    def gradient(self) -> tuple["Polynomial", ...]:
        return tuple(self.derivative(n) for n in self._vars)

    def substitute_affine(self, block: Sequence[str], amap: "AffineMap") -> "Polynomial":
        """Compose with the inverse of ``amap`` on the variables in ``block``.

        The result ``q`` satisfies ``q(..., amap(v), ...) == p(..., v, ...)``,
        i.e. each block variable ``v`` is replaced by ``amap.inverse()(v)``.
        """
        block = tuple(block)
        if len(block) != amap.dim:
            raise ValueError(f"block of size {len(block)} vs map of dimension {amap.dim}")
        inv = amap.inverse()
        return self.substitute_linear(block, inv.matrix, inv.offset)

    def substitute_linear(self, block: Sequence[str], matrix, offset) -> "Polynomial":
        """Replace ``block[i]`` by ``sum_j matrix[i][j]*block[j] + offset[i]``."""
        block = tuple(block)
        idx = [self._vars.index(b) for b in block]
        images = []
        for i in range(len(block)):
            img = Polynomial.constant(self._vars, offset[i])
            for j, b in enumerate(block):
                if matrix[i][j]:
                    img = img + Polynomial.var(self._vars, b).scale(matrix[i][j])
            images.append(img)
        powers: dict[tuple[int, int], Polynomial] = {}

        def power(i: int, e: int) -> Polynomial:
            if (i, e) not in powers:
                powers[(i, e)] = images[i] if e == 1 else power(i, e - 1) * images[i]
            return powers[(i, e)]

        acc: dict[tuple[int, ...], Fraction] = {}
        in_block = set(idx)
        for exps, c in self._terms.items():
            rest = tuple(0 if k in in_block else e for k, e in enumerate(exps))
            piece = Polynomial._raw(self._vars, {rest: c})
            for bi, k in enumerate(idx):
                if exps[k]:
                    piece = piece * power(bi, exps[k])
            for e, v in piece._terms.items():
                acc[e] = acc.get(e, 0) + v
        return Polynomial._raw(self._vars, {e: c for e, c in acc.items() if c})

    # -- text and structured forms -----------------------------------------

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        out = []
        for k, (exps, c) in enumerate(self._terms.items()):
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            factors = [
                n if e == 1 else f"{n}^{e}"
                for n, e in zip(self._vars, exps) if e
            ]
            if not factors:
                body = str(mag)
            elif mag == 1:
                body = "*".join(factors)
            else:
                body = "*".join([str(mag)] + factors)
            if k == 0:
                out.append(body if sign == "+" else f"-{body}")
            else:
                out.append(f"{sign} {body}")
        return " ".join(out)

    def to_dict(self) -> dict:
        return {
            "var_names": list(self._vars),
            "terms": [
                {"coeff": format_fraction(c), "exps": list(e)}
                for e, c in self._terms.items()
            ],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "Polynomial":
        names = data["var_names"]
        terms: dict = {}
        for t in data["terms"]:
            e = tuple(t["exps"])
            if e in terms:
                raise ValueError(f"duplicate exponent vector {e}")
            terms[e] = as_fraction(t["coeff"])
        return cls(names, terms)


class AffineMap:
    """Invertible rational affine map ``v -> matrix @ v + offset``."""

    __slots__ = ("matrix", "offset", "_inverse")

    def __init__(self, matrix, offset=None):
        rows = tuple(tuple(as_fraction(v) for v in row) for row in matrix)
        k = len(rows)
        if any(len(r) != k for r in rows):
            raise ValueError("affine matrix must be square")
        if offset is None:
            offset = (0,) * k
        off = tuple(as_fraction(v) for v in offset)
        if len(off) != k:
            raise ValueError("offset length does not match matrix dimension")
        self.matrix = rows
        self.offset = off
        self._inverse = None
        if self.determinant() == 0:
            raise SingularMapError("affine map matrix is singular")

    @classmethod
    def identity(cls, k: int) -> "AffineMap":
        return cls([[int(i == j) for j in range(k)] for i in range(k)])

    @property
    def dim(self) -> int:
        return len(self.matrix)

    def determinant(self) -> Fraction:
        a = [list(r) for r in self.matrix]
        n = len(a)
        det = Fraction(1)
        for col in range(n):
            piv = next((r for r in range(col, n) if a[r][col]), None)
            if piv is None:
                return Fraction(0)
            if piv != col:
                a[col], a[piv] = a[piv], a[col]
                det = -det
            det *= a[col][col]
            for r in range(col + 1, n):
                f = a[r][col] / a[col][col]
                if f:
                    a[r] = [x - f * y for x, y in zip(a[r], a[col])]
        return det

    def __call__(self, v: Sequence) -> tuple:
        if len(v) != self.dim:
            raise ValueError("vector length does not match map dimension")
        exact = all(isinstance(x, (int, Fraction)) for x in v)
        if exact:
            vv = [Fraction(x) for x in v]
            return tuple(
                sum((m * x for m, x in zip(row, vv)), Fraction(0)) + o
                for row, o in zip(self.matrix, self.offset))
        vv = [float(x) for x in v]
        return tuple(
            sum(float(m) * x for m, x in zip(row, vv)) + float(o)
            for row, o in zip(self.matrix, self.offset))

    def inverse(self) -> "AffineMap":
        if self._inverse is None:
            n = self.dim
            a = [list(r) + [Fraction(int(i == j)) for j in range(n)]
                 for i, r in enumerate(self.matrix)]
            for col in range(n):
                piv = next(r for r in range(col, n) if a[r][col])
                a[col], a[piv] = a[piv], a[col]
                p = a[col][col]
                a[col] = [x / p for x in a[col]]
                for r in range(n):
                    if r != col and a[r][col]:
                        f = a[r][col]
                        a[r] = [x - f * y for x, y in zip(a[r], a[col])]
            minv = [row[n:] for row in a]
            off = [-sum((m * o for m, o in zip(row, self.offset)), Fraction(0))
                   for row in minv]
            inv = AffineMap(minv, off)
            inv._inverse = self
            self._inverse = inv
        return self._inverse

    def compose(self, inner: "AffineMap") -> "AffineMap":
        """Return ``self ∘ inner``."""
        n = self.dim
        m = [[sum((self.matrix[i][k] * inner.matrix[k][j] for k in range(n)), Fraction(0))
              for j in range(n)] for i in range(n)]
        off = self(inner.offset)
        return AffineMap(m, off)

    def __eq__(self, other) -> bool:
        if not isinstance(other, AffineMap):
            return NotImplemented
        return self.matrix == other.matrix and self.offset == other.offset

    def __repr__(self) -> str:
        return f"AffineMap({self.to_dict()})"

    def to_dict(self) -> dict:
        return {
            "matrix": [[format_fraction(v) for v in row] for row in self.matrix],
            "offset": [format_fraction(v) for v in self.offset],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "AffineMap":
        return cls(data["matrix"], data["offset"])
