"""Compile NNF formulas into single-polynomial lifts.

A :class:`Lift` is a polynomial ``P(x, t)`` on base variables ``x1..xm`` and
auxiliary variables ``t1..tk`` such that a base point lies in the source set
exactly when some auxiliary vector makes ``P`` vanish.

Atoms lift as follows (``t`` a fresh auxiliary variable)::

    p = 0    ->  p
    p >= 0   ->  t^2 - p
    p != 0   ->  t*p - 1
    p > 0    ->  t^2*p - 1

Conjunction sums squares, ``sum P_i^2``.  Disjunction multiplies, for each
branch, ``P_i^2`` plus the squares of every *other* branch's auxiliaries, so a
zero needs one branch on its variety with all other auxiliaries at zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import circuit as C
from .formula import And, Atom, Formula, Or, Rel, base_names, eval_point, is_nnf, to_text
from .poly import AffineMap, Polynomial

__all__ = [
    "Lift", "NoWitnessProgram", "WitnessUndefinedError", "aux_names", "compile_formula",
    "lift_and", "lift_difference", "lift_eq", "lift_ge", "lift_gt", "lift_ne", "lift_or",
    "lift_from_polynomial", "synth_witness",
]


class WitnessUndefinedError(ValueError):
    """No witness can be synthesized at the requested base point."""


class NoWitnessProgram(WitnessUndefinedError):
    """The lift (or a part of it) was given as a bare polynomial."""


def aux_names(k: int, start: int = 1) -> tuple[str, ...]:
    return tuple(f"t{i}" for i in range(start, start + k))


# ---------------------------------------------------------------------------
# witness programs

class Witness:
    """Recipe producing auxiliary coordinates for a base point in the set."""

    size: int = 0
    formula: Formula | None = None

    def run(self, x: list) -> list:
        raise NotImplementedError

    def to_dict(self, slot: int = 1) -> dict:
        raise NotImplementedError


def _exact_sqrt(q: Fraction):
    a, b = math.isqrt(q.numerator), math.isqrt(q.denominator)
    if a * a == q.numerator and b * b == q.denominator:
        return Fraction(a, b)
    return math.sqrt(q)


@dataclass(frozen=True)
class EqLeaf(Witness):
    formula: Atom
    size = 0

    def run(self, x):
        return []

    def to_dict(self, slot=1):
        return {"kind": "eq", "poly": str(self.formula.poly)}


@dataclass(frozen=True)
class GeLeaf(Witness):
    formula: Atom
    size = 1

    def run(self, x):
        return [_exact_sqrt(self.formula.poly.eval(x))]

    def to_dict(self, slot=1):
        return {"kind": "ge", "slot": slot, "poly": str(self.formula.poly)}


@dataclass(frozen=True)
class GtLeaf(Witness):
    formula: Atom
    size = 1

    def run(self, x):
        root = _exact_sqrt(self.formula.poly.eval(x))
        return [1 / root]

    def to_dict(self, slot=1):
        return {"kind": "gt", "slot": slot, "poly": str(self.formula.poly)}


@dataclass(frozen=True)
class NeLeaf(Witness):
    formula: Atom
    size = 1

    def run(self, x):
        return [1 / self.formula.poly.eval(x)]

    def to_dict(self, slot=1):
        return {"kind": "ne", "slot": slot, "poly": str(self.formula.poly)}


@dataclass(frozen=True)
class AndNode(Witness):
    children: tuple

    @property
    def size(self):
        return sum(c.size for c in self.children)

    @property
    def formula(self):
        return And(tuple(c.formula for c in self.children))

    def run(self, x):
        return [v for c in self.children for v in c.run(x)]

    def to_dict(self, slot=1):
        kids = []
        for c in self.children:
            kids.append(c.to_dict(slot))
            slot += c.size
        return {"kind": "and", "children": kids}


@dataclass(frozen=True)
class OrNode(Witness):
    children: tuple

    @property
    def size(self):
        return sum(c.size for c in self.children)

    @property
    def formula(self):
        return Or(tuple(c.formula for c in self.children))

    def run(self, x):
        out: list = []
        filled = False
        for c in self.children:
            if not filled and eval_point(c.formula, x):
                out.extend(c.run(x))
                filled = True
            else:
                out.extend([Fraction(0)] * c.size)
        if not filled:
            raise WitnessUndefinedError("no disjunct holds at this point")
        return out

    def to_dict(self, slot=1):
        kids = []
        for c in self.children:
            kids.append(c.to_dict(slot))
            slot += c.size
        return {"kind": "or", "children": kids}


@dataclass(frozen=True)
class BridgeNode(Witness):
    """Witness of a bridged lift: old auxiliaries mapped by ``affine``, new slot 0."""

    inner: Witness
    affine: AffineMap
    base_point: tuple

    @property
    def size(self):
        return self.inner.size + 1

    @property
    def formula(self):
        return self.inner.formula

    def run(self, x):
        return list(self.affine(self.inner.run(x))) + [Fraction(0)]

    def to_dict(self, slot=1):
        return {
            "kind": "bridge",
            "affine": self.affine.to_dict(),
            "base_point": [f"{v.numerator}/{v.denominator}" for v in self.base_point],
            "inner": self.inner.to_dict(slot),
        }


@dataclass(frozen=True)
class OpaqueWitness(Witness):
    """Placeholder for lifts given directly as polynomials."""

    size: int = 0

    def run(self, x):
        raise NoWitnessProgram("lift has no witness program")

    def to_dict(self, slot=1):
        return {"kind": "opaque", "size": self.size}


def witness_slots(w: Witness, start: int = 1) -> list[list[int]]:
    """Auxiliary slot indices used by each leaf, in depth-first order."""
    if isinstance(w, (AndNode, OrNode)):
        out = []
        for c in w.children:
            out.extend(witness_slots(c, start))
            start += c.size
        return out
    if isinstance(w, BridgeNode):
        return witness_slots(w.inner, start) + [[start + w.inner.size]]
    return [list(range(start, start + w.size))]


# ---------------------------------------------------------------------------
# lifts

@dataclass(frozen=True)
class Lift:
    poly: Polynomial
    base_dim: int
    aux_dim: int
    witness: Witness
    circuit: C.Node = field(repr=False, compare=False)
    source: Formula | None = None

    @property
    def var_names(self) -> tuple[str, ...]:
        return self.poly.var_names

    @property
    def base_vars(self) -> tuple[str, ...]:
        return self.poly.var_names[:self.base_dim]

    @property
    def aux_vars(self) -> tuple[str, ...]:
        return self.poly.var_names[self.base_dim:]

    @property
    def source_text(self) -> str:
        return to_text(self.source) if self.source is not None else ""

    def degree(self) -> int:
        return self.poly.degree()


def lift_from_polynomial(poly: Polynomial, base_dim: int, source: Formula | None = None) -> Lift:
    """Wrap an explicit polynomial whose first ``base_dim`` variables are the base."""
    k = poly.nvars - base_dim
    names = base_names(base_dim) + aux_names(k)
    poly = poly.rename(dict(zip(poly.var_names, names)))
    return Lift(poly, base_dim, k, OpaqueWitness(k), C.Leaf(poly), source)


def _atom_lift(p: Polynomial, make, leaf_cls, rel: Rel) -> Lift:
    m = p.nvars
    if p.var_names != base_names(m):
        raise ValueError("atom polynomial must be over x1..xm")
    names = base_names(m) + ("t1",)
    pe = p.extend(names)
    t = Polynomial.var(names, "t1")
    P = make(pe, t)
    return Lift(P, m, 1, leaf_cls(Atom(p, rel)), C.Leaf(P), Atom(p, rel))


def lift_eq(p: Polynomial) -> Lift:
    m = p.nvars
    if p.var_names != base_names(m):
        raise ValueError("atom polynomial must be over x1..xm")
    return Lift(p, m, 0, EqLeaf(Atom(p, Rel.EQ)), C.Leaf(p), Atom(p, Rel.EQ))


def lift_ge(p: Polynomial) -> Lift:
    return _atom_lift(p, lambda q, t: t * t - q, GeLeaf, Rel.GE)


def lift_ne(p: Polynomial) -> Lift:
    return _atom_lift(p, lambda q, t: t * q - 1, NeLeaf, Rel.NE)


def lift_gt(p: Polynomial) -> Lift:
    return _atom_lift(p, lambda q, t: t * t * q - 1, GtLeaf, Rel.GT)


def _renumbered(lifts: Sequence[Lift]):
    """Give each lift a disjoint, consecutive block of auxiliary names."""
    m = lifts[0].base_dim
    if any(l.base_dim != m for l in lifts):
        raise ValueError("lifts have different base dimensions")
    total = sum(l.aux_dim for l in lifts)
    names = base_names(m) + aux_names(total)
    polys, circuits, blocks = [], [], []
    start = 1
    for l in lifts:
        new = aux_names(l.aux_dim, start)
        mapping = dict(zip(l.aux_vars, new))
        polys.append(l.poly.rename(mapping).extend(names))
        circuits.append(l.circuit.rename(mapping))
        blocks.append(new)
        start += l.aux_dim
    return names, polys, circuits, blocks


def _source(lifts, cls):
    if any(l.source is None for l in lifts):
        return None
    return cls(tuple(l.source for l in lifts))


def lift_and(*lifts: Lift) -> Lift:
    """Conjunction: ``sum P_i^2``."""
    if len(lifts) < 2:
        raise ValueError("lift_and needs at least two lifts")
    names, polys, circuits, _ = _renumbered(lifts)
    P = Polynomial.zero(names)
    for p in polys:
        P = P + p.square()
    circ = C.Sum([C.Square(c) for c in circuits])
    w = AndNode(tuple(l.witness for l in lifts))
    return Lift(P, lifts[0].base_dim, len(names) - lifts[0].base_dim, w, circ,
                _source(lifts, And))


def lift_or(*lifts: Lift) -> Lift:
    """Disjunction: ``prod_i (P_i^2 + sum of squares of the other blocks)``."""
    if len(lifts) < 2:
        raise ValueError("lift_or needs at least two lifts")
    names, polys, circuits, blocks = _renumbered(lifts)
    P = Polynomial.constant(names, 1)
    factors = []
    for i, (p, c) in enumerate(zip(polys, circuits)):
        pad = Polynomial.zero(names)
        for j, blk in enumerate(blocks):
            if j != i:
                for v in blk:
                    pad = pad + Polynomial.var(names, v).square()
        P = P * (p.square() + pad)
        factors.append(C.Sum([C.Square(c), C.Leaf(pad)]) if not pad.is_zero()
                       else C.Square(c))
    w = OrNode(tuple(l.witness for l in lifts))
    return Lift(P, lifts[0].base_dim, len(names) - lifts[0].base_dim, w,
                C.Product(factors), _source(lifts, Or))


def lift_difference(a: Lift, b: Lift, *, allow_aux: bool = False) -> Lift:
    """Points of ``a`` where ``b``'s polynomial is nonzero: ``P_a^2 + (t*P_b - 1)^2``.

    With ``b`` free of auxiliary variables this projects onto ``A \\ B``.
    Otherwise it projects onto the points of ``A`` where *some* auxiliary
    vector makes ``P_b`` nonzero, which is usually far larger than ``A \\ B``;
    such lifts are only built with ``allow_aux=True`` and carry no witness
    program.  Compiled formulas never need that form, since negation is pushed
    down to atoms first.
    """
    if b.aux_dim and not allow_aux:
        raise ValueError("difference with an auxiliary-variable subtrahend over-projects; "
                         "compile the negation in NNF instead")
    names, (pa, pb), (ca, cb), _ = _renumbered([a, b])
    t_name = aux_names(1, len(names) - a.base_dim + 1)[0]
    names = names + (t_name,)
    pa, pb = pa.extend(names), pb.extend(names)
    t = Polynomial.var(names, t_name)
    one = Polynomial.constant(names, 1)
    P = pa.square() + (t * pb - one).square()
    circ = C.Sum([C.Square(ca), C.Square(C.Sum([C.Product([C.Leaf(t), cb]), C.Leaf(-one)]))])
    k = len(names) - a.base_dim
    if b.aux_dim:
        return Lift(P, a.base_dim, k, OpaqueWitness(k), circ, None)
    ne = Atom(b.poly, Rel.NE)
    source = And((a.source, ne)) if a.source is not None else None
    return Lift(P, a.base_dim, k, AndNode((a.witness, NeLeaf(ne))), circ, source)


_ATOM_LIFTS = {Rel.EQ: lift_eq, Rel.GE: lift_ge, Rel.GT: lift_gt, Rel.NE: lift_ne}


def compile_formula(f: Formula) -> Lift:
    """Structural recursion over an NNF formula.

    Auxiliary variables come out numbered left to right in depth-first order.
    """
    if not is_nnf(f):
        raise ValueError("compile_formula expects a formula in negation normal form")
    if isinstance(f, Atom):
        return _ATOM_LIFTS[f.rel](f.poly)
    kids = [compile_formula(c) for c in f.children]
    return lift_and(*kids) if isinstance(f, And) else lift_or(*kids)


def synth_witness(lift: Lift, x: Sequence) -> tuple:
    """Auxiliary coordinates placing ``x`` on the lift's variety.

    Coordinates are Fractions where the construction is exact and floats
    where an irrational square root was needed.
    """
    if len(x) != lift.base_dim:
        raise ValueError(f"point of length {len(x)} for base dimension {lift.base_dim}")
    pt = [Fraction(v) for v in x]
    if lift.source is not None and not eval_point(lift.source, pt):
        shown = ", ".join(str(v) for v in pt)
        raise WitnessUndefinedError(f"({shown}) is not in the source set")
    return tuple(lift.witness.run(pt))
