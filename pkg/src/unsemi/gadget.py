"""Splice a bridging circle between two sheets of a lift over a shared base point.

Given points ``(x, y1)`` and ``(x, y2)`` on the variety of ``P``, an affine
change of auxiliary coordinates moves ``y1`` to ``0`` and ``y2`` to ``e1``.
With a fresh variable ``t`` the circle

    u = x,   v1^2 + t^2 = v1,   v_i = 0 (i > 1)

passes through both images and projects to the single point ``x``.  The
bridged polynomial is the union of the transformed variety (at ``t = 0``)
and that circle::

    P' = (Q^2 + t^2) * (sum (u_i - x_i)^2 + (v1^2 + t^2 - v1)^2 + sum_{i>1} v_i^2)

so its projection to the base is unchanged.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import circuit as C
from .lift import BridgeNode, Lift, aux_names
from .poly import AffineMap, Polynomial, as_fraction

__all__ = [
    "BridgeError", "WitnessPair", "build_normalizing_affine", "circle_bridge",
    "load_pairs", "reduce_components", "validate_pair",
]


class BridgeError(ValueError):
    """A witness pair failed validation.

    ``check`` names the violated condition: ``"dimension"``, ``"degenerate"``,
    ``"off-variety"`` or ``"no-aux"``.  ``index`` is set by
    :func:`reduce_components` to the position of the offending pair.
    """

    def __init__(self, check: str, msg: str, index: int | None = None):
        prefix = f"pair {index}: " if index is not None else ""
        super().__init__(f"{prefix}{check}: {msg}")
        self.check = check
        self.detail = msg
        self.index = index


@dataclass(frozen=True)
class WitnessPair:
    x: tuple
    y1: tuple
    y2: tuple

    def __post_init__(self):
        for name in ("x", "y1", "y2"):
            object.__setattr__(self, name, tuple(as_fraction(v) for v in getattr(self, name)))

    def to_dict(self) -> dict:
        return {k: [str(v) for v in getattr(self, k)] for k in ("x", "y1", "y2")}


def load_pairs(text: str) -> list[WitnessPair]:
    """Parse a JSON witness-pair file: a list of ``{x, y1, y2}`` records."""
    data = json.loads(text) if text.strip() else []
    if isinstance(data, dict):
        data = data.get("pairs", [])
    return [WitnessPair(d["x"], d["y1"], d["y2"]) for d in data]


def build_normalizing_affine(y1: Sequence, y2: Sequence) -> AffineMap:
    """Exact affine map ``A`` with ``A(y1) = 0`` and ``A(y2) = e1``.

    Pivots on the largest ``|y2_j - y1_j|``, swaps it to the front and clears
    the remaining entries with one elementary column transform.
    """
    y1 = [as_fraction(v) for v in y1]
    y2 = [as_fraction(v) for v in y2]
    k = len(y1)
    if k == 0:
        raise BridgeError("no-aux", "no auxiliary space to normalize")
    if len(y2) != k:
        raise BridgeError("dimension", "y1 and y2 have different lengths")
    d = [b - a for a, b in zip(y1, y2)]
    if not any(d):
        raise BridgeError("degenerate", "y1 equals y2")
    j = max(range(k), key=lambda i: (abs(d[i]), -i))
    perm = list(range(k))
    perm[0], perm[j] = perm[j], perm[0]
    w = [d[p] for p in perm]
    # E sends w to e1: inverse of the matrix with first column w
    E = [[Fraction(int(r == c)) for c in range(k)] for r in range(k)]
    E[0][0] = 1 / w[0]
    for r in range(1, k):
        E[r][0] = -w[r] / w[0]
    # M = E @ swap, and the swap is its own inverse
    M = [[E[r][perm[c]] for c in range(k)] for r in range(k)]
    offset = [-sum((M[r][c] * y1[c] for c in range(k)), Fraction(0)) for r in range(k)]
    return AffineMap(M, offset)


def validate_pair(lift: Lift, pair: WitnessPair, delta: float = 1e-8):
    m, k = lift.base_dim, lift.aux_dim
    if k == 0:
        raise BridgeError("no-aux", "lift has no auxiliary variables")
    if len(pair.x) != m or len(pair.y1) != k or len(pair.y2) != k:
        raise BridgeError(
            "dimension",
            f"expected x of length {m} and y of length {k}, got "
            f"{len(pair.x)}, {len(pair.y1)}, {len(pair.y2)}")
    if pair.y1 == pair.y2:
        raise BridgeError("degenerate", "y1 equals y2")
    for name, y in (("y1", pair.y1), ("y2", pair.y2)):
        val = lift.poly.eval(list(pair.x) + list(y))
        if abs(val) > delta:
            raise BridgeError("off-variety", f"|P(x, {name})| = {float(abs(val)):.3g} > {delta:g}")


def circle_bridge(lift: Lift, pair: WitnessPair, delta: float = 1e-8) -> Lift:
    validate_pair(lift, pair, delta)
    A = build_normalizing_affine(pair.y1, pair.y2)
    m, k = lift.base_dim, lift.aux_dim
    t_name = aux_names(1, k + 1)[0]
    names = lift.var_names + (t_name,)
    block = lift.aux_vars
    Q = lift.poly.extend(names).substitute_affine(block, A)
    var = {n: Polynomial.var(names, n) for n in names}
    t = var[t_name]
    v1 = var[block[0]]
    circle = Polynomial.zero(names)
    for b, xb in zip(lift.base_vars, pair.x):
        circle = circle + (var[b] - xb).square()
    circle = circle + (v1 * v1 + t * t - v1).square()
    for b in block[1:]:
        circle = circle + var[b].square()
    P = (Q.square() + t.square()) * circle
    inv = A.inverse()
    q_node = C.Substitute(lift.circuit, block, inv.matrix, inv.offset)
    circ = C.Product([C.Sum([C.Square(q_node), C.Leaf(t.square())]), C.Leaf(circle)])
    w = BridgeNode(lift.witness, A, tuple(pair.x))
    return Lift(P, m, k + 1, w, circ, lift.source)


def reduce_components(lift: Lift, pairs: Sequence[WitnessPair], delta: float = 1e-8) -> Lift:
    """Apply one bridge per pair.

    Pairs are given in the auxiliary coordinates of the *original* lift; each
    is carried through the transforms of the earlier bridges (and padded with
    zeros for the added circle variables) before it is validated.
    """
    maps: list[AffineMap] = []
    for i, pair in enumerate(pairs):
        y1, y2 = list(pair.y1), list(pair.y2)
        for A in maps:
            if len(y1) != A.dim or len(y2) != A.dim:
                raise BridgeError("dimension", "pair does not match the lift's auxiliary space", i)
            y1 = list(A(y1)) + [Fraction(0)]
            y2 = list(A(y2)) + [Fraction(0)]
        moved = WitnessPair(pair.x, y1, y2)
        try:
            validate_pair(lift, moved, delta)
        except BridgeError as exc:
            raise BridgeError(exc.check, exc.detail, i) from None
        maps.append(build_normalizing_affine(moved.y1, moved.y2))
        lift = circle_bridge(lift, moved, delta)
    return lift
