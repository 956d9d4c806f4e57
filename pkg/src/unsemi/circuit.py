"""Arithmetic circuits mirroring how a lift polynomial was assembled.

Expanding nested sums of squares and products gives polynomials with many
terms and very large intermediate monomials, which is slow and badly
conditioned in floating point.  The lift constructors therefore keep the
construction tree alongside the expanded polynomial.  The circuit is the
object evaluated numerically (vectorized value and gradient); its exact
expansion must coincide with the lift polynomial.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .poly import Polynomial, as_fraction, format_fraction

__all__ = [
    "Leaf", "Node", "Product", "Square", "Substitute", "Sum",
    "node_from_dict", "PolyEvaluator",
]


class PolyEvaluator:
    """Vectorized float evaluation of one polynomial and its gradient."""

    def __init__(self, poly: Polynomial):
        self.poly = poly
        n = poly.nvars
        exps = {e: i for i, e in enumerate(poly.terms)}
        rows = [dict() for _ in range(n + 1)]
        for e, c in poly.items():
            rows[0][e] = float(c)
            for j in range(n):
                if e[j]:
                    d = e[:j] + (e[j] - 1,) + e[j + 1:]
                    exps.setdefault(d, len(exps))
                    rows[j + 1][d] = rows[j + 1].get(d, 0.0) + float(c * e[j])
        self.exps = np.array(list(exps), dtype=np.int64).reshape(len(exps), n)
        coef = np.zeros((len(exps), n + 1))
        for k, row in enumerate(rows):
            for e, c in row.items():
                coef[exps[e], k] = c
        self.coef = coef
        # the original terms are the first len(poly) entries
        self.nterms = len(poly)
        self._hess = None

    def _hessian_tables(self):
        if self._hess is None:
            n = self.poly.nvars
            grads = self.poly.gradient()
            self._hess = [PolyEvaluator(g) for g in grads] if n else []
        return self._hess

    def _monomials(self, X: np.ndarray, count: int) -> np.ndarray:
        N = X.shape[0]
        M = np.ones((N, count))
        E = self.exps[:count]
        for j in range(X.shape[1]):
            col = E[:, j]
            if not col.any():
                continue
            pw = X[:, j:j + 1] ** np.arange(int(col.max()) + 1)
            M *= pw[:, col]
        return M

    def value(self, X: np.ndarray) -> np.ndarray:
        if self.nterms == 0:
            return np.zeros(X.shape[0])
        return self._monomials(X, self.nterms) @ self.coef[:self.nterms, 0]

    def value_and_grad(self, X: np.ndarray):
        if len(self.exps) == 0:
            return np.zeros(X.shape[0]), np.zeros(X.shape)
        out = self._monomials(X, len(self.exps)) @ self.coef
        return out[:, 0], out[:, 1:]

    def value_grad_hess(self, X: np.ndarray):
        v, g = self.value_and_grad(X)
        N, n = X.shape
        H = np.zeros((N, n, n))
        for j, ev in enumerate(self._hessian_tables()):
            H[:, j, :] = ev.value_and_grad(X)[1]
        return v, g, H


class Node:
    """Base class; subclasses are immutable."""

    var_names: tuple[str, ...]

    def value(self, X: np.ndarray, cols: Mapping[str, int]) -> np.ndarray:
        raise NotImplementedError

    def value_and_grad(self, X: np.ndarray, cols: Mapping[str, int]):
        raise NotImplementedError

    def value_grad_hess(self, X: np.ndarray, cols: Mapping[str, int]):
        raise NotImplementedError

    def eval_exact(self, env: Mapping[str, Fraction]) -> Fraction:
        raise NotImplementedError

    def expand(self, var_names: Sequence[str]) -> Polynomial:
        raise NotImplementedError

    def rename(self, mapping: Mapping[str, str]) -> "Node":
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


def _union(nodes) -> tuple[str, ...]:
    seen: dict[str, None] = {}
    for n in nodes:
        for v in n.var_names:
            seen.setdefault(v)
    return tuple(seen)


class Leaf(Node):
    def __init__(self, poly: Polynomial):
        self.poly = poly
        self.var_names = poly.var_names
        self._ev = None

    @property
    def evaluator(self) -> PolyEvaluator:
        if self._ev is None:
            self._ev = PolyEvaluator(self.poly)
        return self._ev

    def _cols(self, cols):
        return [cols[v] for v in self.var_names]

    def value(self, X, cols):
        return self.evaluator.value(X[:, self._cols(cols)])

    def value_and_grad(self, X, cols):
        idx = self._cols(cols)
        v, g = self.evaluator.value_and_grad(X[:, idx])
        G = np.zeros(X.shape)
        G[:, idx] = g
        return v, G

    def value_grad_hess(self, X, cols):
        idx = self._cols(cols)
        v, g, h = self.evaluator.value_grad_hess(X[:, idx])
        G = np.zeros(X.shape)
        G[:, idx] = g
        H = np.zeros((X.shape[0], X.shape[1], X.shape[1]))
        H[:, np.array(idx, dtype=np.int64)[:, None], np.array(idx, dtype=np.int64)[None, :]] = h
        return v, G, H

    def eval_exact(self, env):
        return self.poly.eval([env[v] for v in self.var_names])

    def expand(self, var_names):
        return self.poly.extend(var_names)

    def rename(self, mapping):
        return Leaf(self.poly.rename(mapping))

    def to_dict(self):
        return {"op": "leaf", "poly": self.poly.to_dict()}


class Sum(Node):
    def __init__(self, args: Sequence[Node]):
        self.args = tuple(args)
        self.var_names = _union(self.args)

    def value(self, X, cols):
        return sum(a.value(X, cols) for a in self.args)

    def value_and_grad(self, X, cols):
        v = np.zeros(X.shape[0])
        g = np.zeros(X.shape)
        for a in self.args:
            av, ag = a.value_and_grad(X, cols)
            v += av
            g += ag
        return v, g

    def value_grad_hess(self, X, cols):
        n = X.shape[1]
        v = np.zeros(X.shape[0])
        g = np.zeros(X.shape)
        H = np.zeros((X.shape[0], n, n))
        for a in self.args:
            av, ag, ah = a.value_grad_hess(X, cols)
            v += av
            g += ag
            H += ah
        return v, g, H

    def eval_exact(self, env):
        return sum((a.eval_exact(env) for a in self.args), Fraction(0))

    def expand(self, var_names):
        out = Polynomial.zero(var_names)
        for a in self.args:
            out = out + a.expand(var_names)
        return out

    def rename(self, mapping):
        return Sum([a.rename(mapping) for a in self.args])

    def to_dict(self):
        return {"op": "sum", "args": [a.to_dict() for a in self.args]}


class Product(Node):
    def __init__(self, args: Sequence[Node]):
        self.args = tuple(args)
        self.var_names = _union(self.args)

    def value(self, X, cols):
        v = np.ones(X.shape[0])
        for a in self.args:
            v = v * a.value(X, cols)
        return v

    def value_and_grad(self, X, cols):
        v = np.ones(X.shape[0])
        g = np.zeros(X.shape)
        for a in self.args:
            av, ag = a.value_and_grad(X, cols)
            g = g * av[:, None] + v[:, None] * ag
            v = v * av
        return v, g

    def value_grad_hess(self, X, cols):
        n = X.shape[1]
        v = np.ones(X.shape[0])
        g = np.zeros(X.shape)
        H = np.zeros((X.shape[0], n, n))
        for a in self.args:
            av, ag, ah = a.value_grad_hess(X, cols)
            cross = g[:, :, None] * ag[:, None, :]
            H = H * av[:, None, None] + v[:, None, None] * ah + cross + cross.transpose(0, 2, 1)
            g = g * av[:, None] + v[:, None] * ag
            v = v * av
        return v, g, H

    def eval_exact(self, env):
        out = Fraction(1)
        for a in self.args:
            out *= a.eval_exact(env)
        return out

    def expand(self, var_names):
        out = Polynomial.constant(var_names, 1)
        for a in self.args:
            out = out * a.expand(var_names)
        return out

    def rename(self, mapping):
        return Product([a.rename(mapping) for a in self.args])

    def to_dict(self):
        return {"op": "product", "args": [a.to_dict() for a in self.args]}


class Square(Node):
    def __init__(self, arg: Node):
        self.arg = arg
        self.var_names = arg.var_names

    def value(self, X, cols):
        return self.arg.value(X, cols) ** 2

    def value_and_grad(self, X, cols):
        v, g = self.arg.value_and_grad(X, cols)
        return v * v, 2.0 * v[:, None] * g

    def value_grad_hess(self, X, cols):
        v, g, h = self.arg.value_grad_hess(X, cols)
        H = 2.0 * (g[:, :, None] * g[:, None, :] + v[:, None, None] * h)
        return v * v, 2.0 * v[:, None] * g, H

    def eval_exact(self, env):
        return self.arg.eval_exact(env) ** 2

    def expand(self, var_names):
        return self.arg.expand(var_names).square()

    def rename(self, mapping):
        return Square(self.arg.rename(mapping))

    def to_dict(self):
        return {"op": "square", "arg": self.arg.to_dict()}


class Substitute(Node):
    """``arg`` evaluated with ``block`` replaced by ``matrix @ block + offset``."""

    def __init__(self, arg: Node, block: Sequence[str], matrix, offset):
        self.arg = arg
        self.block = tuple(block)
        self.matrix = tuple(tuple(as_fraction(v) for v in row) for row in matrix)
        self.offset = tuple(as_fraction(v) for v in offset)
        self.var_names = tuple(dict.fromkeys(arg.var_names + self.block))
        self._fm = np.array([[float(v) for v in row] for row in self.matrix]).reshape(
            len(self.block), len(self.block))
        self._fo = np.array([float(v) for v in self.offset])

    def _moved(self, X, cols):
        idx = [cols[b] for b in self.block]
        Y = X.copy()
        Y[:, idx] = X[:, idx] @ self._fm.T + self._fo
        return Y, idx

    def value(self, X, cols):
        Y, _ = self._moved(X, cols)
        return self.arg.value(Y, cols)

    def value_and_grad(self, X, cols):
        Y, idx = self._moved(X, cols)
        v, g = self.arg.value_and_grad(Y, cols)
        g = g.copy()
        g[:, idx] = g[:, idx] @ self._fm
        return v, g

    def value_grad_hess(self, X, cols):
        Y, idx = self._moved(X, cols)
        v, g, H = self.arg.value_grad_hess(Y, cols)
        n = X.shape[1]
        J = np.eye(n)
        J[np.ix_(idx, idx)] = self._fm
        return v, g @ J, np.einsum("ki,nkl,lj->nij", J, H, J)

    def eval_exact(self, env):
        vals = [env[b] for b in self.block]
        moved = dict(env)
        for b, row, o in zip(self.block, self.matrix, self.offset):
            moved[b] = sum((m * x for m, x in zip(row, vals)), Fraction(0)) + o
        return self.arg.eval_exact(moved)

    def expand(self, var_names):
        return self.arg.expand(var_names).substitute_linear(
            self.block, self.matrix, self.offset)

    def rename(self, mapping):
        return Substitute(self.arg.rename(mapping),
                          [mapping.get(b, b) for b in self.block],
                          self.matrix, self.offset)

    def to_dict(self):
        return {
            "op": "substitute",
            "block": list(self.block),
            "matrix": [[format_fraction(v) for v in row] for row in self.matrix],
            "offset": [format_fraction(v) for v in self.offset],
            "arg": self.arg.to_dict(),
        }


def node_from_dict(data: Mapping) -> Node:
    op = data["op"]
    if op == "leaf":
        return Leaf(Polynomial.from_dict(data["poly"]))
    if op == "sum":
        return Sum([node_from_dict(a) for a in data["args"]])
    if op == "product":
        return Product([node_from_dict(a) for a in data["args"]])
    if op == "square":
        return Square(node_from_dict(data["arg"]))
    if op == "substitute":
        return Substitute(node_from_dict(data["arg"]), data["block"],
                          data["matrix"], data["offset"])
    raise ValueError(f"unknown circuit node {op!r}")
