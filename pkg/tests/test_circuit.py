from fractions import Fraction as F

import numpy as np
import pytest

from unsemi.circuit import node_from_dict
from unsemi.formula import parse, to_nnf
from unsemi.gadget import WitnessPair, reduce_components
from unsemi.gallery import GALLERY
from unsemi.lift import compile_formula, lift_from_polynomial
from unsemi.poly import Polynomial


def two_point_lift():
    V = ("x1", "t1")
    x, y = Polynomial.var(V, "x1"), Polynomial.var(V, "t1")
    return lift_from_polynomial(x ** 2 + (y * (y - 1)) ** 2, 1)


def lifts():
    out = {name: compile_formula(to_nnf(parse(text))) for name, (text, _) in GALLERY.items()}
    out["bridged"] = reduce_components(two_point_lift(), [WitnessPair([0], [0], [1])])
    return out


LIFTS = lifts()


def cols(lift):
    return {v: i for i, v in enumerate(lift.var_names)}


@pytest.mark.parametrize("name", sorted(LIFTS))
def test_expand_and_values_match_polynomial(name):
    L = LIFTS[name]
    assert L.circuit.expand(L.var_names) == L.poly
    rng = np.random.default_rng(5)
    X = rng.uniform(-1.5, 1.5, (50, len(L.var_names)))
    expected = np.array([L.poly.eval(list(row)) for row in X])
    np.testing.assert_allclose(L.circuit.value(X, cols(L)), expected, rtol=1e-9, atol=1e-9)
    pt = [F(int(n), 4) for n in rng.integers(-6, 6, len(L.var_names))]
    assert L.circuit.eval_exact(dict(zip(L.var_names, pt))) == L.poly.eval(pt)


@pytest.mark.parametrize("name", sorted(LIFTS))
def test_gradient_and_hessian_vs_central_differences(name):
    L = LIFTS[name]
    c = cols(L)
    n = len(L.var_names)
    rng = np.random.default_rng(9)
    X = rng.uniform(-1.2, 1.2, (20, n))
    v, g, H = L.circuit.value_grad_hess(X, c)
    v2, g2 = L.circuit.value_and_grad(X, c)
    np.testing.assert_allclose(v, v2)
    np.testing.assert_allclose(g, g2)
    h = 1e-5
    for i in range(n):
        E = np.zeros(n)
        E[i] = h
        fd = (L.circuit.value(X + E, c) - L.circuit.value(X - E, c)) / (2 * h)
        scale = np.maximum(1.0, np.abs(g[:, i]))
        assert np.all(np.abs(fd - g[:, i]) / scale <= 1e-6)
        _, gp = L.circuit.value_and_grad(X + E, c)
        _, gm = L.circuit.value_and_grad(X - E, c)
        fdh = (gp - gm) / (2 * h)
        hscale = np.maximum(1.0, np.abs(H[:, i, :]))
        assert np.all(np.abs(fdh - H[:, i, :]) / hscale <= 1e-5)
    np.testing.assert_allclose(H, H.transpose(0, 2, 1), rtol=1e-9, atol=1e-9)


def test_gradient_matches_polynomial_gradient():
    L = LIFTS["two_intervals"]
    X = np.random.default_rng(2).uniform(-1, 1, (10, len(L.var_names)))
    _, g = L.circuit.value_and_grad(X, cols(L))
    grads = L.poly.gradient()
    for r, row in enumerate(X):
        want = [float(gp.eval(list(row))) for gp in grads]
        np.testing.assert_allclose(g[r], want, rtol=1e-9, atol=1e-9)


@pytest.mark.parametrize("name", ["annulus", "two_disks", "bridged"])
def test_serialization_roundtrip(name):
    L = LIFTS[name]
    again = node_from_dict(L.circuit.to_dict())
    assert again.to_dict() == L.circuit.to_dict()
    assert again.expand(L.var_names) == L.poly


def test_rename_moves_variables():
    L = LIFTS["interval"]
    R = L.circuit.rename({"t1": "s", "t2": "r"})
    names = ("x1", "s", "r")
    assert R.expand(names) == L.poly.rename({"t1": "s", "t2": "r"})
