"""Acceptance criteria 1 to 6.

Each test carries a ``criterion`` marker; ``conftest.py`` prints one PASS/FAIL
line per criterion at the end of the run.
"""

import json
import random
import time
from fractions import Fraction as F
from functools import lru_cache

import numpy as np
import pytest

from unsemi.cli import main
from unsemi.formula import And, Atom, Diff, Not, Or, Rel, eval_point, parse, to_nnf
from unsemi.gadget import WitnessPair, reduce_components
from unsemi.gallery import GALLERY, gallery_box
from unsemi.lift import compile_formula, lift_difference, lift_from_polynomial, synth_witness
from unsemi.poly import Polynomial
from unsemi.verify import (
    VerifyConfig, check_projection, estimate_components, grid_points, sample_variety,
)

criterion = pytest.mark.criterion


def gallery_case(name):
    f = to_nnf(parse(GALLERY[name][0]))
    return f, compile_formula(f), VerifyConfig(box=gallery_box(name))


@lru_cache(maxsize=None)
def gallery_samples(name):
    _, lift, cfg = gallery_case(name)
    return sample_variety(lift, cfg)


def two_point_lift():
    names = ("x1", "t1")
    x, t = (Polynomial.var(names, v) for v in names)
    return lift_from_polynomial(x * x + (t * (t - 1)) ** 2, 1)


# -- 1 ------------------------------------------------------------------------

@criterion(1, "gallery projection equality")
@pytest.mark.parametrize("name", sorted(GALLERY))
def test_gallery_projection(name):
    f, lift, cfg = gallery_case(name)
    assert cfg.grid_res == 201 and cfg.n_samples == 10_000
    t0 = time.perf_counter()
    samples = sample_variety(lift, cfg)
    rep = check_projection(f, lift, cfg, samples)
    elapsed = time.perf_counter() - t0
    in_set = sum(eval_point(f, x) for x in grid_points(cfg.resolved_box(f.base_dim), 201))
    c = rep.counts
    print(f"{name}: {c} components={rep.component_estimate} {elapsed:.1f}s")
    assert c["in_set_witnessed"] == in_set
    assert c["in_set_witness_failed"] == 0
    assert c["sound_misses"] == 0
    assert c["boundary_skipped"] <= 0.02 * rep.examined
    assert elapsed < 60


# -- 2 ------------------------------------------------------------------------

def _random_poly(rng, names, anchor, vanish):
    terms = {}
    for _ in range(rng.randint(1, 3)):
        e = tuple(rng.randint(0, 2) for _ in names)
        terms[e] = F(rng.randint(-4, 4), rng.randint(1, 3))
    p = Polynomial(names, terms)
    shift = p.eval(anchor)
    if vanish:
        return p - shift
    return p if shift != 0 else p + 1


def _eq_ne_formula(rng, names, anchor, depth):
    """Random EQ/NE formula that holds at ``anchor``."""
    if depth == 0 or rng.random() < 0.3:
        eq = rng.random() < 0.5
        return Atom(_random_poly(rng, names, anchor, eq), Rel.EQ if eq else Rel.NE)
    if rng.random() < 0.5:
        return And((_eq_ne_formula(rng, names, anchor, depth - 1),
                    _eq_ne_formula(rng, names, anchor, depth - 1)))
    # one branch may fail at the anchor; the other must hold
    bad = Not(_eq_ne_formula(rng, names, anchor, depth - 1))
    kids = [bad, _eq_ne_formula(rng, names, anchor, depth - 1)]
    rng.shuffle(kids)
    return Or(tuple(kids))


@criterion(2, "exact witnesses for EQ/NE formulas")
def test_exact_witnesses_eq_ne():
    rng = random.Random(2024)
    names = ("x1", "x2")
    checked = 0
    while checked < 1000:
        anchor = [F(rng.randint(-6, 6), rng.randint(1, 4)) for _ in names]
        f = to_nnf(_eq_ne_formula(rng, names, anchor, 2))
        assert {a.rel for a in _atoms(f)} <= {Rel.EQ, Rel.NE}
        lift = compile_formula(f)
        pts = [anchor] + [[F(rng.randint(-6, 6), rng.randint(1, 4)) for _ in names]
                          for _ in range(3)]
        for pt in pts:
            if not eval_point(f, pt):
                continue
            y = synth_witness(lift, pt)
            assert all(isinstance(v, F) for v in y)
            assert lift.poly.eval(list(pt) + list(y)) == 0
            checked += 1
    assert checked >= 1000


def _atoms(f):
    if isinstance(f, Atom):
        return [f]
    if isinstance(f, (And, Or)):
        return [a for c in f.children for a in _atoms(c)]
    raise AssertionError(f"not in NNF: {f!r}")


# -- 3 ------------------------------------------------------------------------

@criterion(3, "circle gadget joins the two-point fiber")
def test_gadget_components():
    cfg = VerifyConfig()
    L = two_point_lift()
    B = reduce_components(L, [WitnessPair([0], [0], [1])])
    assert B.poly.eval([0, 0, 0]) == 0
    assert B.poly.eval([0, 1, 0]) == 0
    assert estimate_components(L, cfg).count == 2
    assert estimate_components(B, cfg).count == 1


@criterion(3, "circle gadget joins the two-point fiber")
def test_gadget_preserves_classification():
    f = parse("x1 = 0")
    cfg = VerifyConfig(box=[(-2, 2)])
    L = two_point_lift()
    B = reduce_components(L, [WitnessPair([0], [0], [1])])
    before, after = check_projection(f, L, cfg), check_projection(f, B, cfg)
    assert before.grid_status == after.grid_status
    assert before.grid_status.count("W") == 1 and len(before.grid_status) == 201
    assert before.passed and after.passed


# -- 4 ------------------------------------------------------------------------

@criterion(4, "naive difference over-projects; NNF form does not")
def test_naive_difference_overprojects():
    names = ("x1", "t1")
    x, z = (Polynomial.var(names, v) for v in names)
    a = compile_formula(parse("0 = 0", base_dim=1))
    b = lift_from_polynomial(x * z - 1, 1)
    D = lift_difference(a, b, allow_aux=True)
    assert D.var_names == ("x1", "t1", "t2")
    pt = [F(1, 2), F(0), F(-1)]
    q = (x * z - 1).eval(pt[:2])
    assert pt[2] * q == 1
    assert D.poly.eval(pt) == 0
    # x1 = 1/2 is in the projection although 1/2 lies in {x1 z = 1 for some z}
    assert not eval_point(parse("0 = 0 \\ x1 != 0"), [F(1, 2)])


@criterion(4, "naive difference over-projects; NNF form does not")
def test_nnf_difference_projects_to_origin():
    f = to_nnf(parse("0 = 0 \\ x1 != 0"))
    lift = compile_formula(f)
    cfg = VerifyConfig(box=[(-2, 2)])
    rep = check_projection(f, lift, cfg)
    assert rep.grid_status == "." * 100 + "W" + "." * 100
    assert rep.passed and rep.counts["sound_misses"] == 0
    s = sample_variety(lift, cfg)
    assert np.all(np.abs(s.points[s.accepted, 0]) <= cfg.tau_membership)


# -- 5 ------------------------------------------------------------------------

RELS = {"=": lambda v: v == 0, ">=": lambda v: v >= 0, ">": lambda v: v > 0,
        "<=": lambda v: v <= 0, "<": lambda v: v < 0, "!=": lambda v: v != 0}


def _oracle(f, pt):
    if isinstance(f, Atom):
        return RELS[f.rel.value](f.poly.eval(pt))
    if isinstance(f, And):
        return all(_oracle(c, pt) for c in f.children)
    if isinstance(f, Or):
        return any(_oracle(c, pt) for c in f.children)
    if isinstance(f, Not):
        return not _oracle(f.child, pt)
    return _oracle(f.left, pt) and not _oracle(f.right, pt)


def _any_formula(rng, names, depth):
    if depth == 0 or rng.random() < 0.25:
        terms = {tuple(rng.randint(0, 2) for _ in names): F(rng.randint(-3, 3), rng.randint(1, 2))
                 for _ in range(rng.randint(0, 3))}
        return Atom(Polynomial(names, terms), rng.choice(list(Rel)))
    kind = rng.choice(["and", "or", "not", "diff"])
    if kind == "not":
        return Not(_any_formula(rng, names, depth - 1))
    if kind == "diff":
        return Diff(_any_formula(rng, names, depth - 1), _any_formula(rng, names, depth - 1))
    kids = tuple(_any_formula(rng, names, depth - 1) for _ in range(rng.randint(2, 3)))
    return And(kids) if kind == "and" else Or(kids)


@criterion(5, "NNF semantic equivalence")
def test_nnf_equivalence_10k():
    rng = random.Random(5)
    names = ("x1", "x2")
    agree = 0
    for _ in range(10_000):
        f = _any_formula(rng, names, 4)
        # small integers make atoms vanish often, which exercises = and !=
        pt = [F(rng.randint(-2, 2), rng.choice([1, 1, 2])) for _ in names]
        g = to_nnf(f)
        agree += _oracle(f, pt) == _oracle(g, pt) == eval_point(g, pt)
    assert agree == 10_000


# -- 6 ------------------------------------------------------------------------

@criterion(6, "numerical hygiene")
@pytest.mark.parametrize("name", sorted(GALLERY))
def test_gradient_vs_finite_differences(name):
    _, lift, _ = gallery_case(name)
    cols = {v: i for i, v in enumerate(lift.var_names)}
    n = len(cols)
    X = np.random.default_rng(6).uniform(-1.5, 1.5, (40, n))
    _, g = lift.circuit.value_and_grad(X, cols)
    h = 1e-6
    for i in range(n):
        E = np.zeros(n)
        E[i] = h
        fd = (lift.circuit.value(X + E, cols) - lift.circuit.value(X - E, cols)) / (2 * h)
        rel = np.abs(fd - g[:, i]) / np.maximum(1.0, np.abs(g[:, i]))
        assert rel.max() <= 1e-6


@criterion(6, "numerical hygiene")
@pytest.mark.parametrize("name", sorted(GALLERY))
def test_accepted_points_on_variety(name):
    _, lift, cfg = gallery_case(name)
    s = gallery_samples(name)
    acc = s.points[s.accepted]
    assert len(acc) > 0
    cols = {v: i for i, v in enumerate(lift.var_names)}
    assert np.abs(lift.circuit.value(acc, cols)).max() <= 1e-8
    # exact check on a subset, in rational arithmetic
    for row in acc[:: max(1, len(acc) // 50)]:
        assert abs(lift.poly.eval([F(float(v)) for v in row])) <= 1e-8


@criterion(6, "numerical hygiene")
def test_pipeline_determinism(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    (tmp_path / "annulus.sa").write_text(GALLERY["annulus"][0] + "\n")
    (tmp_path / "interval.sa").write_text(GALLERY["interval"][0] + "\n")
    (tmp_path / "pairs.json").write_text(json.dumps(
        [{"x": ["0"], "y1": ["0", "1"], "y2": ["0", "-1"]}]))
    box = "--box=-3:3,-3:3"
    opts = ["--grid-res", "61", "--samples", "2000", "--seed", "11"]

    def run():
        main(["compile", "annulus.sa", "-o", "a.lift"])
        main(["verify", "annulus.sa", "a.lift", "-o", "a.json", box, *opts])
        main(["compile", "interval.sa", "-o", "i.lift"])
        main(["bridge", "i.lift", "pairs.json", "-o", "i.b.lift", *opts])
        main(["plot", "annulus.sa", "--lift", "a.lift", "-o", "a.svg", "--table", "a.csv",
              box, *opts])
        main(["sample", "a.lift", "-o", "s.csv", *opts])
        return {p: (tmp_path / p).read_bytes()
                for p in ("a.lift", "a.json", "i.lift", "i.b.lift", "a.svg", "a.csv", "s.csv")}

    first = run()
    second = run()
    assert json.loads(first["a.json"])["passed"]
    assert first == second
