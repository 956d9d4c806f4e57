from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import strategies as st

from unsemi.formula import And, Atom, Diff, Not, Or, Rel
from unsemi.poly import Polynomial

# -- acceptance summary -------------------------------------------------------

_CRITERIA: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion n")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call" and not rep.failed:
        return
    n, title = mark.args
    entry = _CRITERIA.setdefault(n, {"title": title, "ok": True, "tests": 0})
    if rep.when == "call":
        entry["tests"] += 1
    if rep.failed:
        entry["ok"] = False


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        e = _CRITERIA[n]
        verdict = "PASS" if e["ok"] else "FAIL"
        terminalreporter.write_line(f"criterion {n}: {verdict}  {e['title']} ({e['tests']} tests)")


# -- strategies ---------------------------------------------------------------

small_fractions = st.fractions(min_value=-5, max_value=5, max_denominator=6)


@st.composite
def polynomials(draw, names=("x1", "x2"), max_terms=4, max_exp=3):
    k = len(names)
    n = draw(st.integers(0, max_terms))
    terms: dict = {}
    for _ in range(n):
        e = tuple(draw(st.lists(st.integers(0, max_exp), min_size=k, max_size=k)))
        terms[e] = terms.get(e, Fraction(0)) + draw(small_fractions)
    return Polynomial(names, terms)


def rational_points(m: int):
    return st.lists(small_fractions, min_size=m, max_size=m)


@st.composite
def formulas(draw, m=2, depth=3):
    names = tuple(f"x{i}" for i in range(1, m + 1))
    if depth == 0 or draw(st.integers(0, 3)) == 0:
        return Atom(draw(polynomials(names, max_terms=3, max_exp=2)),
                    draw(st.sampled_from(list(Rel))))
    kind = draw(st.sampled_from(["and", "or", "not", "diff"]))
    sub = formulas(m=m, depth=depth - 1)
    if kind == "not":
        return Not(draw(sub))
    if kind == "diff":
        return Diff(draw(sub), draw(sub))
    kids = tuple(draw(st.lists(sub, min_size=2, max_size=3)))
    return And(kids) if kind == "and" else Or(kids)
