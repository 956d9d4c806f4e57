import csv
import json

import pytest

from unsemi.cli import main
from unsemi.io import dump_lift, load_lift
from unsemi.lift import lift_from_polynomial
from unsemi.poly import Polynomial

FAST = ["--grid-res", "21", "--samples", "400"]


@pytest.fixture
def work(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)

    def write(name, text):
        p = tmp_path / name
        p.write_text(text)
        return str(p)

    return write


def two_point_lift_file(write):
    names = ("x1", "t1")
    x, t = (Polynomial.var(names, v) for v in names)
    return write("two.lift", dump_lift(lift_from_polynomial(x * x + (t * (t - 1)) ** 2, 1)))


# -- compile ------------------------------------------------------------------

def test_compile_interval(work, capsys):
    src = work("interval.sa", "x1 >= 0 & 1-x1 >= 0\n")
    assert main(["compile", src, "-o", "interval.lift"]) == 0
    out = capsys.readouterr().out
    assert "aux_dim: 2" in out and "degree: 4" in out
    lift = load_lift(open("interval.lift").read())
    assert lift.aux_dim == 2


def test_compile_point_default_output(work, capsys):
    src = work("point.sa", "x1 = 0\n")
    assert main(["compile", src]) == 0
    out = capsys.readouterr().out
    assert "aux_dim: 0" in out and "degree: 1" in out
    assert load_lift(open("point.lift").read()).degree() == 1


def test_compile_syntax_error(work, capsys):
    src = work("bad.sa", "x1 >= & 1\n")
    assert main(["compile", src]) == 2
    assert "syntax error at 1:7" in capsys.readouterr().err


def test_compile_missing_file(work, capsys):
    assert main(["compile", "nope.sa"]) == 2
    assert capsys.readouterr().err.startswith("error: ")


# -- verify -------------------------------------------------------------------

def test_verify_interval_passes(work, capsys):
    src = work("interval.sa", "x1 >= 0 & 1-x1 >= 0\n")
    main(["compile", src, "-o", "interval.lift"])
    assert main(["verify", src, "interval.lift", "-o", "report.json", *FAST]) == 0
    rep = json.load(open("report.json"))
    assert rep["passed"] and rep["counts"]["sound_misses"] == 0
    assert rep["manifest"]["command"] == "verify"
    assert rep["config"]["grid_res"] == 21


def test_verify_mismatched_pair_lists_zero(work, capsys):
    strict = work("strict.sa", "x1 > 0\n")
    closed = work("closed.sa", "x1 >= 0\n")
    main(["compile", strict, "-o", "strict.lift"])
    capsys.readouterr()
    assert main(["verify", closed, "strict.lift", *FAST]) == 1
    cap = capsys.readouterr()
    rep = json.loads(cap.out)
    assert ["0"] in [f["point"] for f in rep["failures"]]
    assert "witness_failed at (0)" in cap.err


def test_verify_coarse_grid_is_deterministic(work, capsys):
    src = work("disk.sa", "x1^2 + x2^2 <= 1\n")
    main(["compile", src, "-o", "disk.lift"])
    args = ["verify", src, "disk.lift", "--grid-res", "3", "--samples", "200"]
    main(args + ["-o", "a.json"])
    main(args + ["-o", "b.json"])
    assert open("a.json", "rb").read() == open("b.json", "rb").read()


def test_verify_dimension_mismatch(work, capsys):
    src = work("point.sa", "x1 = 0\n")
    main(["compile", src, "-o", "point.lift"])
    other = work("plane.sa", "x2 = 0\n")
    assert main(["verify", other, "point.lift", *FAST]) == 2
    assert "base dimension" in capsys.readouterr().err


@pytest.mark.parametrize("content", ["", "{", '{"format": "unsemi-lift"}', "[1, 2]"])
def test_verify_corrupted_lift(work, capsys, content):
    src = work("point.sa", "x1 = 0\n")
    bad = work("bad.lift", content)
    assert main(["verify", src, bad]) == 2
    assert "error:" in capsys.readouterr().err


def test_config_file_and_flag_precedence(work, capsys):
    src = work("interval.sa", "x1 >= 0 & 1-x1 >= 0\n")
    main(["compile", src, "-o", "interval.lift"])
    conf = work("conf.json", json.dumps({"grid_res": 11, "n_samples": 300, "seed": 4}))
    main(["verify", src, "interval.lift", "--config", conf, "--seed", "9", "-o", "r.json"])
    cfg = json.load(open("r.json"))["config"]
    assert (cfg["grid_res"], cfg["n_samples"], cfg["seed"]) == (11, 300, 9)
    bad = work("bad.json", '{"grid_res": 1}')
    assert main(["verify", src, "interval.lift", "--config", bad]) == 2


# -- bridge -------------------------------------------------------------------

def test_bridge_two_points(work, capsys):
    lift = two_point_lift_file(work)
    pairs = work("pairs.json", '[{"x": ["0"], "y1": ["0"], "y2": ["1"]}]')
    assert main(["bridge", lift, pairs, "--samples", "2000"]) == 0
    out = capsys.readouterr().out
    assert "aux_dim: 1 → 2" in out
    assert "components: 2 → 1" in out
    bridged = load_lift(open("two.bridged.lift").read())
    assert bridged.poly.eval([0, 0, 0]) == 0 and bridged.poly.eval([0, 1, 0]) == 0


def test_bridge_empty_pairs_is_identity(work, capsys):
    lift = two_point_lift_file(work)
    pairs = work("pairs.json", "[]")
    assert main(["bridge", lift, pairs, "-o", "same.lift", "--no-estimate"]) == 0
    a, b = json.load(open(lift)), json.load(open("same.lift"))
    b.pop("manifest"), a.pop("manifest", None)
    assert a == b


@pytest.mark.parametrize("pair, word", [
    ('{"x": ["0"], "y1": ["1"], "y2": ["1"]}', "degenerate"),
    ('{"x": ["0"], "y1": ["0"], "y2": ["3"]}', "off-variety"),
    ('{"x": ["0", "1"], "y1": ["0"], "y2": ["1"]}', "dimension"),
])
def test_bridge_invalid_pair(work, capsys, pair, word):
    lift = two_point_lift_file(work)
    pairs = work("pairs.json", f"[{pair}]")
    assert main(["bridge", lift, pairs, "--no-estimate"]) == 1
    assert word in capsys.readouterr().err


def test_bridge_malformed_pair_file(work, capsys):
    lift = two_point_lift_file(work)
    pairs = work("pairs.json", '[{"x": ["0"]}]')
    assert main(["bridge", lift, pairs]) == 2


# -- plot and sample ----------------------------------------------------------

def test_plot_annulus_is_deterministic(work, capsys):
    src = work("annulus.sa", "x1^2 + x2^2 >= 1 & 4 - x1^2 - x2^2 >= 0\n")
    main(["compile", src, "-o", "annulus.lift"])
    args = ["plot", src, "--lift", "annulus.lift", "--box=-3:3,-3:3", *FAST]
    assert main(args + ["-o", "a.svg", "--table", "a.csv"]) == 0
    assert main(args + ["-o", "b.svg"]) == 0
    a = open("a.svg", "rb").read()
    assert a == open("b.svg", "rb").read()
    assert a.lstrip().startswith(b"<?xml") and b"<svg" in a
    rows = list(csv.reader(open("a.csv")))
    assert rows[0] == ["kind", "x1", "x2"]
    kinds = {r[0] for r in rows[1:]}
    assert kinds == {"grid_in", "sample"}
    for r in rows[1:]:
        if r[0] == "sample":
            rr = float(r[1]) ** 2 + float(r[2]) ** 2
            assert 1 - 1e-6 <= rr <= 4 + 1e-6


def test_plot_empty_set(work):
    src = work("empty.sa", "x1^2 + x2^2 + 1 = 0\n")
    main(["compile", src, "-o", "empty.lift"])
    assert main(["plot", src, "--lift", "empty.lift", "-o", "e.svg", *FAST]) == 0
    assert b"</svg>" in open("e.svg", "rb").read()


def test_plot_three_dims(work, capsys):
    src = work("ball.sa", "x1^2 + x2^2 + x3^2 <= 1\n")
    assert main(["plot", src, "-o", "x.svg", "--grid-res", "5"]) == 2
    assert "--table-only" in capsys.readouterr().err
    assert main(["plot", src, "--table-only", "--grid-res", "5"]) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0] == "kind,x1,x2,x3"
    assert "grid_in,0,0,0" in out


def test_sample_csv(work, capsys):
    lift = two_point_lift_file(work)
    assert main(["sample", lift, "--samples", "100", "-o", "s.csv"]) == 0
    rows = list(csv.reader(open("s.csv")))
    assert rows[0] == ["x1", "t1", "residual"]
    assert all(abs(float(r[2])) <= 1e-8 for r in rows[1:])


# -- determinism --------------------------------------------------------------

def test_pipeline_outputs_are_byte_identical(work, capsys):
    src = work("interval.sa", "x1 >= 0 & 1-x1 >= 0\n")
    pairs = work("pairs.json", '[{"x": ["0"], "y1": ["0", "1"], "y2": ["0", "-1"]}]')

    def run(tag):
        main(["compile", src, "-o", f"{tag}.lift"])
        main(["verify", src, f"{tag}.lift", "-o", f"{tag}.json", *FAST])
        main(["bridge", f"{tag}.lift", pairs, "-o", f"{tag}.b.lift", *FAST])
        return [open(f"{tag}{ext}", "rb").read() for ext in (".lift", ".json", ".b.lift")]

    first, second = run("one"), run("one")
    assert first == second
