"""``unsemi`` command line: compile, verify, bridge, plot, sample.

Exit codes: 0 success, 1 verification failure or invalid witness pair,
2 bad input (syntax, unreadable or mismatched files) or warnings only.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import json
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .formula import ParseError, eval_point, parse, to_nnf
from .gadget import BridgeError, load_pairs, reduce_components
from .io import dump_lift, load_lift, make_manifest, write_atomic
from .lift import compile_formula
from .verify import (
    VerifyConfig, check_projection, estimate_components, exit_status, grid_points,
    sample_variety,
)

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    """Bad user input; reported on stderr with exit status 2."""


# ---------------------------------------------------------------------------
# config handling

def _interval(text: str) -> tuple[Fraction, Fraction]:
    try:
        lo, hi = text.split(":")
        return Fraction(lo.strip()), Fraction(hi.strip())
    except ValueError:
        raise InputError(f"bad interval {text!r}; expected LO:HI") from None


def _box(text: str) -> tuple:
    return tuple(_interval(part) for part in text.split(","))


_FLAG_FIELDS = {
    "grid_res": "grid_res", "samples": "n_samples", "seed": "seed",
    "delta": "delta_variety", "tau": "tau_membership",
    "eps_boundary": "eps_boundary", "eps_prox": "eps_proximity",
}


def build_config(args) -> VerifyConfig:
    """Defaults, then the ``--config`` JSON file, then explicit flags."""
    fields: dict = {}
    if getattr(args, "config", None):
        try:
            data = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(data, dict):
            raise InputError("config file must hold a JSON object")
        fields.update(data)
        if isinstance(fields.get("box"), list):
            fields["box"] = tuple(tuple(iv) for iv in fields["box"])
        if isinstance(fields.get("aux_box"), list):
            fields["aux_box"] = tuple(fields["aux_box"])
    for flag, name in _FLAG_FIELDS.items():
        val = getattr(args, flag, None)
        if val is not None:
            fields[name] = val
    if getattr(args, "box", None):
        fields["box"] = _box(args.box)
    if getattr(args, "aux_box", None):
        fields["aux_box"] = tuple(float(v) for v in _interval(args.aux_box))
    try:
        return VerifyConfig(**fields)
    except (TypeError, ValueError) as exc:
        raise InputError(f"invalid configuration: {exc}") from None


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from None


def _read_lift(path: str):
    try:
        return load_lift(_read(path))
    except ParseError as exc:
        raise InputError(f"{path}: bad source formula: {exc}") from None
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from None


def _read_formula(path: str, base_dim: int | None = None):
    try:
        return parse(_read(path), base_dim)
    except ParseError as exc:
        raise InputError(f"{path}: {exc}") from None


def _emit(out: str | None, text: str) -> None:
    if out:
        write_atomic(out, text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# commands

def run_compile(args) -> int:
    f = _read_formula(args.formula)
    lift = compile_formula(to_nnf(f))
    out = args.output or str(Path(args.formula).with_suffix(".lift"))
    write_atomic(out, dump_lift(lift, make_manifest("compile", [args.formula])))
    print(f"base_dim: {lift.base_dim}")
    print(f"aux_dim: {lift.aux_dim}")
    print(f"degree: {lift.degree()}")
    print(f"terms: {len(lift.poly)}")
    return EXIT_OK


def run_verify(args) -> int:
    cfg = build_config(args)
    lift = _read_lift(args.lift)
    try:
        f = parse(_read(args.formula), lift.base_dim)
    except ParseError as exc:
        raise InputError(f"{args.formula}: {exc} (lift base dimension is "
                         f"{lift.base_dim})") from None
    report = check_projection(f, lift, cfg)
    data = report.to_dict()
    data["manifest"] = make_manifest("verify", [args.formula, args.lift],
                                     cfg.to_dict(), cfg.seed)
    _emit(args.output, json.dumps(data, indent=2) + "\n")
    status = exit_status(report)
    c = report.counts
    print(f"in_set: {c['in_set_witnessed']} witnessed, {c['in_set_witness_failed']} failed; "
          f"samples: {c['sound_hits']} hits, {c['sound_misses']} misses, "
          f"{c['boundary_skipped']} skipped; components: {report.component_estimate}",
          file=sys.stderr if not args.output else sys.stdout)
    for fl in report.failures[:10]:
        print(f"  {fl['kind']} at ({', '.join(fl['point'])}): {fl['detail']}", file=sys.stderr)
    return status


def run_bridge(args) -> int:
    cfg = build_config(args)
    lift = _read_lift(args.lift)
    try:
        pairs = load_pairs(_read(args.pairs))
    except (ValueError, KeyError, TypeError) as exc:
        raise InputError(f"{args.pairs}: malformed witness-pair file: {exc}") from None
    try:
        bridged = reduce_components(lift, pairs, cfg.delta_variety)
    except BridgeError as exc:
        print(f"invalid pair: {exc}", file=sys.stderr)
        return EXIT_FAIL
    out = args.output or str(Path(args.lift).with_suffix(".bridged.lift"))
    manifest = make_manifest("bridge", [args.lift, args.pairs], cfg.to_dict(), cfg.seed)
    write_atomic(out, dump_lift(bridged, manifest))
    print(f"aux_dim: {lift.aux_dim} → {bridged.aux_dim}")
    if not args.no_estimate:
        before = estimate_components(lift, cfg).count
        after = estimate_components(bridged, cfg).count if pairs else before
        print(f"components: {before} → {after}")
    return EXIT_OK


def _plot_data(args, cfg):
    lift = _read_lift(args.lift) if args.lift else None
    if args.formula:
        f = _read_formula(args.formula, lift.base_dim if lift else None)
    elif lift is not None and lift.source is not None:
        f = lift.source
    else:
        f = None
    if f is None and lift is None:
        raise InputError("plot needs a formula, a lift, or both")
    m = lift.base_dim if lift is not None else f.base_dim
    grid = []
    if f is not None:
        grid = [x for x in grid_points(cfg.resolved_box(m), cfg.grid_res) if eval_point(f, x)]
    samples = np.zeros((0, m))
    if lift is not None:
        s = sample_variety(lift, cfg)
        samples = s.points[s.accepted][:, :m]
    return m, grid, samples


def _table(m: int, grid, samples) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["kind"] + [f"x{i}" for i in range(1, m + 1)])
    for x in grid:
        w.writerow(["grid_in"] + [str(v) for v in x])
    for row in samples:
        w.writerow(["sample"] + [repr(float(v)) for v in row])
    return buf.getvalue()


def _svg(m: int, grid, samples, box, title: str) -> str:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "unsemi"
    fig, ax = plt.subplots(figsize=(6, 6 if m == 2 else 2.5))
    G = np.array([[float(v) for v in x] for x in grid]).reshape(-1, m)
    if m == 1:
        ax.scatter(G[:, 0], np.zeros(len(G)), s=4, c="tab:blue", label="set (grid)")
        ax.scatter(samples[:, 0], np.full(len(samples), 0.5), s=2, c="tab:red",
                   label="lift samples")
        ax.set_ylim(-0.5, 1.0)
        ax.set_yticks([])
    else:
        ax.scatter(G[:, 0], G[:, 1], s=1, c="tab:blue", marker="s", label="set (grid)")
        ax.scatter(samples[:, 0], samples[:, 1], s=1, c="tab:red", alpha=0.5,
                   label="lift samples")
        ax.set_ylim(float(box[1][0]), float(box[1][1]))
        ax.set_aspect("equal")
        ax.set_ylabel("x2")
    ax.set_xlim(float(box[0][0]), float(box[0][1]))
    ax.set_xlabel("x1")
    ax.set_title(title)
    ax.legend(loc="upper right", fontsize="small")
    buf = _io.StringIO()
    fig.savefig(buf, format="svg", metadata={"Date": None})
    plt.close(fig)
    return buf.getvalue()


def run_plot(args) -> int:
    cfg = build_config(args)
    m, grid, samples = _plot_data(args, cfg)
    if args.table:
        write_atomic(args.table, _table(m, grid, samples))
    if args.table_only:
        if not args.table:
            sys.stdout.write(_table(m, grid, samples))
        return EXIT_OK
    if m > 2:
        print(f"graphics need base dimension <= 2 (got {m}); use --table-only",
              file=sys.stderr)
        return EXIT_INPUT
    if not args.output:
        raise InputError("plot needs -o FILE.svg unless --table-only is given")
    title = Path(args.formula or args.lift).stem
    write_atomic(args.output, _svg(m, grid, samples, cfg.resolved_box(m), title))
    return EXIT_OK


def run_sample(args) -> int:
    cfg = build_config(args)
    lift = _read_lift(args.lift)
    s = sample_variety(lift, cfg)
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(lift.var_names) + ["residual"])
    for row, r in zip(s.points[s.accepted], s.residual[s.accepted]):
        w.writerow([repr(float(v)) for v in row] + [repr(float(r))])
    _emit(args.output, buf.getvalue())
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing

def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file of configuration fields; flags win")
    p.add_argument("--box", help="base box, e.g. --box=-2:2,-2:2")
    p.add_argument("--aux-box", dest="aux_box", help="aux interval, e.g. --aux-box=-10:10")
    p.add_argument("--grid-res", dest="grid_res", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--delta", type=float)
    p.add_argument("--tau", type=float)
    p.add_argument("--eps-boundary", dest="eps_boundary", type=float)
    p.add_argument("--eps-prox", dest="eps_prox", type=float)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="unsemi", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"unsemi {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compile", help="compile a formula file into a lift")
    p.add_argument("formula")
    p.add_argument("-o", "--output")
    p.set_defaults(func=run_compile)

    p = sub.add_parser("verify", help="check a lift's projection against a formula")
    p.add_argument("formula")
    p.add_argument("lift")
    p.add_argument("-o", "--output", help="report file (default: stdout)")
    _common(p)
    p.set_defaults(func=run_verify)

    p = sub.add_parser("bridge", help="splice bridging circles into a lift")
    p.add_argument("lift")
    p.add_argument("pairs", help="JSON list of {x, y1, y2} witness pairs")
    p.add_argument("-o", "--output")
    p.add_argument("--no-estimate", action="store_true",
                   help="skip the before/after component estimates")
    _common(p)
    p.set_defaults(func=run_bridge)

    p = sub.add_parser("plot", help="grid membership and lift samples as SVG and CSV")
    p.add_argument("formula", nargs="?")
    p.add_argument("--lift")
    p.add_argument("-o", "--output", help="SVG file")
    p.add_argument("--table", help="also write the point table to this CSV file")
    p.add_argument("--table-only", action="store_true")
    _common(p)
    p.set_defaults(func=run_plot)

    p = sub.add_parser("sample", help="solver points on a lift's variety as CSV")
    p.add_argument("lift")
    p.add_argument("-o", "--output")
    _common(p)
    p.set_defaults(func=run_sample)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
