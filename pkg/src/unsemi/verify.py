"""Numerical checks that a lift projects onto its formula's set.

Two passes make up :func:`check_projection`:

* completeness: every rational grid point in the set gets a witness, and the
  lift polynomial vanishes (to ``delta_variety``) at the lifted point;
* soundness: points found on the variety by local descent from random starts
  are projected to the base and tested against the formula.

Compiled lifts are generally not compact, so the auxiliary coordinates are
confined to ``aux_box`` during solving and every statement here is relative
to that box.
"""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from itertools import product
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree

from . import circuit as C
from .formula import Formula, Tri, eval_float_batch, eval_point, to_nnf
from .lift import Lift, NoWitnessProgram, WitnessUndefinedError, synth_witness
from .poly import Polynomial, as_fraction

__all__ = [
    "ComponentEstimate", "SolveResult", "UnionFind", "VerifyConfig", "VerifyReport",
    "check_projection", "components_from_points", "densify", "estimate_components",
    "exit_status", "grid_points", "sample_formula", "sample_variety", "variety_pieces",
    "solve_batch", "solve_on_variety",
]

log = logging.getLogger(__name__)

NONCOMPACT_CAVEAT = (
    "auxiliary coordinates confined to aux_box; component estimates and "
    "soundness samples are relative to that box")


@dataclass(frozen=True)
class VerifyConfig:
    box: tuple | None = None
    grid_res: int = 201
    n_samples: int = 10000
    delta_variety: float = 1e-8
    tau_membership: float = 1e-6
    eps_boundary: float = 1e-3
    eps_proximity: float = 0.05
    seed: int = 0
    aux_box: tuple = (-10, 10)
    max_iter: int = 500
    polish_tol: float = 1e-24
    refine_rounds: int = 40

    def __post_init__(self):
        if self.box is not None:
            box = tuple((as_fraction(lo), as_fraction(hi)) for lo, hi in self.box)
            if any(lo >= hi for lo, hi in box):
                raise ValueError(f"degenerate box {self.box}")
            object.__setattr__(self, "box", box)
        lo, hi = self.aux_box
        if not lo < hi:
            raise ValueError(f"degenerate aux box {self.aux_box}")
        object.__setattr__(self, "aux_box", (float(lo), float(hi)))
        for name in ("delta_variety", "tau_membership", "eps_boundary", "eps_proximity",
                     "polish_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.grid_res < 2:
            raise ValueError("grid_res must be at least 2")
        if self.n_samples < 0 or self.max_iter < 0 or self.refine_rounds < 0:
            raise ValueError("n_samples, max_iter and refine_rounds must be non-negative")

    def resolved_box(self, m: int) -> tuple:
        if self.box is None:
            return ((Fraction(-2), Fraction(2)),) * m
        if len(self.box) != m:
            raise ValueError(f"box has {len(self.box)} intervals for dimension {m}")
        return self.box

    def to_dict(self) -> dict:
        d = asdict(self)
        d["box"] = None if self.box is None else [[str(lo), str(hi)] for lo, hi in self.box]
        d["aux_box"] = list(self.aux_box)
        return d


# ---------------------------------------------------------------------------
# local solver

@dataclass
class SolveResult:
    points: np.ndarray
    residual: np.ndarray
    accepted: np.ndarray
    iterations: np.ndarray
    piece: np.ndarray | None = None


_ALPHAS = 2.0 ** np.arange(3, -9, -1)


def _newton_steps(v, g, h, mask):
    """Damped Newton step for ``P^2 / 2`` with curvature magnitudes floored.

    The model Hessian ``grad P grad P^T + P hess P`` is symmetrized, its
    eigenvalues replaced by their absolute values and floored relative to the
    largest one, which keeps directions of slow (high-order) vanishing from
    stalling behind stiff ones.
    """
    g = np.where(mask, g, 0.0)
    h = h * (mask[:, None] & mask[None, :])
    grad = v[:, None] * g
    hess = g[:, :, None] * g[:, None, :] + v[:, None, None] * h
    hess = 0.5 * (hess + hess.transpose(0, 2, 1))
    w, V = np.linalg.eigh(hess)
    aw = np.abs(w)
    floor = np.maximum(aw.max(axis=1, keepdims=True) * 1e-12, 1e-300)
    inv = 1.0 / np.maximum(aw, floor)
    step = np.einsum("nij,nj,nkj,nk->ni", V, inv, V, grad)
    return np.where(mask, step, 0.0)


def solve_batch(lift: Lift, starts, cfg: VerifyConfig,
                free: Sequence[int] | None = None,
                target: C.Node | None = None) -> SolveResult:
    """Damped descent on ``P^2`` from each row of ``starts``.

    Steps are Newton steps for ``P^2 / 2`` built from the exact gradient and
    Hessian of the lift circuit (see :func:`_newton_steps`); the step length is
    the best of a halving sequence.  Iteration continues past
    ``delta_variety`` until the residual stops improving, so accepted points
    sit as close to the variety as floating point allows.  Only columns in
    ``free`` move.  Descent runs on ``target`` (default: the lift circuit),
    but acceptance always tests the lift itself.

    Refinement stops once ``|P| <= polish_tol``.  Lifts vanish to high order
    along some directions (a product of squared sums of squares vanishes to
    fourth order), so a residual of ``delta_variety`` alone can leave a point
    far from the variety in base coordinates.
    """
    X = np.array(starts, dtype=float, copy=True).reshape(-1, len(lift.var_names))
    N, n = X.shape
    cols = {v: i for i, v in enumerate(lift.var_names)}
    node = target if target is not None else lift.circuit
    mask = np.zeros(n, dtype=bool)
    mask[list(range(n)) if free is None else list(free)] = True
    iters = np.zeros(N, dtype=np.int64)
    with np.errstate(all="ignore"):
        val = node.value(X, cols) if N else np.zeros(0)
        active = np.isfinite(val) & (np.abs(val) > cfg.polish_tol)
        for _ in range(cfg.max_iter):
            idx = np.flatnonzero(active)
            if idx.size == 0:
                break
            Xa = X[idx]
            v, g, h = node.value_grad_hess(Xa, cols)
            ok = np.isfinite(v) & np.all(np.isfinite(g), axis=1) & np.all(np.isfinite(h), axis=(1, 2))
            step = np.zeros_like(Xa)
            if ok.any():
                step[ok] = _newton_steps(v[ok], g[ok], h[ok], mask)
            step[~np.isfinite(step)] = 0.0
            trials = Xa[None, :, :] - _ALPHAS[:, None, None] * step[None, :, :]
            tv = np.abs(node.value(trials.reshape(-1, n), cols)).reshape(len(_ALPHAS), -1)
            tv = np.where(np.isfinite(tv), tv, np.inf)
            best = np.argmin(tv, axis=0)
            bestv = tv[best, np.arange(idx.size)]
            improved = ok & (bestv < np.abs(v) * (1 - 1e-9))
            moved = idx[improved]
            X[moved] = trials[best[improved], np.flatnonzero(improved)]
            val[moved] = bestv[improved]
            iters[moved] += 1
            active[idx] = improved & (bestv > cfg.polish_tol)
    if target is not None and N:
        with np.errstate(all="ignore"):
            val = lift.circuit.value(X, cols)
    res = np.abs(val)
    accepted = np.isfinite(res) & (res <= cfg.delta_variety)
    if N:
        accepted &= _inside(lift, X, cfg)
    return SolveResult(X, res, accepted, iters)


def _inside(lift: Lift, X: np.ndarray, cfg: VerifyConfig) -> np.ndarray:
    m = lift.base_dim
    box = cfg.resolved_box(m)
    ok = np.ones(X.shape[0], dtype=bool)
    for j, (lo, hi) in enumerate(box):
        ok &= (X[:, j] >= float(lo)) & (X[:, j] <= float(hi))
    alo, ahi = cfg.aux_box
    if X.shape[1] > m:
        ok &= np.all((X[:, m:] >= alo) & (X[:, m:] <= ahi), axis=1)
    return ok


def solve_on_variety(lift: Lift, start: Sequence, cfg: VerifyConfig | None = None):
    """Single-start solve; returns the point as a tuple of floats or ``None``."""
    cfg = cfg or VerifyConfig()
    r = solve_batch(lift, [list(map(float, start))], cfg)
    return tuple(r.points[0]) if r.accepted[0] else None


def random_starts(lift: Lift, cfg: VerifyConfig) -> np.ndarray:
    rng = np.random.default_rng(cfg.seed)
    m, k = lift.base_dim, lift.aux_dim
    box = cfg.resolved_box(m)
    lo = np.array([float(a) for a, _ in box] + [cfg.aux_box[0]] * k)
    hi = np.array([float(b) for _, b in box] + [cfg.aux_box[1]] * k)
    return lo + (hi - lo) * rng.random((cfg.n_samples, m + k))


MAX_PIECES = 64


def _nonneg(node: C.Node) -> bool:
    """Cheap sufficient test that a node never takes negative values."""
    if isinstance(node, C.Square):
        return True
    if isinstance(node, (C.Sum, C.Product)):
        return all(_nonneg(a) for a in node.args)
    if isinstance(node, C.Substitute):
        return _nonneg(node.arg)
    if isinstance(node, C.Leaf):
        return all(c > 0 and all(e % 2 == 0 for e in exps) for exps, c in node.poly.items())
    return False


def _leaf_conditions(leaf: C.Leaf) -> list[C.Node]:
    # a positive combination of even powers of single variables vanishes
    # exactly when each of those variables does
    names = leaf.poly.var_names
    used = []
    for exps, c in leaf.poly.items():
        nz = [i for i, e in enumerate(exps) if e]
        if c <= 0 or len(nz) != 1 or exps[nz[0]] % 2:
            return [leaf]
        used.append(names[nz[0]])
    return [C.Leaf(Polynomial.var((v,), v)) for v in dict.fromkeys(used)]


def _pieces(node: C.Node, limit: int):
    """Zero set of ``node`` as a union of intersections of simpler zero sets.

    Returns a list of condition lists, or ``None`` past ``limit`` pieces.
    """
    if isinstance(node, C.Product):
        out = []
        for a in node.args:
            sub = _pieces(a, limit)
            if sub is None:
                return None
            out.extend(sub)
            if len(out) > limit:
                return None
        return out
    if isinstance(node, C.Square):
        return _pieces(node.arg, limit)
    if isinstance(node, C.Substitute):
        sub = _pieces(node.arg, limit)
        if sub is None:
            return None
        return [[C.Substitute(c, node.block, node.matrix, node.offset) for c in conj]
                for conj in sub]
    if isinstance(node, C.Sum) and _nonneg(node):
        out = [[]]
        for a in node.args:
            sub = _pieces(a, limit)
            if sub is None or len(out) * len(sub) > limit:
                return None
            out = [x + y for x in out for y in sub]
        return out
    if isinstance(node, C.Leaf) and _nonneg(node):
        return [_leaf_conditions(node)]
    return [[node]]


def variety_pieces(lift: Lift, limit: int = MAX_PIECES) -> list[C.Node]:
    """Descent targets whose zero sets together make up the lift's variety.

    Products split into their factors and sums of nonnegative terms into the
    common zeros of the terms, so each target vanishes to low order.  Starts
    are spread over the targets; descent on the full polynomial instead is
    drawn to the high-order zeros where pieces meet.
    """
    conj = _pieces(lift.circuit, limit)
    if conj is None or len(conj) <= 1 and len(conj[0]) <= 1:
        return [lift.circuit]
    return [c[0] if len(c) == 1 else C.Sum([C.Square(n) for n in c]) for c in conj]


def _solve_pieces(lift: Lift, starts: np.ndarray, piece: np.ndarray, targets,
                  cfg: VerifyConfig) -> SolveResult:
    N, n = starts.shape
    out = SolveResult(np.array(starts, dtype=float), np.full(N, np.inf),
                      np.zeros(N, dtype=bool), np.zeros(N, dtype=np.int64), piece)
    for j, tgt in enumerate(targets):
        sel = np.flatnonzero(piece == j)
        if sel.size == 0:
            continue
        r = solve_batch(lift, starts[sel], cfg,
                        target=None if tgt is lift.circuit else tgt)
        out.points[sel] = r.points
        out.residual[sel] = r.residual
        out.accepted[sel] = r.accepted
        out.iterations[sel] = r.iterations
    return out


def sample_variety(lift: Lift, cfg: VerifyConfig) -> SolveResult:
    """Solver run from ``n_samples`` seeded uniform starts in box x aux_box.

    Start ``i`` descends on piece ``i mod len(pieces)`` of the variety.
    """
    starts = random_starts(lift, cfg)
    targets = variety_pieces(lift)
    piece = np.arange(len(starts)) % len(targets)
    return _solve_pieces(lift, starts, piece, targets, cfg)


# ---------------------------------------------------------------------------
# grids

def grid_points(box: Sequence, res: int) -> list[tuple[Fraction, ...]]:
    axes = [[lo + (hi - lo) * Fraction(i, res - 1) for i in range(res)] for lo, hi in box]
    return list(product(*axes))


def sample_formula(f: Formula, cfg: VerifyConfig) -> list[tuple[Fraction, ...]]:
    """Rational grid points of the box that satisfy ``f`` exactly."""
    box = cfg.resolved_box(f.base_dim)
    return [x for x in grid_points(box, cfg.grid_res) if eval_point(f, x)]


# ---------------------------------------------------------------------------
# components

class UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.rank = [0] * n
        self.count = n

    def find(self, a: int) -> int:
        root = a
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[a] != root:
            self.parent[a], a = root, self.parent[a]
        return root

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1
        self.count -= 1
        return True


def components_from_points(points: np.ndarray, eps: float) -> np.ndarray:
    """Component label per point of the graph joining points at distance ``<= eps``.

    Points are first scaled by their largest per-axis extent.  The graph is
    resolved exactly without enumerating every edge: a greedy ``eps/2`` net
    groups points that are trivially connected, and only groups whose centers
    are within ``2*eps`` are compared pairwise.
    """
    P = np.asarray(points, dtype=float)
    N = P.shape[0]
    if N == 0:
        return np.zeros(0, dtype=np.int64)
    extent = float(np.max(P.max(axis=0) - P.min(axis=0))) if P.shape[1] else 0.0
    P = P / (extent if extent > 0 else 1.0)
    tree = cKDTree(P)
    group = np.full(N, -1, dtype=np.int64)
    centers = []
    for i in range(N):
        if group[i] >= 0:
            continue
        near = np.asarray(tree.query_ball_point(P[i], eps / 2), dtype=np.int64)
        near = near[group[near] < 0]
        group[near] = len(centers)
        group[i] = len(centers)
        centers.append(i)
    members = [[] for _ in centers]
    for i, g in enumerate(group):
        members[g].append(i)
    uf = UnionFind(len(centers))
    ctree = cKDTree(P[centers])
    trees: dict[int, cKDTree] = {}
    for a, b in sorted(ctree.query_pairs(2 * eps)):
        if uf.find(a) == uf.find(b):
            continue
        if len(members[a]) > len(members[b]):
            a, b = b, a
        if b not in trees:
            trees[b] = cKDTree(P[members[b]])
        d, _ = trees[b].query(P[members[a]], k=1)
        if np.min(d) <= eps:
            uf.union(a, b)
    roots = np.array([uf.find(g) for g in group])
    _, labels = np.unique(roots, return_inverse=True)
    # renumber by first occurrence so labels are stable
    order = {}
    out = np.empty(N, dtype=np.int64)
    for i, lab in enumerate(labels):
        out[i] = order.setdefault(lab, len(order))
    return out


@dataclass
class ComponentEstimate:
    count: int
    representatives: list
    n_points: int
    warning: str | None = None
    points: np.ndarray | None = field(default=None, repr=False)


def _greedy_net(P: np.ndarray, r: float, taken: np.ndarray | None = None) -> list[int]:
    """Indices of a greedy ``r``-net of ``P`` avoiding balls around ``taken``."""
    free = np.ones(len(P), dtype=bool)
    if taken is not None and len(taken):
        d, _ = cKDTree(taken).query(P, k=1)
        free &= d > r
    tree = cKDTree(P)
    out = []
    for i in range(len(P)):
        if free[i]:
            out.append(i)
            free[tree.query_ball_point(P[i], r)] = False
    return out


def densify(lift: Lift, samples: SolveResult, cfg: VerifyConfig,
            jitters: int = 6) -> tuple[np.ndarray, np.ndarray]:
    """Grow the accepted part of a variety sample outward from its sparse parts.

    Each round takes the new points not yet covered by an explored ``eps/2``
    ball, perturbs every net center by that radius in a few random directions
    and projects the perturbed starts back onto the same variety piece.
    Rounds stop once nothing new is covered, after ``refine_rounds`` rounds,
    or at ``10 * n_samples`` points.  Returns points and their piece indices.
    """
    acc = samples.accepted
    pts = samples.points[acc]
    piece = (samples.piece[acc] if samples.piece is not None
             else np.zeros(len(pts), dtype=np.int64))
    if len(pts) == 0 or cfg.refine_rounds == 0:
        return pts, piece
    targets = variety_pieces(lift) if samples.piece is not None else [lift.circuit]
    extent = float(np.max(pts.max(axis=0) - pts.min(axis=0))) or 1.0
    r = 0.5 * cfg.eps_proximity * extent
    rng = np.random.default_rng([cfg.seed, 1])
    cap = 10 * max(cfg.n_samples, len(pts))
    explored = np.zeros((0, pts.shape[1]))
    front, front_piece = pts, piece
    for _ in range(cfg.refine_rounds):
        net = _greedy_net(front, r, explored)
        if not net or len(pts) >= cap:
            break
        centers = front[net]
        explored = np.vstack([explored, centers])
        d = rng.standard_normal((len(centers), jitters, pts.shape[1]))
        d *= r / np.linalg.norm(d, axis=2, keepdims=True)
        starts = (centers[:, None, :] + d).reshape(-1, pts.shape[1])
        sp = np.repeat(front_piece[net], jitters)
        res = _solve_pieces(lift, starts, sp, targets, cfg)
        front, front_piece = res.points[res.accepted], sp[res.accepted]
        pts = np.vstack([pts, front])
        piece = np.concatenate([piece, front_piece])
    return pts, piece


def estimate_components(lift: Lift, cfg: VerifyConfig | None = None,
                        samples: SolveResult | None = None) -> ComponentEstimate:
    """Count connected components among solver-accepted variety points.

    The random-start sample is first grown with :func:`densify`.  The result
    is a lower-bound style estimate: it only sees components the starts reach
    inside the boxes, and is reliable only for small lifts.
    """
    cfg = cfg or VerifyConfig()
    samples = samples if samples is not None else sample_variety(lift, cfg)
    if not samples.accepted.any():
        return ComponentEstimate(0, [], 0, "no solver start reached the variety",
                                 samples.points[samples.accepted])
    pts, _ = densify(lift, samples, cfg)
    labels = components_from_points(pts, cfg.eps_proximity)
    reps = []
    for c in range(int(labels.max()) + 1):
        reps.append([float(v) for v in pts[np.argmax(labels == c)]])
    return ComponentEstimate(int(labels.max()) + 1, reps, len(pts), None, pts)


# ---------------------------------------------------------------------------
# projection check

FAILURE_CAP = 100


@dataclass
class VerifyReport:
    config: dict
    counts: dict
    component_estimate: int
    solver: dict
    grid_status: str
    failures: list
    warnings: list
    caveat: str = NONCOMPACT_CAVEAT

    @property
    def examined(self) -> int:
        return sum(self.counts.values())

    @property
    def passed(self) -> bool:
        return self.counts["in_set_witness_failed"] == 0 and self.counts["sound_misses"] == 0

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "counts": self.counts,
            "examined": self.examined,
            "component_estimate": self.component_estimate,
            "solver": self.solver,
            "passed": self.passed,
            "warnings": self.warnings,
            "caveat": self.caveat,
            "grid_status": self.grid_status,
            "failures": self.failures,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def exit_status(report: VerifyReport) -> int:
    """0 all passes, 1 failures, 2 warnings only."""
    if not report.passed:
        return 1
    return 2 if report.warnings else 0


def _fmt(v) -> str:
    return str(v) if isinstance(v, Fraction) else repr(float(v))


def _witness_residuals(lift: Lift, xs: list, auxes: list) -> list[float]:
    """``|P|`` at each lifted point, exact where every coordinate is rational."""
    out: list = [None] * len(xs)
    float_rows, float_idx = [], []
    env_names = lift.var_names
    for i, (x, a) in enumerate(zip(xs, auxes)):
        if all(isinstance(v, Fraction) for v in a):
            env = dict(zip(env_names, list(x) + list(a)))
            out[i] = abs(lift.circuit.eval_exact(env))
        else:
            float_rows.append([float(v) for v in list(x) + list(a)])
            float_idx.append(i)
    if float_rows:
        cols = {v: j for j, v in enumerate(env_names)}
        vals = np.abs(lift.circuit.value(np.array(float_rows), cols))
        for i, v in zip(float_idx, vals):
            out[i] = float(v)
    return out


def _search_witnesses(lift: Lift, xs: list, cfg: VerifyConfig, restarts: int = 16):
    """Numerical witness search for lifts without a witness program."""
    m, k = lift.base_dim, lift.aux_dim
    found: list = [None] * len(xs)
    if not xs:
        return found
    rng = np.random.default_rng([cfg.seed, 1])
    base = np.array([[float(v) for v in x] for x in xs]).reshape(len(xs), m)
    for _ in range(restarts):
        todo = [i for i, f in enumerate(found) if f is None]
        if not todo:
            break
        aux = cfg.aux_box[0] + (cfg.aux_box[1] - cfg.aux_box[0]) * rng.random((len(todo), k))
        starts = np.hstack([base[todo], aux])
        r = solve_batch(lift, starts, cfg, free=range(m, m + k))
        for j, i in enumerate(todo):
            if r.accepted[j]:
                found[i] = tuple(r.points[j, m:])
    return found


def check_projection(f: Formula, lift: Lift, cfg: VerifyConfig | None = None,
                     samples: SolveResult | None = None) -> VerifyReport:
    """Compare the set described by ``f`` with the projection of ``lift``."""
    cfg = cfg or VerifyConfig()
    m = f.base_dim
    if lift.base_dim != m:
        raise ValueError(f"formula has base dimension {m} but lift has {lift.base_dim}")
    box = cfg.resolved_box(m)
    counts = {
        "in_set_witnessed": 0,
        "in_set_witness_failed": 0,
        "sound_hits": 0,
        "sound_misses": 0,
        "boundary_skipped": 0,
    }
    failures: list = []
    warnings: list = []

    def fail(entry):
        if len(failures) < FAILURE_CAP:
            failures.append(entry)

    # completeness
    grid = grid_points(box, cfg.grid_res)
    inside = [eval_point(f, x) for x in grid]
    status = ["."] * len(grid)
    xs = [x for x, ok in zip(grid, inside) if ok]
    gidx = [i for i, ok in enumerate(inside) if ok]
    auxes, reasons, search = [], [], []
    for i, x in enumerate(xs):
        try:
            auxes.append(synth_witness(lift, x))
            reasons.append(None)
        except NoWitnessProgram:
            auxes.append(None)
            reasons.append("numerical witness search failed")
            search.append(i)
        except (WitnessUndefinedError, ZeroDivisionError, ValueError) as exc:
            auxes.append(None)
            reasons.append(str(exc))
    for i, a in zip(search, _search_witnesses(lift, [xs[i] for i in search], cfg)):
        auxes[i] = a
    have = [i for i, a in enumerate(auxes) if a is not None]
    resid = _witness_residuals(lift, [xs[i] for i in have], [auxes[i] for i in have])
    residual = dict(zip(have, resid))
    for i, x in enumerate(xs):
        r = residual.get(i)
        if r is not None and r <= cfg.delta_variety:
            counts["in_set_witnessed"] += 1
            status[gidx[i]] = "W"
        else:
            counts["in_set_witness_failed"] += 1
            status[gidx[i]] = "F"
            fail({
                "kind": "witness_failed",
                "point": [_fmt(v) for v in x],
                "detail": reasons[i] if r is None else f"|P| = {float(r):.3e}",
            })

    # soundness
    if samples is None:
        samples = sample_variety(lift, cfg)
    acc = samples.points[samples.accepted]
    nnf = to_nnf(f)
    B = acc[:, :m]
    if len(acc):
        tight = eval_float_batch(nnf, B, cfg.tau_membership)
        wide = eval_float_batch(nnf, B, cfg.eps_boundary)
        hit = tight == Tri.TRUE
        skip = ~hit & (wide != Tri.FALSE)
        miss = ~hit & ~skip
        counts["sound_hits"] = int(hit.sum())
        counts["boundary_skipped"] = int(skip.sum())
        counts["sound_misses"] = int(miss.sum())
        res_acc = samples.residual[samples.accepted]
        for j in np.flatnonzero(miss):
            fail({
                "kind": "sound_miss",
                "point": [repr(float(v)) for v in acc[j]],
                "detail": f"|P| = {res_acc[j]:.3e}",
            })
    comps = estimate_components(lift, cfg, samples)
    if comps.warning:
        warnings.append(comps.warning)
    return VerifyReport(
        config=cfg.to_dict(),
        counts=counts,
        component_estimate=comps.count,
        solver={
            "starts": int(samples.points.shape[0]),
            "accepted": int(samples.accepted.sum()),
            "rejected": int((~samples.accepted).sum()),
            "max_iterations": int(samples.iterations.max()) if samples.iterations.size else 0,
        },
        grid_status="".join(status),
        failures=failures,
        warnings=warnings,
    )
