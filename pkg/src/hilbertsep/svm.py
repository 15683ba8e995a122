"""Hard- and soft-margin hyperplane separators in Hilbert and Funk geometry.

For a radius ``r`` the two classes are separable with margin ``r`` exactly
when the radius-``r`` balls around the positive points lie on one side of a
hyperplane ``(w, c)`` and those around the negative points on the other.
Writing ball ``i`` as ``A_i x + b_i >= 0`` and ``s_i`` for its label, LP
duality turns "the whole ball is on side ``s_i`` of the plane" into the
existence of ``y_i >= 0`` with ``A_i^T y_i = s_i w`` and
``b_i @ y_i <= s_i c``: the plane, oriented towards the ball, is a conical
combination of the ball's facets. A single LP then decides separability for
all balls at once.

Hard-margin training bisects over the radius grid ``eps, 2 eps, ...``;
soft-margin training scans the whole grid, adds per-point slacks, and picks
the radius maximising ``r - C * Xi_r / n``.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from hilbertsep import geometry as geo
from hilbertsep.errors import DimensionMismatch, EmptyClass, NotSeparable
from hilbertsep.lp import LinearProgram, Sense, Status, solve

LN2 = math.log(2.0)
BOUNDARY_TOL = 1e-12
STRICT_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """Interior points with labels in {+1, -1}."""

    points: np.ndarray
    labels: np.ndarray
    clearances: np.ndarray

    @property
    def n(self):
        return len(self.labels)

    @property
    def dimension(self):
        return self.points.shape[1]

    @property
    def positive(self):
        return np.flatnonzero(self.labels > 0)

    @property
    def negative(self):
        return np.flatnonzero(self.labels < 0)

    def subset(self, index):
        index = np.asarray(index)
        return LabeledDataset(self.points[index], self.labels[index], self.clearances[index])


def make_dataset(domain, points, labels) -> LabeledDataset:
    points = np.atleast_2d(np.asarray(points, dtype=float))
    labels = np.asarray(labels).reshape(-1)
    if len(points) != len(labels):
        raise ValueError("points and labels differ in length")
    if not np.isin(labels, (1, -1)).all():
        raise ValueError("labels must be +1 or -1")
    labels = labels.astype(int)
    if not (labels > 0).any() or not (labels < 0).any():
        raise EmptyClass("both classes need at least one point")
    cl = geo._clearance_matrix(domain, points)
    return LabeledDataset(geo._frozen(points), labels, geo._frozen(cl))


@dataclass
class SeparatorModel:
    """A trained hyperplane ``w @ x + c``; positive side means label +1.

    ``margin`` is the certified radius for hard models and the selected grid
    radius for soft ones.
    """

    w: np.ndarray
    c: float
    metric: str
    kind: str
    margin: float
    xi: np.ndarray | None = None
    Xi: float | None = None
    C: float | None = None
    info: dict = field(default_factory=dict, repr=False)

    def to_dict(self):
        out = {"metric": self.metric, "kind": self.kind, "w": [float(v) for v in self.w],
               "c": float(self.c), "margin": float(self.margin)}
        if self.kind == "soft":
            out["xi"] = [float(v) for v in self.xi]
            out["C"] = float(self.C)
            out["Xi"] = float(self.Xi)
        return out

    @classmethod
    def from_dict(cls, data):
        xi = data.get("xi")
        return cls(np.asarray(data["w"], dtype=float), float(data["c"]), data["metric"],
                   data["kind"], float(data["margin"]),
                   None if xi is None else np.asarray(xi, dtype=float),
                   data.get("Xi"), data.get("C"))


@dataclass(frozen=True)
class SearchGrid:
    """Radii ``eps, 2 eps, ..., ceil(M / eps) eps``."""

    epsilon: float
    upper: float

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if not self.upper >= 0:
            raise ValueError("upper bound must be nonnegative")

    @property
    def size(self):
        return int(math.ceil(self.upper / self.epsilon))

    def radius(self, t):
        return t * self.epsilon

    @property
    def radii(self):
        return np.arange(1, self.size + 1) * self.epsilon


class Classification(NamedTuple):
    label: int
    boundary: bool


@dataclass
class SeparabilityResult:
    """Solution of one separability LP, with its dual certificate blocks."""

    feasible: bool
    w: np.ndarray | None = None
    c: float | None = None
    y: list | None = None
    xi: np.ndarray | None = None
    objective: float | None = None
    normalization: tuple | None = None
    A: list | None = None
    b: list | None = None


# --- bounds and weights --------------------------------------------------------


def margin_upper_bound(domain, dataset, mode="data", bits=64, metric=geo.HILBERT) -> float:
    """Upper bound on the achievable margin.

    ``mode="data"``: for Hilbert, half the smallest cross-class distance (a
    separating plane meets every segment between the classes, and the two
    distances to it sum to at most the segment length). For Funk the bound is
    the smallest cross-class ``min(d_F(p, q), d_F(q, p))``, since the Funk
    distance grows monotonically along the segment towards the plane.

    ``mode="bits"``: the input-size bound ``(8 B + 4 log2 d) ln 2``.
    """
    pos, neg = dataset.positive, dataset.negative
    if pos.size == 0 or neg.size == 0:
        raise EmptyClass("both classes need at least one point")
    if mode == "bits":
        return (8 * bits + 4 * math.log2(domain.dimension)) * LN2
    if mode != "data":
        raise ValueError(f"unknown mode {mode!r}")
    P = dataset.points[np.repeat(pos, neg.size)]
    Q = dataset.points[np.tile(neg, pos.size)]
    if metric == geo.HILBERT:
        return float(np.min(geo.distances(domain, P, Q, geo.HILBERT)) / 2)
    if metric == geo.FUNK:
        fwd = geo.distances(domain, P, Q, geo.FUNK)
        bwd = geo.distances(domain, Q, P, geo.FUNK)
        return float(np.min(np.minimum(fwd, bwd)))
    raise ValueError(f"unknown metric {metric!r}")


def point_weights(domain, dataset) -> np.ndarray:
    """Inverse Euclidean distance from each point to the nearest facet."""
    points = dataset.points if isinstance(dataset, LabeledDataset) else np.atleast_2d(dataset)
    cl = geo._clearance_matrix(domain, points)
    dist = cl / np.linalg.norm(domain.W, axis=1)
    return 1.0 / dist.min(axis=1)


# --- LP assembly -------------------------------------------------------------


def normalizations(d, mode="two"):
    """Normalisation rows ``(a, s)`` meaning ``a @ w = s``, in trial order."""
    ones = np.ones(d)
    out = [(ones, 1.0), (ones, -1.0)]
    if mode == "exhaustive":
        for j in range(d):
            e = np.zeros(d)
            e[j] = 1.0
            out += [(e, 1.0), (e, -1.0)]
    elif mode != "two":
        raise ValueError(f"unknown normalization mode {mode!r}")
    return out


def ball_systems(domain, dataset, r, metric):
    """Per-point ball constraints ``(A_i, b_i)`` with rows scaled to unit length.

    The scaling is positive per row, so each system describes the same ball
    as :func:`geometry.metric_ball`; it only keeps the LP columns balanced.
    """
    A_list, b_list = [], []
    for x, cl in zip(dataset.points, dataset.clearances):
        ball = geo.metric_ball(domain, geo.InteriorPoint(x, cl), r, metric)
        s = np.sqrt(np.sum(ball.A ** 2, axis=1) + ball.b ** 2)
        A_list.append(ball.A / s[:, None])
        b_list.append(ball.b / s)
    return A_list, b_list


def _assemble(dataset, A_list, b_list, norm, soft, weights, strict=False):
    n, d = dataset.n, dataset.dimension
    K = A_list[0].shape[0]
    n_xi = n if soft else 0
    y0 = d + 1 + n_xi
    nv = y0 + n * K + strict
    rows = n + n * d + 1
    A = np.zeros((rows, nv))
    rel = np.empty(rows, dtype=object)
    rhs = np.zeros(rows)
    for i in range(n):
        ys = slice(y0 + i * K, y0 + (i + 1) * K)
        sign = float(dataset.labels[i])
        A[i, ys] = b_list[i]
        A[i, d] = -sign
        if soft:
            A[i, d + 1 + i] = -1.0
        if strict:
            A[i, -1] = 1.0
        rel[i] = "<="
        blk = slice(n + i * d, n + (i + 1) * d)
        A[blk, ys] = A_list[i].T
        A[blk, :d] = -sign * np.eye(d)
        rel[blk] = "="
    a, s = norm
    A[-1, :d] = a
    rel[-1] = "="
    rhs[-1] = s
    lower = np.zeros(nv)
    lower[:d + 1] = -np.inf
    upper = np.full(nv, np.inf)
    obj = np.zeros(nv)
    if soft:
        obj[d + 1:d + 1 + n] = weights
    names = ([f"w{j}" for j in range(d)] + ["c"] + [f"xi{i}" for i in range(n_xi)]
             + [f"y{i}_{t}" for i in range(n) for t in range(K)])
    sense = Sense.MINIMIZE if soft else Sense.FEASIBILITY
    if strict:
        # maximise a common gap delta in [0, 1] between every point and the plane
        upper[-1] = 1.0
        obj[-1] = 1.0
        names.append("delta")
        sense = Sense.MAXIMIZE
    return LinearProgram(obj, A, list(rel), rhs, lower, upper, sense, tuple(names))


def build_separability_lp(domain, dataset, r, metric=geo.HILBERT, normalization=1.0,
                          soft=False, weights=None, strict=False) -> LinearProgram:
    """Separability LP at radius ``r``.

    Variables are ordered ``w`` (d, free), ``c`` (free), then ``xi`` (n, soft
    only), then one block ``y_i`` per point. Rows are the n class rows
    ``b_i @ y_i - s_i c (- xi_i) <= 0``, the n*d certificate rows
    ``A_i^T y_i - s_i w = 0`` and the normalisation row. ``normalization`` is ``+1`` or
    ``-1`` for ``sum(w) = +-1``, or an explicit ``(a, s)`` pair.

    ``strict=True`` appends a gap variable ``delta`` in [0, 1] to every class
    row and maximises it; points (zero-radius balls) are strictly separable
    iff the optimum is positive.
    """
    if np.ndim(normalization) == 0:
        normalization = (np.ones(dataset.dimension), float(normalization))
    A_list, b_list = ball_systems(domain, dataset, r, metric)
    if soft and weights is None:
        weights = point_weights(domain, dataset)
    return _assemble(dataset, A_list, b_list, normalization, soft, weights, strict)


def _unpack(dataset, sol, K, soft):
    n, d = dataset.n, dataset.dimension
    x = sol.x
    y0 = d + 1 + (n if soft else 0)
    ys = [x[y0 + i * K:y0 + (i + 1) * K] for i in range(n)]
    xi = x[d + 1:d + 1 + n] if soft else None
    return x[:d].copy(), float(x[d]), ys, xi


def solve_separability(domain, dataset, r, metric=geo.HILBERT, mode="two", soft=False,
                       weights=None) -> SeparabilityResult:
    """Solve the separability LP at radius ``r``.

    Hard: normalisations are tried in order and the first feasible one wins.
    At ``r = 0`` the balls are the points themselves and a plane through
    points of both classes would pass the weak test, so hard mode then asks
    for a strictly positive gap instead.
    Soft: every normalisation is solved and the smallest weighted slack kept.
    """
    A_list, b_list = ball_systems(domain, dataset, r, metric)
    K = A_list[0].shape[0]
    if soft and weights is None:
        weights = point_weights(domain, dataset)
    strict = not soft and r == 0
    best = SeparabilityResult(False, A=A_list, b=b_list)
    for norm in normalizations(dataset.dimension, mode):
        lp = _assemble(dataset, A_list, b_list, norm, soft, weights, strict)
        sol = solve(lp)
        if sol.status is not Status.OPTIMAL:
            continue
        if strict and sol.x[-1] <= STRICT_TOL:
            continue
        w, c, ys, xi = _unpack(dataset, sol, K, soft)
        obj = float(weights @ xi) if soft else 0.0
        if best.feasible and obj >= best.objective:
            continue
        best = SeparabilityResult(True, w, c, ys, xi, obj, (norm[0].tolist(), norm[1]),
                                  A_list, b_list)
        if not soft:
            break
    return best


def separable_at(domain, dataset, r, metric=geo.HILBERT, mode="two"):
    """``(separable, (w, c) or None)`` for radius ``r``."""
    res = solve_separability(domain, dataset, r, metric, mode)
    return res.feasible, ((res.w, res.c) if res.feasible else None)


def certificate_residuals(result: SeparabilityResult, labels):
    """Largest ``|A_i^T y_i - s_i w|`` entry and smallest ``y`` entry over all points."""
    eq = max(float(np.max(np.abs(A.T @ y - s * result.w)))
             for A, y, s in zip(result.A, result.y, labels))
    low = min(float(np.min(y)) for y in result.y)
    return eq, low


# --- training ------------------------------------------------------------------


def _min_clearance(w, c, points):
    return float(np.min(np.abs(points @ w + c)) / np.linalg.norm(w))


def train_hard(domain, dataset, epsilon, metric=geo.HILBERT, mode="two", polish=False,
               upper=None) -> SeparatorModel:
    """Maximum-margin separator to within ``epsilon``.

    Feasibility is monotone in the radius (balls nest), so integer bisection
    over the grid finds the largest feasible radius in at most
    ``ceil(log2(M / eps)) + 1`` LP probes after the zero-radius check.
    """
    ok0 = solve_separability(domain, dataset, 0.0, metric, mode)
    if not ok0.feasible:
        raise NotSeparable("the training points are not linearly separable; use soft margin")
    M = margin_upper_bound(domain, dataset, "data", metric=metric) if upper is None else upper
    grid = SearchGrid(epsilon, M)
    lo, hi = 0, grid.size + 1
    best = ok0
    probes = 0
    while hi - lo > 1:
        mid = (lo + hi) // 2
        res = solve_separability(domain, dataset, grid.radius(mid), metric, mode)
        probes += 1
        if res.feasible:
            lo, best = mid, res
        else:
            hi = mid
    r_star = grid.radius(lo)
    if polish and lo > 0:
        best = _polish(domain, dataset, r_star, metric, mode, best)
    info = {"probes": probes, "grid_size": grid.size, "upper_bound": M,
            "normalization": best.normalization, "certificate": best}
    return SeparatorModel(best.w, best.c, metric, "hard", r_star, info=info)


def _polish(domain, dataset, r, metric, mode, current):
    best, score = current, _min_clearance(current.w, current.c, dataset.points)
    A_list, b_list = current.A, current.b
    K = A_list[0].shape[0]
    for norm in normalizations(dataset.dimension, mode):
        sol = solve(_assemble(dataset, A_list, b_list, norm, False, None))
        if sol.status is not Status.OPTIMAL:
            continue
        w, c, ys, _ = _unpack(dataset, sol, K, False)
        s = _min_clearance(w, c, dataset.points)
        if s > score:
            best = SeparabilityResult(True, w, c, ys, None, 0.0, (norm[0].tolist(), norm[1]),
                                      A_list, b_list)
            score = s
    return best


def train_soft(domain, dataset, epsilon, C, metric=geo.HILBERT, mode="two", workers=1,
               upper=None) -> SeparatorModel:
    """Soft-margin separator chosen by a full scan of the radius grid."""
    if C < 0:
        raise ValueError("C must be nonnegative")
    M = margin_upper_bound(domain, dataset, "data", metric=metric) if upper is None else upper
    grid = SearchGrid(epsilon, M)
    radii = grid.radii if grid.size else np.array([epsilon])
    weights = point_weights(domain, dataset)

    def run(r):
        return solve_separability(domain, dataset, r, metric, mode, soft=True, weights=weights)

    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(run, radii))
    else:
        results = [run(r) for r in radii]

    n = dataset.n
    table = []
    best_t, best_score = None, -np.inf
    for t, (r, res) in enumerate(zip(radii, results)):
        if not res.feasible:  # cannot happen for bounded balls; skip defensively
            continue
        score = r - C * res.objective / n
        table.append((float(r), res.objective, float(score)))
        if score >= best_score:
            best_t, best_score = t, score
    res = results[best_t]
    info = {"scan": table, "score": best_score, "upper_bound": M,
            "normalization": res.normalization, "certificate": res}
    return SeparatorModel(res.w, res.c, metric, "soft", float(radii[best_t]), xi=res.xi,
                          Xi=res.objective, C=float(C), info=info)


def classify(model: SeparatorModel, x) -> Classification:
    """Sign of ``w @ x + c``; exact zeros are labelled +1 and flagged."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != model.w.size:
        raise DimensionMismatch(f"point has {x.shape[-1]} coordinates, model expects {model.w.size}")
    v = float(x @ model.w + model.c)
    if abs(v) <= BOUNDARY_TOL:
        return Classification(1, True)
    return Classification(1 if v > 0 else -1, False)


def predict(model: SeparatorModel, X):
    """Vectorised :func:`classify`: ``(labels, boundary_mask)``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != model.w.size:
        raise DimensionMismatch(f"points have {X.shape[1]} coordinates, model expects {model.w.size}")
    v = X @ model.w + model.c
    boundary = np.abs(v) <= BOUNDARY_TOL
    labels = np.where(boundary | (v > 0), 1, -1)
    return labels, boundary


__all__ = [
    "LabeledDataset", "make_dataset", "SeparatorModel", "SearchGrid", "Classification",
    "SeparabilityResult", "margin_upper_bound", "point_weights", "normalizations",
    "ball_systems", "build_separability_lp", "solve_separability", "separable_at",
    "certificate_residuals", "train_hard", "train_soft", "classify", "predict",
]
