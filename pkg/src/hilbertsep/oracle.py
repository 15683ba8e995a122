"""Slow, independent checks used by the tests and the ``verify`` command.

Nothing in here is used during training. The oracles share only the
distance and ball primitives of :mod:`hilbertsep.geometry` with the
training code; in particular none of them goes through the separability LP.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from hilbertsep import geometry as geo
from hilbertsep import kernels
from hilbertsep.errors import (
    DimensionNot2, HyperplaneMissesDomain, NotSeparable, PointOnHyperplane,
)
from hilbertsep.lp import LinearProgram, Sense, Status, solve

GOLDEN = (np.sqrt(5.0) - 1) / 2


def _as_hyperplane(K):
    if isinstance(K, geo.Hyperplane):
        return K
    w, c = K
    return geo.Hyperplane(w, c)


def _slice_center(domain, K):
    """Chebyshev-style centre of ``K`` intersected with the domain, and its slack."""
    m, d = domain.W.shape
    norms = np.linalg.norm(domain.W, axis=1)
    A = np.vstack([np.hstack([domain.W, -norms[:, None]]), np.append(K.w, 0.0)])
    obj = np.zeros(d + 1)
    obj[-1] = 1.0
    rel = [">="] * m + ["="]
    rhs = np.append(-domain.c, -K.c)
    res = solve(LinearProgram(obj, A, rel, rhs, -np.inf, np.inf, Sense.MAXIMIZE))
    if res.status is not Status.OPTIMAL or res.x[-1] <= geo.TOL_INTERIOR:
        raise HyperplaneMissesDomain("hyperplane does not cross the interior of the domain")
    return res.x[:d], float(res.x[-1])


def _ball_meets_plane(domain, K, p, r, metric):
    ball = geo.metric_ball(domain, p, r, metric)
    A = np.vstack([ball.A, domain.W, K.w[None, :]])
    rhs = np.concatenate([-ball.b, -domain.c, [-K.c]])
    rel = [">="] * (len(A) - 1) + ["="]
    lp = LinearProgram(np.zeros(domain.dimension), A, rel, rhs, -np.inf, np.inf,
                       Sense.FEASIBILITY)
    return solve(lp).status is Status.OPTIMAL


def point_hyperplane_distance(domain, K, p, tol=1e-6, metric=geo.HILBERT, method="lp"):
    """Distance from ``p`` to the nearest point of hyperplane ``K`` inside the domain.

    ``method="lp"`` bisects on the radius, testing at each probe whether the
    ball around ``p`` meets ``K`` (an LP), and returns the lower end of the
    final bracket, i.e. a radius certified not to reach ``K``.
    ``method="segment"`` (planar domains only) minimises the distance along
    the segment ``K`` cuts out of the domain by golden-section search; the
    distance is quasiconvex along any line because balls are convex.
    """
    K = _as_hyperplane(K)
    p = geo.clearance_vector(domain, p)
    if abs(K(p.coords)) / np.linalg.norm(K.w) <= geo.TOL_INTERIOR:
        raise PointOnHyperplane("the point lies on the hyperplane")
    x0, _ = _slice_center(domain, K)
    if method == "segment":
        if domain.dimension != 2:
            raise DimensionNot2("segment method needs a planar domain")
        return float(segment_distances(domain, p.coords[None, :], K.w[None, :],
                                       np.array([K.c]), metric)[0, 0])
    if method != "lp":
        raise ValueError(f"unknown method {method!r}")

    # upper seed: best sampled point of the slice along x0 -> projection of p
    proj = p.coords - K(p.coords) / (K.w @ K.w) * K.w
    u = proj - x0
    samples = [x0]
    if np.linalg.norm(u) > geo.TOL_COINCIDE:
        slope = domain.W @ u
        clear0 = domain.clearances(x0)
        with np.errstate(divide="ignore"):
            t = np.where(slope < 0, -clear0 / slope, np.inf)
        t_max = min(1.0, float(t.min()))
        samples += [x0 + s * u for s in np.linspace(0, t_max, 34)[1:-1]]
    hi = min(geo.distance(domain, p, x, metric) for x in samples
             if np.all(domain.clearances(x) > geo.TOL_INTERIOR))
    lo = 0.0
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if _ball_meets_plane(domain, K, p, mid, metric):
            hi = mid
        else:
            lo = mid
    return lo


def _slice_segments(domain, W, C):
    """Endpoints of the chords cut by lines ``W x + C = 0`` (planar domain)."""
    nrm2 = np.sum(W ** 2, axis=1)
    x0 = -(C / nrm2)[:, None] * W
    u = np.stack([-W[:, 1], W[:, 0]], axis=1)
    clear = x0 @ domain.W.T + domain.c
    slope = u @ domain.W.T
    with np.errstate(divide="ignore", invalid="ignore"):
        t = -clear / slope
    t_hi = np.where(slope < -geo.TOL_PARALLEL, t, np.inf).min(axis=1)
    t_lo = np.where(slope > geo.TOL_PARALLEL, t, -np.inf).max(axis=1)
    parallel_bad = np.any((np.abs(slope) <= geo.TOL_PARALLEL) & (clear <= 0), axis=1)
    valid = (t_hi > t_lo) & ~parallel_bad
    return x0, u, t_lo, t_hi, valid


def segment_distances(domain, P, W, C, metric=geo.HILBERT, iterations=80):
    """Distances from every point ``P[i]`` to every line ``W[l] x + C[l] = 0``.

    Returns an array of shape (lines, points); lines missing the interior get
    ``inf``.
    """
    if domain.dimension != 2:
        raise DimensionNot2("segment distances need a planar domain")
    P = np.atleast_2d(P)
    W = np.atleast_2d(W)
    C = np.asarray(C, dtype=float).reshape(-1)
    x0, u, t_lo, t_hi, valid = _slice_segments(domain, W, C)
    L, n, m = len(W), len(P), domain.n_facets
    out = np.full((L, n), np.inf)
    if not valid.any():
        return out
    x0, u, t_lo, t_hi = x0[valid], u[valid], t_lo[valid], t_hi[valid]
    Lv = len(x0)
    pad = 1e-12 * (t_hi - t_lo)
    a = np.repeat((t_lo + pad)[:, None], n, axis=1)
    b = np.repeat((t_hi - pad)[:, None], n, axis=1)
    Pcl = np.broadcast_to(domain.clearances(P)[None, :, :], (Lv, n, m)).reshape(-1, m)
    base = (x0 @ domain.W.T + domain.c)[:, None, :]
    rate = (u @ domain.W.T)[:, None, :]

    def f(t):
        Xcl = (base + t[:, :, None] * rate).reshape(-1, m)
        bad = ~np.all(Xcl > 0, axis=1)
        Xcl = np.where(bad[:, None], 1.0, Xcl)
        hi, lo = kernels.log_ratio_extrema(Pcl, Xcl)
        val = (hi - lo) / 2 if metric == geo.HILBERT else hi
        val = np.where(bad, np.inf, val)
        return val.reshape(Lv, n)

    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iterations):
        left = fc <= fd
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        new_c = np.where(left, b - GOLDEN * (b - a), d)
        new_d = np.where(left, c, a + GOLDEN * (b - a))
        probe = np.where(left, new_c, new_d)
        fp = f(probe)
        fc, fd = np.where(left, fp, fd), np.where(left, fc, fp)
        c, d = new_c, new_d
    out[valid] = np.minimum(fc, fd)
    return out


@dataclass
class MarginSearch:
    """Best separating line found by :func:`brute_force_margin_2d`.

    ``resolution`` is the largest change in margin between the best line and
    its neighbours on the finest grid, a practical accuracy estimate.
    Unpacks as ``(w, c, margin)``.
    """

    w: np.ndarray
    c: float
    margin: float
    resolution: float
    lines_evaluated: int = 0
    history: list = field(default_factory=list, repr=False)

    def __iter__(self):
        return iter((self.w, self.c, self.margin))


def _line_margins(domain, dataset, theta, offset, metric):
    W = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    C = -offset
    vals = dataset.points @ W.T + C[None, :]  # (n, L)
    s = dataset.labels[:, None]
    fwd = np.all(s * vals > 0, axis=0)
    bwd = np.all(s * vals < 0, axis=0)
    sep = fwd | bwd
    margins = np.full(len(theta), -np.inf)
    if sep.any():
        D = segment_distances(domain, dataset.points, W[sep], C[sep], metric)
        margins[sep] = D.min(axis=1)
    orient = np.where(bwd, -1.0, 1.0)
    return margins, W * orient[:, None], C * orient


def brute_force_margin_2d(domain, dataset, angle_steps=180, offset_steps=200,
                          metric=geo.HILBERT, refine=3, refine_steps=21):
    """Exhaustive search over separating lines for the largest margin (d = 2).

    Lines ``cos(a) x + sin(a) y = o`` are scanned with ``a`` on ``angle_steps``
    points of [0, pi) and ``o`` on ``offset_steps`` cell midpoints of the
    domain's extent along that normal, so the coarse grid spacing is
    ``pi / angle_steps`` in angle and ``width / offset_steps`` in offset.
    Each of ``refine`` rounds then rescans a ``refine_steps``-square grid of
    two coarse cells around the incumbent, shrinking the spacing by a factor
    ``(refine_steps - 1) / 2`` each time.
    """
    if domain.dimension != 2:
        raise DimensionNot2("brute-force margin search is planar only")
    verts = geo.polygon_vertices(domain.W, domain.c)
    theta = np.repeat(np.arange(angle_steps) * np.pi / angle_steps, offset_steps)
    dirs = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    proj = verts @ dirs.T
    smin, smax = proj.min(axis=0), proj.max(axis=0)
    frac = (np.tile(np.arange(offset_steps), angle_steps) + 0.5) / offset_steps
    offset = smin + frac * (smax - smin)
    margins, W, C = _line_margins(domain, dataset, theta, offset, metric)
    evaluated = len(theta)
    if not np.isfinite(margins).any():
        raise NotSeparable("no separating line on the search grid")
    k = int(np.argmax(margins))
    best = (margins[k], theta[k], offset[k], W[k], C[k])
    d_theta = np.pi / angle_steps
    d_off = float(np.max(smax - smin)) / offset_steps
    history = [float(best[0])]
    resolution = float("nan")
    for _ in range(refine):
        g = np.linspace(-1.0, 1.0, refine_steps)
        tt = best[1] + np.repeat(g * d_theta, refine_steps)
        oo = best[2] + np.tile(g * d_off, refine_steps)
        mm, WW, CC = _line_margins(domain, dataset, tt, oo, metric)
        evaluated += len(tt)
        k = int(np.argmax(mm))
        if mm[k] > best[0]:
            best = (mm[k], tt[k], oo[k], WW[k], CC[k])
        d_theta *= 2.0 / (refine_steps - 1)
        d_off *= 2.0 / (refine_steps - 1)
        history.append(float(best[0]))
    # neighbourhood spread at the finest spacing
    g = np.array([-1.0, 0.0, 1.0])
    tt = best[1] + np.repeat(g * d_theta, 3)
    oo = best[2] + np.tile(g * d_off, 3)
    mm, _, _ = _line_margins(domain, dataset, tt, oo, metric)
    finite = mm[np.isfinite(mm)]
    resolution = float(np.max(np.abs(finite - best[0]))) if finite.size else float(best[0])
    return MarginSearch(best[3], float(best[4]), float(best[0]), resolution, evaluated, history)


@dataclass
class MembershipReport:
    samples: int
    inside: int
    violations: int
    max_excess: float
    examples: list = field(default_factory=list)

    @property
    def ok(self):
        return self.violations == 0


def sample_interior(domain, count, rng):
    """Uniform samples from the domain by rejection from its bounding box."""
    lo, hi = domain.bbox
    out = []
    need = count
    drawn, kept = 0, 0
    while need > 0:
        # size batches by the acceptance rate seen so far; thin domains reject most draws
        rate = (kept + 1) / (drawn + 1)
        batch = int(min(max(2 * need / rate, 64), 200_000))
        X = rng.uniform(lo, hi, size=(batch, domain.dimension))
        X = X[domain.contains_interior(X)]
        drawn, kept = drawn + batch, kept + len(X)
        out.append(X[:need])
        need -= len(out[-1])
    return np.vstack(out)


def ball_membership_oracle(domain, p, r, samples=10_000, kind=geo.HILBERT, seed=0,
                           near_boundary=0.5, band=geo.TOL_FEAS):
    """Compare ball membership with direct distance evaluation on random points.

    A fraction ``near_boundary`` of the samples is placed within a relative
    1e-3 of the ball's boundary along random rays from ``p``. Membership is
    tested without slack, since a slack on the rows is not a distance. A
    violation is a sample where the two tests disagree and the distance is
    more than ``band`` away from ``r``.
    """
    rng = np.random.default_rng(seed)
    p = geo.clearance_vector(domain, p)
    ball = geo.metric_ball(domain, p, r, kind)
    n_near = int(round(samples * near_boundary)) if r > 0 else 0
    X = [sample_interior(domain, samples - n_near, rng)]
    if n_near:
        U = rng.normal(size=(n_near, domain.dimension))
        U /= np.linalg.norm(U, axis=1, keepdims=True)
        slope = U @ ball.A.T
        val = ball.A @ p.coords + ball.b
        with np.errstate(divide="ignore"):
            s = np.where(slope < 0, val[None, :] / -slope, np.inf).min(axis=1)
        s = s * (1 + rng.uniform(-1e-3, 1e-3, size=n_near))
        Y = p.coords + s[:, None] * U
        X.append(Y[domain.contains_interior(Y)])
    X = np.vstack(X)
    inside = geo.ball_contains(ball, X, tol=0.0)
    dist = geo.distances(domain, np.broadcast_to(p.coords, X.shape), X, kind)
    bad = (inside != (dist <= r)) & (np.abs(dist - r) > band)
    excess = np.abs(dist - r)[bad]
    examples = [(X[i].tolist(), float(dist[i]), bool(inside[i])) for i in np.flatnonzero(bad)[:5]]
    return MembershipReport(len(X), int(inside.sum()), int(bad.sum()),
                            float(excess.max()) if excess.size else 0.0, examples)


@dataclass
class MarginCertificate:
    distances: np.ndarray
    claimed: float
    tol: float

    @property
    def passed(self):
        return self.distances >= self.claimed - self.tol

    @property
    def ok(self):
        return bool(np.all(self.passed))


def certify_margin(domain, dataset, w, c, claimed, metric=geo.HILBERT, tol=1e-6, method="lp"):
    """Oracle distance of every training point to ``(w, c)`` against ``claimed``."""
    K = geo.Hyperplane(w, c)
    dist = np.array([point_hyperplane_distance(domain, K, x, tol=tol * 0.1, metric=metric,
                                               method=method)
                     for x in dataset.points])
    return MarginCertificate(dist, float(claimed), tol)
