"""Polytopal domains, Funk/Hilbert distances and their metric balls.

A domain is the closure of ``{x : w_i @ x + c_i > 0 for all i}``. The value
``w_i @ x + c_i`` is the *clearance* of ``x`` with respect to facet ``i``;
all distances here are logarithms of clearance ratios, either computed
along the chord through two points or facet-wise (Birkhoff's form).

Hyperplanes are kept at the scale they were given; every ratio used below is
invariant under per-facet rescaling.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from hilbertsep import kernels
from hilbertsep.errors import (
    CoincidentPoints, DimensionMismatch, EmptyInterior, ImageUnbounded,
    MalformedHyperplane, NegativeRadius, NotInterior, SingularMap, Unbounded,
)
from hilbertsep.lp import LinearProgram, Sense, Status, solve

TOL_INTERIOR = 1e-12
TOL_FEAS = 1e-9
TOL_EQUIV = 1e-9
TOL_COINCIDE = 1e-12
TOL_PARALLEL = 1e-14

FUNK = "funk"
HILBERT = "hilbert"
CHORD = "chord"
BIRKHOFF = "birkhoff"


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Hyperplane:
    """Affine functional ``x -> w @ x + c``; its positive side is ``> 0``."""

    w: np.ndarray
    c: float

    def __post_init__(self):
        w = _frozen(np.reshape(self.w, -1))
        c = float(self.c)
        if not (np.isfinite(w).all() and np.isfinite(c)):
            raise MalformedHyperplane("hyperplane has a non-finite entry")
        if not np.any(w):
            raise MalformedHyperplane("hyperplane normal is the zero vector")
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "c", c)

    @property
    def dimension(self):
        return self.w.size

    def __call__(self, x):
        return np.asarray(x, dtype=float) @ self.w + self.c


@dataclass(frozen=True, eq=False)
class Domain:
    """A validated bounded polytope with nonempty interior.

    Build it with :func:`validate_domain`; ``W`` (m x d) and ``c`` (m,) are
    the stacked facet functionals. ``center`` and ``inradius`` come from the
    Chebyshev-centre LP run during validation, ``bbox`` from the 2d
    coordinate LPs.
    """

    W: np.ndarray
    c: np.ndarray
    center: np.ndarray
    inradius: float
    bbox: tuple

    @property
    def dimension(self):
        return self.W.shape[1]

    @property
    def n_facets(self):
        return self.W.shape[0]

    @property
    def hyperplanes(self):
        return tuple(Hyperplane(w, c) for w, c in zip(self.W, self.c))

    def clearances(self, X):
        """Raw clearances of one point (d,) or many points (k, d)."""
        X = np.asarray(X, dtype=float)
        if X.shape[-1] != self.dimension:
            raise DimensionMismatch(
                f"point has {X.shape[-1]} coordinates, domain has dimension {self.dimension}")
        return X @ self.W.T + self.c

    def contains_interior(self, X):
        return np.all(self.clearances(X) > TOL_INTERIOR, axis=-1)

    def to_dict(self):
        return {"dimension": self.dimension,
                "hyperplanes": [{"w": w.tolist(), "c": float(c)} for w, c in zip(self.W, self.c)]}


@dataclass(frozen=True)
class InteriorPoint:
    coords: np.ndarray
    clearances: np.ndarray


@dataclass(frozen=True, eq=False)
class Ball:
    """Metric ball as the constraint system ``A @ x + b >= 0``."""

    kind: str
    center: InteriorPoint
    radius: float
    A: np.ndarray
    b: np.ndarray

    @property
    def n_rows(self):
        return self.A.shape[0]


def validate_domain(hyperplanes) -> Domain:
    """Check boundedness and full-dimensionality; return the :class:`Domain`.

    Accepts :class:`Hyperplane` objects or ``(w, c)`` pairs.
    """
    hps = [h if isinstance(h, Hyperplane) else Hyperplane(*h) for h in hyperplanes]
    if not hps:
        raise MalformedHyperplane("a domain needs at least one hyperplane")
    d = hps[0].dimension
    if any(h.dimension != d for h in hps):
        raise MalformedHyperplane("hyperplanes disagree in dimension")
    W = np.array([h.w for h in hps])
    c = np.array([h.c for h in hps])
    m = len(hps)
    if m < d + 1:
        raise Unbounded(f"{m} halfspaces cannot bound a region in dimension {d}")

    # coordinate extents: A x >= -c
    lo = np.full(d, -np.inf)
    hi = np.full(d, np.inf)
    for axis in range(d):
        for sense in (Sense.MINIMIZE, Sense.MAXIMIZE):
            obj = np.zeros(d)
            obj[axis] = 1.0
            res = solve(LinearProgram(obj, W, [">="] * m, -c, -np.inf, np.inf, sense))
            if res.status is Status.INFEASIBLE:
                raise EmptyInterior("the halfspaces have an empty intersection")
            if res.status is Status.UNBOUNDED:
                raise Unbounded(f"coordinate {axis} is unbounded over the domain")
            if sense is Sense.MINIMIZE:
                lo[axis] = res.objective_value
            else:
                hi[axis] = res.objective_value

    center, radius = _chebyshev_center(W, c)
    if radius <= TOL_INTERIOR:
        raise EmptyInterior(f"maximum inscribed slack is {radius:.3g}")
    return Domain(_frozen(W), _frozen(c), _frozen(center), float(radius),
                  (_frozen(lo), _frozen(hi)))


def _chebyshev_center(W, c):
    m, d = W.shape
    norms = np.linalg.norm(W, axis=1)
    A = np.hstack([W, -norms[:, None]])
    obj = np.zeros(d + 1)
    obj[-1] = 1.0
    res = solve(LinearProgram(obj, A, [">="] * m, -c, -np.inf, np.inf, Sense.MAXIMIZE))
    if res.status is not Status.OPTIMAL:
        raise EmptyInterior("could not find an interior point")
    return res.x[:d], float(res.x[-1])


def clearance_vector(domain: Domain, x) -> InteriorPoint:
    """Clearances of ``x``; raises :class:`NotInterior` on the boundary or outside."""
    if isinstance(x, InteriorPoint):
        return x
    x = np.asarray(x, dtype=float).reshape(-1)
    if not np.isfinite(x).all():
        raise NotInterior("point has a non-finite coordinate")
    cl = domain.clearances(x)
    bad = np.flatnonzero(~(cl > TOL_INTERIOR))
    if bad.size:
        i = int(bad[0])
        raise NotInterior(f"clearance {cl[i]:.6g} at facet {i} is not positive", facet=i)
    return InteriorPoint(_frozen(x), _frozen(cl))


def chord_endpoints(domain: Domain, p, q):
    """Endpoints of the chord through ``p`` and ``q``, ordered p', p, q, q'.

    Returns ``(p_prime, q_prime, facet_p, facet_q)``; the facet indices are
    the facets hit by the backward and forward rays (lowest index on ties).
    """
    p = clearance_vector(domain, p)
    q = clearance_vector(domain, q)
    u = q.coords - p.coords
    if np.linalg.norm(u) <= TOL_COINCIDE:
        raise CoincidentPoints("p and q coincide")
    slope = domain.W @ u
    with np.errstate(divide="ignore", invalid="ignore"):
        t = -p.clearances / slope
    fwd = slope < -TOL_PARALLEL
    bwd = slope > TOL_PARALLEL
    t_plus = np.where(fwd, t, np.inf)
    t_minus = np.where(bwd, t, -np.inf)
    facet_q = int(np.argmin(t_plus))
    facet_p = int(np.argmax(t_minus))
    q_prime = p.coords + t_plus[facet_q] * u
    p_prime = p.coords + t_minus[facet_p] * u
    return p_prime, q_prime, facet_p, facet_q


def funk_distance(domain: Domain, p, q, method=BIRKHOFF) -> float:
    """Funk distance from ``p`` to ``q``."""
    p = clearance_vector(domain, p)
    q = clearance_vector(domain, q)
    if method == CHORD:
        if np.linalg.norm(q.coords - p.coords) <= TOL_COINCIDE:
            return 0.0
        _, q_prime, _, _ = chord_endpoints(domain, p, q)
        return float(np.log(np.linalg.norm(p.coords - q_prime)
                            / np.linalg.norm(q.coords - q_prime)))
    if method == BIRKHOFF:
        return float(np.max(np.log(p.clearances) - np.log(q.clearances)))
    raise ValueError(f"unknown method {method!r}")


def reverse_funk_distance(domain: Domain, p, q, method=BIRKHOFF) -> float:
    return funk_distance(domain, q, p, method)


def hilbert_distance(domain: Domain, p, q, method=BIRKHOFF) -> float:
    """Hilbert distance: the mean of the Funk and reverse Funk distances."""
    return (funk_distance(domain, p, q, method) + reverse_funk_distance(domain, p, q, method)) / 2


def distance(domain: Domain, p, q, metric=HILBERT, method=BIRKHOFF) -> float:
    if metric == HILBERT:
        return hilbert_distance(domain, p, q, method)
    if metric == FUNK:
        return funk_distance(domain, p, q, method)
    if metric in ("rfunk", "reverse_funk"):
        return reverse_funk_distance(domain, p, q, method)
    raise ValueError(f"unknown metric {metric!r}")


def _clearance_matrix(domain, X):
    X = np.atleast_2d(np.asarray(X, dtype=float))
    cl = domain.clearances(X)
    bad = ~(cl > TOL_INTERIOR)
    if bad.any():
        row, col = np.argwhere(bad)[0]
        raise NotInterior(f"point {row} has clearance {cl[row, col]:.6g} at facet {col}",
                          facet=int(col))
    return cl


def distances(domain: Domain, P, Q, metric=HILBERT) -> np.ndarray:
    """Row-wise Birkhoff distances between point arrays ``P`` and ``Q``."""
    hi, lo = kernels.log_ratio_extrema(_clearance_matrix(domain, P), _clearance_matrix(domain, Q))
    if metric == HILBERT:
        return (hi - lo) / 2
    if metric == FUNK:
        return hi
    if metric in ("rfunk", "reverse_funk"):
        return -lo
    raise ValueError(f"unknown metric {metric!r}")


def _check_radius(r):
    r = float(r)
    if not r >= 0.0:
        raise NegativeRadius(f"radius must be nonnegative, got {r}")
    return r


def funk_ball(domain: Domain, p, r) -> Ball:
    """Funk ball: the domain shrunk towards ``p`` by the factor ``1 - exp(-r)``.

    Row ``i`` keeps the normal of facet ``i`` and moves its offset inwards by
    ``exp(-r)`` times the clearance of ``p``.
    """
    p = clearance_vector(domain, p)
    r = _check_radius(r)
    b = domain.c - np.exp(-r) * p.clearances
    return Ball(FUNK, p, r, _frozen(domain.W), _frozen(b))


def _pairs(m):
    j, k = np.nonzero(~np.eye(m, dtype=bool))
    return j, k


def hilbert_ball(domain: Domain, p, r, parameterization="product") -> Ball:
    """Hilbert ball as the ``m(m-1)`` pairwise constraints, ordered (j, k) row-major.

    Row (j, k) reads ``e^{2r} f_k(p) f_j(x) - f_j(p) f_k(x) >= 0``. With
    ``parameterization="ratio"`` each row is instead written as the convex
    pencil ``a L_j - (1 - a) L_k`` with ``a / (1 - a) = e^{2r} f_k(p) / f_j(p)``;
    the two forms differ by a positive factor per row.
    """
    p = clearance_vector(domain, p)
    r = _check_radius(r)
    j, k = _pairs(domain.n_facets)
    cl = p.clearances
    if parameterization == "product":
        coef_j = np.exp(2 * r) * cl[k]
        coef_k = cl[j]
    elif parameterization == "ratio":
        ratio = np.exp(2 * r) * cl[k] / cl[j]
        coef_j = ratio / (1 + ratio)
        coef_k = 1 / (1 + ratio)
    else:
        raise ValueError(f"unknown parameterization {parameterization!r}")
    A = coef_j[:, None] * domain.W[j] - coef_k[:, None] * domain.W[k]
    b = coef_j * domain.c[j] - coef_k * domain.c[k]
    return Ball(HILBERT, p, r, _frozen(A), _frozen(b))


def ball_pairs(domain: Domain):
    """Facet index pairs (j, k) labelling the rows of :func:`hilbert_ball`."""
    j, k = _pairs(domain.n_facets)
    return list(zip(j.tolist(), k.tolist()))


def metric_ball(domain: Domain, p, r, metric=HILBERT) -> Ball:
    if metric == HILBERT:
        return hilbert_ball(domain, p, r)
    if metric == FUNK:
        return funk_ball(domain, p, r)
    raise ValueError(f"unknown metric {metric!r}")


def ball_contains(ball: Ball, x, tol=TOL_FEAS):
    """Membership test ``A x + b >= -tol``; vectorised over leading axes of ``x``."""
    vals = np.asarray(x, dtype=float) @ ball.A.T + ball.b
    return np.all(vals >= -tol, axis=-1)


def apply_projective_map(domain: Domain, points, transform):
    """Push ``domain`` and ``points`` through a projective map of R^d.

    ``transform`` acts on homogeneous coordinates ``(x, 1)``. Facets map by
    right-multiplication with the inverse; each image facet is re-signed so
    the image of the domain's centre stays on its positive side.
    """
    d = domain.dimension
    T = np.asarray(transform, dtype=float)
    if T.shape != (d + 1, d + 1):
        raise DimensionMismatch(f"map must be {(d + 1, d + 1)}, got {T.shape}")
    if not np.isfinite(T).all() or np.linalg.cond(T) > 1e12:
        raise SingularMap("projective map is singular or ill-conditioned")

    # the image is bounded iff the denominator keeps one sign over the domain
    den_w, den_c = T[d, :d], T[d, d]
    m = domain.n_facets
    ext = []
    for sense in (Sense.MINIMIZE, Sense.MAXIMIZE):
        res = solve(LinearProgram(den_w, domain.W, [">="] * m, -domain.c, -np.inf, np.inf, sense))
        ext.append(res.objective_value + den_c)
    if not (min(ext) > TOL_INTERIOR or max(ext) < -TOL_INTERIOR):
        raise ImageUnbounded("the map sends part of the domain to infinity")

    def push(X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        H = np.hstack([X, np.ones((len(X), 1))]) @ T.T
        return H[:, :d] / H[:, d:]

    H = np.hstack([domain.W, domain.c[:, None]]) @ np.linalg.inv(T)
    ref = push(domain.center)[0]
    sign = np.sign(H[:, :d] @ ref + H[:, d])
    H *= sign[:, None]
    try:
        image = validate_domain([(h[:d], h[d]) for h in H])
    except Unbounded as exc:
        raise ImageUnbounded(str(exc)) from exc
    mapped = push(points) if np.size(points) else np.zeros((0, d))
    if len(mapped):
        _clearance_matrix(image, mapped)
    return image, mapped


def polygon_vertices(A, b, tol=1e-9):
    """Vertices of the planar region ``A x + b >= 0`` in counter-clockwise order.

    Brute-force pairwise line intersection; fine for the few dozen rows that
    balls and domains have here. Returns an empty array if the region is
    empty or degenerate to fewer than three vertices.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if A.shape[1] != 2:
        raise DimensionMismatch("polygon_vertices works in the plane only")
    pts = []
    for i in range(len(A)):
        for j in range(i + 1, len(A)):
            M = A[[i, j]]
            det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
            if abs(det) <= 1e-14 * (np.linalg.norm(M[0]) * np.linalg.norm(M[1])):
                continue
            x = np.linalg.solve(M, -b[[i, j]])
            scale = np.linalg.norm(A, axis=1) * (1 + np.linalg.norm(x)) + np.abs(b)
            if np.all(A @ x + b >= -tol * scale):
                pts.append(x)
    if not pts:
        return np.zeros((0, 2))
    pts = np.array(pts)
    keep = []
    for x in pts:
        if not any(np.linalg.norm(x - y) <= 1e-9 * (1 + np.linalg.norm(x)) for y in keep):
            keep.append(x)
    pts = np.array(keep)
    if len(pts) < 3:
        return pts
    mid = pts.mean(axis=0)
    ang = np.arctan2(pts[:, 1] - mid[1], pts[:, 0] - mid[0])
    return pts[np.argsort(ang, kind="stable")]
