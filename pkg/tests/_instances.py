"""Random domains and labelled instances shared by the test modules."""
from __future__ import annotations

import math

import numpy as np

from hilbertsep import geometry as geo
from hilbertsep import svm


def square():
    return geo.validate_domain([((1, 0), 0), ((-1, 0), 1), ((0, 1), 0), ((0, -1), 1)])


def _simplex_normals(rng, d):
    """Unit vectors near the vertices of a randomly rotated regular simplex."""
    E = np.eye(d + 1) - 1.0 / (d + 1)
    basis = np.linalg.svd(E)[2][:d]  # orthonormal basis of the sum-zero plane
    V = E @ basis.T
    Q = np.linalg.qr(rng.normal(size=(d, d)))[0]
    V = V @ Q + rng.normal(scale=0.15, size=V.shape)
    return V / np.linalg.norm(V, axis=1, keepdims=True)


def random_domain(rng, d, m):
    """Polytope ``{x : u_i @ x <= s_i}`` around the origin with random normals.

    The first ``d + 1`` normals sit near a random regular simplex so they
    positively span and the polytope is bounded; the rest are uniform.
    Long thin polytopes are redrawn.
    Facets are scaled by random positive factors so nothing relies on unit
    normals.
    """
    assert m >= d + 1
    while True:
        U = rng.normal(size=(m, d))
        U[:d + 1] = _simplex_normals(rng, d)
        U /= np.linalg.norm(U, axis=1, keepdims=True)
        U = U[rng.permutation(m)]
        scale = rng.uniform(0.5, 2.0, size=m)
        try:
            dom = geo.validate_domain([(-u * s, s) for u, s in zip(U, scale)])
        except geo.Unbounded:
            continue
        lo, hi = dom.bbox
        if np.max(hi - lo) <= 20:  # skip needles; rejection sampling would crawl
            return dom


def random_polygon(rng, m):
    """Convex polygon circumscribing the unit circle with ``m`` tangent sides."""
    while True:
        ang = np.sort(rng.uniform(0, 2 * np.pi, size=m))
        gaps = np.diff(np.append(ang, ang[0] + 2 * np.pi))
        if gaps.max() < 0.8 * np.pi and gaps.min() > 0.2:
            break
    U = np.stack([np.cos(ang), np.sin(ang)], axis=1)
    scale = rng.uniform(0.5, 2.0, size=m)
    return geo.validate_domain([(-u * s, s) for u, s in zip(U, scale)])


def interior_points(rng, domain, k, shrink=0.85):
    """Points drawn uniformly from the domain shrunk towards its centre."""
    from hilbertsep.oracle import sample_interior
    X = sample_interior(domain, k, rng)
    return domain.center + shrink * (X - domain.center)


def separable_instance(rng, m=None, n=None, gap=0.06):
    """A planar domain with points strictly separated by a random line.

    Points within ``gap`` (Euclidean) of the line are resampled, so every
    instance has a margin bounded away from zero.
    """
    m = m or int(rng.integers(3, 7))
    n = n or int(rng.integers(2, 11))
    dom = random_polygon(rng, m)
    while True:
        theta = rng.uniform(0, np.pi)
        w = np.array([np.cos(theta), np.sin(theta)])
        c = -w @ (dom.center + rng.normal(scale=0.15, size=2))
        pts = []
        while len(pts) < 4 * n:
            x = interior_points(rng, dom, 1)[0]
            if abs(w @ x + c) > gap:
                pts.append(x)
        pts = np.array(pts[:n])
        s = np.where(pts @ w + c > 0, 1, -1)
        if (s > 0).any() and (s < 0).any():
            return dom, svm.make_dataset(dom, pts, s)


def flipped_instance(rng, dom, data):
    """Flip one label so the classes stop being separable even weakly.

    The flipped point must lie strictly inside the hull of the rest of its
    original class, which is the opposite class once the label flips;
    returns None when no point qualifies.
    """
    from scipy.spatial import Delaunay
    for i in range(data.n):
        mates = (data.labels == data.labels[i]) & (np.arange(data.n) != i)
        other = data.points[mates]
        if len(other) < 3:
            continue
        try:
            hull = Delaunay(other)
        except Exception:
            continue
        if hull.find_simplex(data.points[i]) >= 0:
            labels = data.labels.copy()
            labels[i] = -labels[i]
            return svm.make_dataset(dom, data.points, labels)
    return None


LN3_2 = math.log(3) / 2
