"""Log-clearance embedding of the Hilbert geometry and a nearest-centre classifier.

A point ``p`` maps to ``phi(p) = log(clearances(p))`` in R^m. Shifting
``phi`` by a constant vector does not change any clearance ratio, so we work
in the quotient by the all-ones direction, represented by subtracting the
last coordinate. On that quotient the variation seminorm
``(max - min) / 2`` is a norm, and it reproduces the Hilbert distance
exactly: ``d_H(p, q) = |phi(p) - phi(q)|``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from hilbertsep import geometry as geo
from hilbertsep.errors import EmptyClass, LPError
from hilbertsep.lp import LinearProgram, Sense, Status, solve
from hilbertsep.svm import Classification

INFINITE_TOL = 1e-10
TIE_TOL = 1e-12


@dataclass(frozen=True)
class EmbeddedPoint:
    phi: np.ndarray
    canonical: np.ndarray


def embed_point(domain, p) -> EmbeddedPoint:
    p = geo.clearance_vector(domain, p)
    phi = np.log(p.clearances)
    return EmbeddedPoint(geo._frozen(phi), geo._frozen(phi[:-1] - phi[-1]))


def embed_points(domain, X) -> np.ndarray:
    """Canonical coordinates of many points, shape (k, m - 1)."""
    phi = np.log(geo._clearance_matrix(domain, X))
    return phi[:, :-1] - phi[:, -1:]


def norm_sigma(x):
    """Half the spread of ``x`` padded with a trailing zero; vectorised over rows."""
    x = np.asarray(x, dtype=float)
    hi = np.maximum(x.max(axis=-1), 0.0)
    lo = np.minimum(x.min(axis=-1), 0.0)
    out = (hi - lo) / 2
    return float(out) if np.ndim(out) == 0 else out


def embedded_distance(domain, p, q) -> float:
    return norm_sigma(embed_point(domain, p).canonical - embed_point(domain, q).canonical)


def norm_directions(m):
    """Rows ``g`` with ``|x| = max_g g @ x`` for x in R^(m-1).

    One row ``(e_j - e_k) / 2`` per ordered pair of padded coordinates; the
    padded coordinate contributes nothing, so its unit vector is zero.
    """
    E = np.vstack([np.eye(m - 1), np.zeros((1, m - 1))])
    j, k = np.nonzero(~np.eye(m, dtype=bool))
    return (E[j] - E[k]) / 2


@dataclass
class NnModel:
    """Class centres in embedding space and the separation ratio ``beta``.

    ``beta`` is ``inf`` when every point can sit on its centre, and ``0.0``
    when the LP is infeasible (two points of one class coincide with points
    of the other). ``separated`` is true iff ``beta > 1``.
    """

    c_plus: np.ndarray
    c_minus: np.ndarray
    beta: float
    t: float

    @property
    def separated(self):
        return self.beta > 1

    def to_dict(self):
        return {"c_plus": self.c_plus.tolist(), "c_minus": self.c_minus.tolist(),
                "beta": "inf" if np.isinf(self.beta) else float(self.beta),
                "t": float(self.t)}

    @classmethod
    def from_dict(cls, data):
        beta = data["beta"]
        return cls(np.asarray(data["c_plus"], dtype=float), np.asarray(data["c_minus"], dtype=float),
                   float("inf") if beta == "inf" else float(beta), float(data.get("t", 0.0)))


def nn_constraints(Q_pos, Q_neg):
    """Norm bounds ``(q, D, cls)``: ``|q - c_cls| <= t * D`` for every point."""
    Dmat = norm_sigma(Q_pos[:, None, :] - Q_neg[None, :, :])
    out = [(q, float(D), +1) for q, D in zip(Q_pos, Dmat.min(axis=1))]
    out += [(q, float(D), -1) for q, D in zip(Q_neg, Dmat.min(axis=0))]
    return out


def train_nn(domain, dataset) -> NnModel:
    """Minimise ``t = 1 / beta`` over the two centres (one LP)."""
    pos, neg = dataset.positive, dataset.negative
    if pos.size == 0 or neg.size == 0:
        raise EmptyClass("both classes need at least one point")
    Q = embed_points(domain, dataset.points)
    m1 = Q.shape[1]
    G = norm_directions(m1 + 1)
    cons = nn_constraints(Q[pos], Q[neg])
    nv = 2 * m1 + 1
    rows, rhs = [], []
    for q, D, cls in cons:
        block = np.zeros((len(G), nv))
        cols = slice(0, m1) if cls > 0 else slice(m1, 2 * m1)
        # g @ (q - c) <= t D
        block[:, cols] = -G
        block[:, -1] = -D
        rows.append(block)
        rhs.append(-G @ q)
    A = np.vstack(rows)
    obj = np.zeros(nv)
    obj[-1] = 1.0
    lower = np.full(nv, -np.inf)
    lower[-1] = 0.0
    lp = LinearProgram(obj, A, ["<="] * len(A), np.concatenate(rhs), lower, np.inf, Sense.MINIMIZE)
    sol = solve(lp)
    if sol.status is Status.INFEASIBLE:
        c_plus = Q[pos].mean(axis=0)
        c_minus = Q[neg].mean(axis=0)
        return NnModel(c_plus, c_minus, 0.0, float("inf"))
    if sol.status is not Status.OPTIMAL:
        raise LPError(f"nearest-centre LP ended {sol.status.value}")
    t = float(sol.x[-1])
    beta = float("inf") if t <= INFINITE_TOL else 1.0 / t
    return NnModel(sol.x[:m1], sol.x[m1:2 * m1], beta, t)


def classify_nn(model: NnModel, domain, x) -> Classification:
    """Label of the nearer centre; ties go to +1 and are flagged."""
    q = embed_point(domain, x).canonical
    dp = norm_sigma(q - model.c_plus)
    dm = norm_sigma(q - model.c_minus)
    tie = abs(dp - dm) <= TIE_TOL
    return Classification(1 if tie or dp < dm else -1, bool(tie))
