"""Acceptance criteria, one test per criterion.

Run with ``pytest tests/test_acceptance.py``; the terminal summary ends with
one PASS/FAIL line per criterion.
"""
import contextlib
import io
import json
import math
import time

import numpy as np
import pytest

from _instances import LN3_2, interior_points, random_domain, random_polygon, separable_instance, square
from hilbertsep import cli, embed, geometry as geo, oracle, svm
from hilbertsep.errors import ImageUnbounded, SingularMap

EPS = 1e-3
N_INSTANCES = 20
METRICS = (geo.HILBERT, geo.FUNK)
_cache = {}


def instances():
    """The analytic square instance followed by 20 random separable ones."""
    if "instances" not in _cache:
        sq = square()
        out = [(sq, svm.make_dataset(sq, [(0.5, 0.75), (0.5, 0.25)], [1, -1]))]
        rng = np.random.default_rng(20240611)
        for _ in range(N_INSTANCES):
            out.append(separable_instance(rng, n=int(rng.integers(4, 11))))
        _cache["instances"] = out
    return _cache["instances"]


def hard_models(metric):
    key = ("hard", metric)
    if key not in _cache:
        _cache[key] = [svm.train_hard(dom, data, EPS, metric=metric) for dom, data in instances()]
    return _cache[key]


def sweeps(metric):
    """Separability LP results at 20 radii per instance."""
    key = ("sweep", metric)
    if key not in _cache:
        out = []
        for dom, data in instances():
            M = svm.margin_upper_bound(dom, data, metric=metric)
            radii = np.linspace(0.0, 1.25 * M, 20)
            out.append([svm.solve_separability(dom, data, r, metric) for r in radii])
        _cache[key] = out
    return _cache[key]


def run_verify(tmp_path, dom, data, model):
    (tmp_path / "domain.json").write_text(json.dumps(dom.to_dict()))
    (tmp_path / "model.json").write_text(json.dumps(model.to_dict()))
    rows = ["x,y,label"] + [f"{float(x)!r},{float(y)!r},{int(s)}" for (x, y), s in zip(data.points, data.labels)]
    (tmp_path / "data.csv").write_text("\n".join(rows) + "\n")
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = cli.main(["verify"] + [str(tmp_path / f)
                                      for f in ("domain.json", "model.json", "data.csv")])
    return code, buf.getvalue()


def check_end_to_end(metric, tmp_path):
    start = time.perf_counter()
    failures = []
    for k, ((dom, data), model) in enumerate(zip(instances(), hard_models(metric))):
        best = oracle.brute_force_margin_2d(dom, data, metric=metric)
        gap = abs(model.margin - best.margin)
        if gap > EPS + best.resolution:
            failures.append(f"instance {k}: train {model.margin:.6f} brute {best.margin:.6f} "
                            f"resolution {best.resolution:.2e}")
        sub = tmp_path / f"{metric}{k}"
        sub.mkdir()
        code, out = run_verify(sub, dom, data, model)
        if code != 0:
            failures.append(f"instance {k}: verify exit {code}\n{out}")
    if metric == geo.HILBERT:
        analytic = hard_models(metric)[0].margin
        if abs(analytic - LN3_2) > EPS:
            failures.append(f"analytic instance margin {analytic} vs ln3/2")
    elapsed = time.perf_counter() - start
    assert not failures, "\n".join(failures)
    assert elapsed < 300, f"{elapsed:.1f} s"


def check_monotone(metric):
    violations = 0
    for results in sweeps(metric):
        flags = [r.feasible for r in results]
        violations += sum(1 for a, b in zip(flags, flags[1:]) if b and not a)
        assert flags[0] and not flags[-1]
    assert violations == 0


def check_certificates(metric):
    results = [r for sweep in sweeps(metric) for r in sweep if r.feasible]
    results += [m.info["certificate"] for m in hard_models(metric)]
    labels = [data.labels for _, data in instances()]
    worst_eq, worst_low = 0.0, 0.0
    per_result_labels = [lab for lab, sweep in zip(labels, sweeps(metric))
                         for r in sweep if r.feasible] + labels
    for res, lab in zip(results, per_result_labels):
        eq, low = svm.certificate_residuals(res, lab)
        worst_eq, worst_low = max(worst_eq, eq), min(worst_low, low)
    assert worst_eq <= 1e-8 and worst_low >= -1e-12, (worst_eq, worst_low)


@pytest.mark.criterion(1, "chord and Birkhoff formulations agree")
def test_formulation_equivalence():
    rng = np.random.default_rng(1)
    start = time.perf_counter()
    triples, worst = 0, 0.0
    while triples < 1000:
        d = int(rng.integers(2, 6))
        dom = random_domain(rng, d, int(rng.integers(d + 1, 13)))
        P = interior_points(rng, dom, 20, shrink=0.99)
        for p, q in zip(P[::2], P[1::2]):
            for metric in (geo.FUNK, "rfunk", geo.HILBERT):
                a = geo.distance(dom, p, q, metric, geo.CHORD)
                b = geo.distance(dom, p, q, metric, geo.BIRKHOFF)
                worst = max(worst, abs(a - b))
            triples += 1
    elapsed = time.perf_counter() - start
    assert worst <= 1e-9, worst
    assert elapsed < 10, f"{elapsed:.1f} s"


@pytest.mark.criterion(2, "ball systems characterise Funk and Hilbert balls")
def test_ball_characterization():
    rng = np.random.default_rng(2)
    sq = square()
    configs = [(sq, (0.5, 0.5), 0.5), (sq, (0.5, 0.5), math.log(2)), (sq, (0.2, 0.7), 1.1)]
    for d, m in ((2, 6), (3, 8)):
        dom = random_domain(rng, d, m)
        configs.append((dom, interior_points(rng, dom, 1)[0], float(rng.uniform(0.2, 1.5))))
    start = time.perf_counter()
    for k, (dom, p, r) in enumerate(configs):
        for kind in (geo.FUNK, geo.HILBERT):
            rep = oracle.ball_membership_oracle(dom, p, r, samples=12_000, kind=kind, seed=k)
            assert rep.samples >= 10_000
            assert rep.violations == 0, (k, kind, rep.examples)
    elapsed = time.perf_counter() - start
    assert elapsed < 30, f"{elapsed:.1f} s"


@pytest.mark.criterion(3, "Hilbert ball rows vanish on facet intersections")
def test_hilbert_facet_geometry():
    rng = np.random.default_rng(3)
    for _ in range(100):
        d = int(rng.integers(2, 5))
        dom = random_domain(rng, d, int(rng.integers(d + 1, 10)))
        p = interior_points(rng, dom, 1)[0]
        ball = geo.hilbert_ball(dom, p, float(rng.uniform(0, 2)))
        for row, (j, k) in enumerate(geo.ball_pairs(dom)):
            M = dom.W[[j, k]]
            if np.linalg.matrix_rank(M, tol=1e-9) < 2:
                continue
            x = np.linalg.lstsq(M, -dom.c[[j, k]], rcond=None)[0]
            scale = np.linalg.norm(ball.A[row]) * (1 + np.linalg.norm(x)) + abs(ball.b[row])
            assert abs(ball.A[row] @ x + ball.b[row]) <= 1e-9 * scale


@pytest.mark.criterion(4, "hard margin matches the brute-force optimum (Hilbert)")
def test_end_to_end_hilbert(tmp_path):
    check_end_to_end(geo.HILBERT, tmp_path)


@pytest.mark.criterion(5, "separability is monotone in the radius (Hilbert)")
def test_monotonicity_hilbert():
    check_monotone(geo.HILBERT)


@pytest.mark.criterion(6, "conical-combination certificates hold (Hilbert)")
def test_certificates_hilbert():
    check_certificates(geo.HILBERT)


@pytest.mark.criterion(7, "soft margin agrees with hard margin; flipped labels pay slack")
def test_soft_hard_consistency():
    flipped_used = 0
    for (dom, data), hard in zip(instances(), hard_models(geo.HILBERT)):
        soft = svm.train_soft(dom, data, EPS, 1e6)
        assert abs(soft.margin - hard.margin) <= EPS, (soft.margin, hard.margin)
        bad = _one_flip_breaking_separability(dom, data)
        if bad is None:
            continue
        flipped_used += 1
        scan = svm.train_soft(dom, bad, EPS, 1e6).info["scan"]
        assert all(Xi > 0 for r, Xi, _ in scan if r > 0)
    assert flipped_used >= N_INSTANCES // 2, flipped_used


def _one_flip_breaking_separability(dom, data):
    for i in range(data.n):
        labels = data.labels.copy()
        labels[i] = -labels[i]
        if labels.min() == labels.max():
            continue
        flipped = svm.make_dataset(dom, data.points, labels)
        if not svm.separable_at(dom, flipped, 0.0)[0]:
            return flipped
    return None


@pytest.mark.criterion(8, "criteria 4 to 6 with the Funk metric")
def test_funk_variant(tmp_path):
    check_end_to_end(geo.FUNK, tmp_path)
    check_monotone(geo.FUNK)
    check_certificates(geo.FUNK)


@pytest.mark.criterion(9, "log-clearance embedding is an isometry")
def test_embedding_isometry():
    rng = np.random.default_rng(9)
    pairs, worst = 0, 0.0
    while pairs < 1000:
        d = int(rng.integers(2, 6))
        dom = random_domain(rng, d, int(rng.integers(d + 1, 13)))
        P = interior_points(rng, dom, 20, shrink=0.99)
        for p, q in zip(P[::2], P[1::2]):
            worst = max(worst, abs(embed.embedded_distance(dom, p, q) - geo.hilbert_distance(dom, p, q)))
            pairs += 1
    assert worst <= 1e-9, worst
    for _ in range(1000):
        k = int(rng.integers(1, 12))
        x, y = rng.normal(size=(2, k)) * rng.uniform(0.01, 10)
        a = rng.normal() * 3
        nx, ny = embed.norm_sigma(x), embed.norm_sigma(y)
        assert nx > 0 and embed.norm_sigma(np.zeros(k)) == 0
        assert embed.norm_sigma(a * x) == pytest.approx(abs(a) * nx, rel=1e-12, abs=1e-12)
        assert embed.norm_sigma(x + y) <= nx + ny + 1e-12


@pytest.mark.criterion(10, "nearest-centre LP gives the expected separation ratio")
def test_nn_lp():
    rng = np.random.default_rng(10)
    for _ in range(10):
        dom = random_polygon(rng, int(rng.integers(3, 8)))
        X = interior_points(rng, dom, 2)
        model = embed.train_nn(dom, svm.make_dataset(dom, X, [1, -1]))
        assert math.isinf(model.beta)
    sq = square()
    for a in (0.3, 0.4, 0.45):
        for b in (0.7, 0.8, 0.9):
            pts = [(a, b), (1 - a, b), (a, 1 - b), (1 - a, 1 - b)]
            data = svm.make_dataset(sq, pts, [1, 1, -1, -1])
            model = embed.train_nn(sq, data)
            assert 1 < model.beta < math.inf, (a, b, model.beta)
            Q = embed.embed_points(sq, data.points)
            for q, D, cls in embed.nn_constraints(Q[data.positive], Q[data.negative]):
                c = model.c_plus if cls > 0 else model.c_minus
                assert embed.norm_sigma(q - c) <= model.t * D + 1e-8


@pytest.mark.criterion(11, "affine maps preserve Hilbert distances")
def test_projective_invariance():
    rng = np.random.default_rng(11)
    maps = 0
    while maps < 200:
        d = int(rng.integers(2, 5))
        dom = random_domain(rng, d, int(rng.integers(d + 1, 9)))
        P = interior_points(rng, dom, 4)
        T = np.eye(d + 1)
        T[:d, :d] = rng.normal(size=(d, d))
        T[:d, d] = rng.normal(size=d)
        try:
            img, Q = geo.apply_projective_map(dom, P, T)
        except (SingularMap, ImageUnbounded):
            continue
        maps += 1
        for i in range(3):
            before = geo.hilbert_distance(dom, P[i], P[i + 1])
            after = geo.hilbert_distance(img, Q[i], Q[i + 1])
            assert abs(before - after) <= 1e-8, (before, after)


@pytest.mark.criterion(12, "margins never exceed the data and bit-size bounds")
def test_margin_upper_bounds():
    for metric in METRICS:
        for (dom, data), model in zip(instances(), hard_models(metric)):
            assert model.margin <= svm.margin_upper_bound(dom, data, "data", metric=metric)
            assert model.margin <= svm.margin_upper_bound(dom, data, "bits", bits=64, metric=metric)


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
