"""Compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Times the simplex pivot loop on random tableaux, the batched log-ratio
reduction behind distance evaluation, and end-to-end hard and soft training
with each backend swapped in.
"""
import argparse
import timeit

import numpy as np

from hilbertsep import geometry as geo, kernels, svm


def random_tableau(rng, rows, cols):
    T = np.zeros((rows + 1, cols + rows + 1))
    T[:rows, :cols] = rng.normal(size=(rows, cols))
    T[:rows, cols:cols + rows] = np.eye(rows)
    T[:rows, -1] = rng.uniform(0, 1, size=rows)
    T[rows, :cols] = rng.normal(size=cols)
    return T, np.arange(cols, cols + rows, dtype=np.intp)


def bench_simplex(mod, rows, cols, repeat):
    rng = np.random.default_rng(0)
    problems = [random_tableau(rng, rows, cols) for _ in range(20)]

    def run():
        for T, basis in problems:
            mod.simplex_loop(T.copy(), basis.copy(), 10_000, 5 * (rows + cols), 1e-9, 1e-10)

    return min(timeit.repeat(run, number=1, repeat=repeat)) / len(problems)


def bench_log_ratio(mod, n, m, repeat):
    rng = np.random.default_rng(1)
    P = rng.uniform(0.01, 2, size=(n, m))
    Q = rng.uniform(0.01, 2, size=(n, m))
    return min(timeit.repeat(lambda: mod.log_ratio_extrema(P, Q), number=1, repeat=repeat))


def square_instance():
    sq = geo.validate_domain([((1, 0), 0), ((-1, 0), 1), ((0, 1), 0), ((0, -1), 1)])
    rng = np.random.default_rng(2)
    X = rng.uniform(0.05, 0.95, size=(10, 2))
    X = X[np.abs(X[:, 1] - 0.5) > 0.08][:8]
    return sq, svm.make_dataset(sq, X, np.where(X[:, 1] > 0.5, 1, -1))


def bench_training(mod, soft, repeat):
    dom, data = square_instance()
    saved = kernels._impl
    kernels._impl = mod
    try:
        if soft:
            fn = lambda: svm.train_soft(dom, data, 1e-2, 10.0)  # noqa: E731
        else:
            fn = lambda: svm.train_hard(dom, data, 1e-3)  # noqa: E731
        return min(timeit.repeat(fn, number=1, repeat=repeat))
    finally:
        kernels._impl = saved


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    try:
        compiled = kernels.get_backend("compiled")
    except ImportError:
        raise SystemExit("compiled kernels are not built; run pip install --no-build-isolation -e .")
    python = kernels.get_backend("python")

    cases = [
        ("simplex_loop 20x30", lambda m: bench_simplex(m, 20, 30, args.repeat)),
        ("simplex_loop 60x120", lambda m: bench_simplex(m, 60, 120, args.repeat)),
        ("log_ratio_extrema 100x8", lambda m: bench_log_ratio(m, 100, 8, args.repeat)),
        ("log_ratio_extrema 100000x8", lambda m: bench_log_ratio(m, 100_000, 8, args.repeat)),
        ("train_hard square n=8", lambda m: bench_training(m, False, args.repeat)),
        ("train_soft square n=8", lambda m: bench_training(m, True, max(1, args.repeat // 2))),
    ]
    print(f"{'kernel':30s} {'compiled':>12s} {'python':>12s} {'speedup':>8s}")
    for name, fn in cases:
        fast, slow = fn(compiled), fn(python)
        print(f"{name:30s} {fast * 1e3:10.3f}ms {slow * 1e3:10.3f}ms {slow / fast:7.1f}x")


if __name__ == "__main__":
    main()
