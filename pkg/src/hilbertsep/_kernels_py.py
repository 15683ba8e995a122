"""Pure numpy implementations of the hot kernels.

These mirror ``_kernels.pyx`` operation for operation (same pricing, same
tie-breaking, same arithmetic order) so both backends pivot identically.
"""
import numpy as np

OPTIMAL = 0
UNBOUNDED = 1
ITERATION_LIMIT = 2

RATIO_TIE = 1e-12


def pivot(T, row, col):
    """Gauss-Jordan pivot of tableau ``T`` in place on entry (row, col)."""
    T[row] /= T[row, col]
    factors = T[:, col].copy()
    factors[row] = 0.0
    nz = np.flatnonzero(factors)
    if nz.size:
        T[nz] -= np.outer(factors[nz], T[row])


def simplex_loop(T, basis, max_iter, bland_after, tol, piv_tol):
    """Run primal simplex pivots on a minimisation tableau.

    The last row of ``T`` holds reduced costs, the last column the basic
    values. Dantzig pricing is used for the first ``bland_after`` pivots,
    with ratio ties going to the largest pivot element; afterwards Bland's
    rule, with ties going to the lowest basic variable index. Returns ``(status, iterations, column)`` where
    ``column`` is the entering column that exposed an unbounded ray.
    """
    nrows = T.shape[0] - 1
    ncols = T.shape[1] - 1
    it = 0
    while True:
        cost = T[nrows, :ncols]
        if it >= bland_after:
            cand = np.flatnonzero(cost < -tol)
            if cand.size == 0:
                return OPTIMAL, it, -1
            col = int(cand[0])
        else:
            col = int(np.argmin(cost))
            if not cost[col] < -tol:
                return OPTIMAL, it, -1
        if it >= max_iter:
            return ITERATION_LIMIT, it, col
        column = T[:nrows, col]
        rows = np.flatnonzero(column > piv_tol)
        if rows.size == 0:
            return UNBOUNDED, it, col
        ratios = T[rows, ncols] / column[rows]
        best = ratios.min()
        tied = rows[ratios <= best + RATIO_TIE]
        if it >= bland_after:
            row = int(tied[np.argmin(basis[tied])])
        else:
            # largest pivot among ties keeps degenerate stretches stable
            row = int(tied[np.argmax(column[tied])])
        pivot(T, row, col)
        basis[row] = col
        it += 1


def log_ratio_extrema(P, Q):
    """Row-wise max and min of ``log(P) - log(Q)`` for positive matrices."""
    delta = np.log(P) - np.log(Q)
    return delta.max(axis=1), delta.min(axis=1)
