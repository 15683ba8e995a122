"""Dense linear programs and a two-phase primal simplex solver.

Every optimisation in the package is lowered to :class:`LinearProgram` and
handed to :func:`solve`. Callers declare variable bounds directly (free
variables included); the solver shifts and splits them internally.

The pivot loop itself lives in :mod:`hilbertsep.kernels` (compiled when
available). Pricing is Dantzig's rule for the first ``5 * (rows + cols)``
pivots, then Bland's rule, so results are deterministic for fixed input.
"""
from __future__ import annotations

import enum
import itertools
import os
import threading
from dataclasses import dataclass, field

import numpy as np

from hilbertsep import kernels
from hilbertsep.errors import IterationLimit, LPError

TOL_LP = 1e-9
PIVOT_TOL = 1e-10

LE, EQ, GE = -1, 0, 1
_REL_CODES = {"<=": LE, "=": EQ, "==": EQ, ">=": GE, LE: LE, EQ: EQ, GE: GE}
_REL_TEXT = {LE: "<=", EQ: "=", GE: ">="}


class Sense(enum.Enum):
    MINIMIZE = "min"
    MAXIMIZE = "max"
    FEASIBILITY = "feasibility"


class Status(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LinearProgram:
    """A dense LP ``optimise objective @ x`` subject to ``A x (rel) rhs``.

    ``relations`` holds one of ``LE``, ``EQ``, ``GE`` per row (the strings
    ``"<="``, ``"="``, ``">="`` are accepted too). Bounds may be infinite.
    """

    objective: np.ndarray
    A: np.ndarray
    relations: np.ndarray
    rhs: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    sense: Sense = Sense.MINIMIZE
    names: tuple | None = None

    def __post_init__(self):
        obj = np.asarray(self.objective, dtype=float).reshape(-1)
        n = obj.size
        A = np.asarray(self.A, dtype=float).reshape(-1, n) if n else np.zeros((len(self.rhs), 0))
        rel = np.array([_REL_CODES[r] for r in self.relations], dtype=int)
        rhs = np.asarray(self.rhs, dtype=float).reshape(-1)
        lo = np.broadcast_to(np.asarray(self.lower, dtype=float), (n,)).copy()
        hi = np.broadcast_to(np.asarray(self.upper, dtype=float), (n,)).copy()
        if not (A.shape[0] == rel.size == rhs.size):
            raise LPError("constraint matrix, relations and rhs disagree in length")
        if not (np.isfinite(obj).all() and np.isfinite(A).all() and np.isfinite(rhs).all()):
            raise LPError("non-finite coefficient in linear program")
        if np.isnan(lo).any() or np.isnan(hi).any() or (lo > hi).any():
            raise LPError("invalid variable bounds")
        if self.names is not None and len(self.names) != n:
            raise LPError("names must match the variable count")
        for name, value in (("objective", obj), ("A", A), ("relations", rel),
                            ("rhs", rhs), ("lower", lo), ("upper", hi)):
            value.setflags(write=False)
            object.__setattr__(self, name, value)
        if not isinstance(self.sense, Sense):
            object.__setattr__(self, "sense", Sense(self.sense))

    @property
    def n_vars(self):
        return self.objective.size

    @property
    def n_rows(self):
        return self.rhs.size

    def with_sense(self, sense):
        return LinearProgram(self.objective, self.A, self.relations, self.rhs,
                             self.lower, self.upper, sense, self.names)

    def violations(self, x):
        """Per-row and per-bound constraint violation of ``x`` (>= 0)."""
        x = np.asarray(x, dtype=float)
        ax = self.A @ x if self.n_rows else np.zeros(0)
        row = np.where(self.relations == LE, ax - self.rhs,
                       np.where(self.relations == GE, self.rhs - ax, np.abs(ax - self.rhs)))
        bound = np.maximum(self.lower - x, x - self.upper)
        return np.maximum(row, 0.0), np.maximum(bound, 0.0)


@dataclass
class LpSolution:
    status: Status
    x: np.ndarray | None = None
    objective_value: float = float("nan")
    iterations: int = 0
    ray: np.ndarray | None = field(default=None, repr=False)

    @property
    def optimal(self):
        return self.status is Status.OPTIMAL


class LinearProgramBuilder:
    """Incremental row-by-row construction of a :class:`LinearProgram`."""

    def __init__(self, n_vars, names=None):
        self.n = n_vars
        self.objective = np.zeros(n_vars)
        self.lower = np.zeros(n_vars)
        self.upper = np.full(n_vars, np.inf)
        self.names = names
        self._rows = []
        self._rel = []
        self._rhs = []

    def set_bounds(self, index, lower=-np.inf, upper=np.inf):
        self.lower[index] = lower
        self.upper[index] = upper

    def add(self, coefficients, relation, rhs):
        row = np.zeros(self.n)
        if isinstance(coefficients, dict):
            for j, v in coefficients.items():
                row[j] += v
        else:
            row[:] = coefficients
        self._rows.append(row)
        self._rel.append(relation)
        self._rhs.append(rhs)

    def build(self, sense=Sense.MINIMIZE):
        A = np.array(self._rows).reshape(len(self._rows), self.n)
        return LinearProgram(self.objective, A, self._rel, self._rhs,
                             self.lower, self.upper, sense,
                             tuple(self.names) if self.names is not None else None)


class _StandardForm:
    """``x = offset + S @ z`` with ``z >= 0``; rows ``M z (rel) b``, ``b >= 0``."""

    def __init__(self, lp):
        n = lp.n_vars
        cols = []
        offset = np.zeros(n)
        extra_rows = []  # (z column, upper bound) pairs for boxed variables
        for j in range(n):
            lo, hi = lp.lower[j], lp.upper[j]
            if np.isfinite(lo):
                offset[j] = lo
                cols.append((j, 1.0))
                if np.isfinite(hi):
                    extra_rows.append((len(cols) - 1, hi - lo))
            elif np.isfinite(hi):
                offset[j] = hi
                cols.append((j, -1.0))
            else:
                cols.append((j, 1.0))
                cols.append((j, -1.0))
        nz = len(cols)
        S = np.zeros((n, nz))
        for k, (j, s) in enumerate(cols):
            S[j, k] = s
        M = lp.A @ S if lp.n_rows else np.zeros((0, nz))
        b = lp.rhs - (lp.A @ offset if lp.n_rows else 0.0)
        rel = lp.relations.copy()
        if extra_rows:
            E = np.zeros((len(extra_rows), nz))
            for r, (k, ub) in enumerate(extra_rows):
                E[r, k] = 1.0
            M = np.vstack([M, E])
            b = np.concatenate([b, [ub for _, ub in extra_rows]])
            rel = np.concatenate([rel, np.full(len(extra_rows), LE)])
        flip = b < 0
        M[flip] *= -1.0
        b = np.where(flip, -b, b)
        rel = np.where(flip, -rel, rel)
        scale = np.abs(M).max(axis=1) if M.size else np.ones(len(b))
        scale[scale == 0.0] = 1.0
        self.M = M / scale[:, None]
        self.b = b / scale
        self.rel = rel
        self.S = S
        self.offset = offset
        self.cost = S.T @ lp.objective
        self.cost_offset = float(lp.objective @ offset)


class SimplexSolver:
    """Two-phase primal simplex; one instance owns one working tableau."""

    def __init__(self, tol=TOL_LP, pivot_tol=PIVOT_TOL, max_iter=None, bland_after=None):
        self.tol = tol
        self.pivot_tol = pivot_tol
        self.max_iter = max_iter
        self.bland_after = bland_after
        self._lock = threading.Lock()

    def solve(self, lp: LinearProgram) -> LpSolution:
        if not self._lock.acquire(blocking=False):
            raise LPError("solver instance is already running a solve")
        try:
            _maybe_dump(lp)
            return self._solve(lp)
        finally:
            self._lock.release()

    def _run(self, T, basis, size):
        max_iter = self.max_iter if self.max_iter is not None else 50 * size + 1000
        bland_after = self.bland_after if self.bland_after is not None else 5 * size
        status, it, col = kernels.simplex_loop(T, basis, max_iter, bland_after,
                                               self.tol, self.pivot_tol)
        if status == kernels.ITERATION_LIMIT:
            raise IterationLimit(f"simplex exceeded {max_iter} pivots")
        return status, it, col

    def _solve(self, lp):
        sf = _StandardForm(lp)
        rows, nz = sf.M.shape
        n_slack = int(np.count_nonzero(sf.rel != EQ))
        needs_art = sf.rel != LE
        n_art = int(np.count_nonzero(needs_art))
        ncols = nz + n_slack + n_art
        T = np.zeros((rows + 1, ncols + 1))
        T[:rows, :nz] = sf.M
        T[:rows, -1] = sf.b
        basis = np.empty(rows, dtype=np.intp)
        s = nz
        a = nz + n_slack
        for i in range(rows):
            if sf.rel[i] != EQ:
                T[i, s] = 1.0 if sf.rel[i] == LE else -1.0
                if sf.rel[i] == LE:
                    basis[i] = s
                s += 1
            if needs_art[i]:
                T[i, a] = 1.0
                basis[i] = a
                a += 1
        size = rows + ncols
        iterations = 0

        if n_art:
            art_rows = np.flatnonzero(needs_art)
            T[rows, :] = -T[art_rows, :].sum(axis=0)
            T[rows, nz + n_slack:ncols] = 0.0
            _, it, _ = self._run(T, basis, size)
            iterations += it
            infeas = -T[rows, -1]
            if infeas > self.tol * (1.0 + float(np.max(sf.b, initial=0.0))):
                return LpSolution(Status.INFEASIBLE, iterations=iterations)
            keep = np.ones(rows, dtype=bool)
            for i in range(rows):
                if basis[i] >= nz + n_slack:
                    cand = np.flatnonzero(np.abs(T[i, :nz + n_slack]) > self.pivot_tol)
                    if cand.size:
                        kernels.pivot(T, i, int(cand[0]))
                        basis[i] = cand[0]
                    else:
                        keep[i] = False
            keep_full = np.append(keep, True)
            T = np.ascontiguousarray(T[keep_full][:, list(range(nz + n_slack)) + [ncols]])
            basis = np.ascontiguousarray(basis[keep])
            rows = basis.size
            ncols = nz + n_slack
        else:
            keep = np.ones(rows, dtype=bool)

        cost = np.zeros(ncols)
        sign = -1.0 if lp.sense is Sense.MAXIMIZE else 1.0
        if lp.sense is not Sense.FEASIBILITY:
            cost[:nz] = sign * sf.cost
        cb = cost[basis]
        T[rows, :ncols] = cost - cb @ T[:rows, :ncols]
        T[rows, -1] = -(cb @ T[:rows, -1])
        status, it, col = self._run(T, basis, rows + ncols)
        iterations += it

        if status == kernels.UNBOUNDED:
            zray = np.zeros(ncols)
            zray[col] = 1.0
            zray[basis] = -T[:rows, col]
            return LpSolution(Status.UNBOUNDED, iterations=iterations, ray=sf.S @ zray[:nz])

        z = np.zeros(ncols)
        z[basis] = T[:rows, -1]
        z = self._refine(sf, keep, basis, z, ncols)
        x = sf.offset + sf.S @ z[:nz]
        return LpSolution(Status.OPTIMAL, x=x, objective_value=float(lp.objective @ x),
                          iterations=iterations)

    def _refine(self, sf, keep, basis, z, ncols):
        """Recompute basic values from the original rows to shed pivot drift."""
        if basis.size == 0:
            return z
        M = sf.M[keep]
        full = np.zeros((M.shape[0], ncols))
        full[:, :M.shape[1]] = M
        s = M.shape[1]
        # slack columns follow the row order of the unreduced system
        slack_rows = np.flatnonzero(sf.rel != EQ)
        kept_index = -np.ones(keep.size, dtype=int)
        kept_index[keep] = np.arange(int(keep.sum()))
        for k, r in enumerate(slack_rows):
            if keep[r]:
                full[kept_index[r], s + k] = 1.0 if sf.rel[r] == LE else -1.0
        B = full[:, basis]
        try:
            if np.linalg.cond(B) > 1e12:
                return z
            zb = np.linalg.solve(B, sf.b[keep])
        except np.linalg.LinAlgError:
            return z
        if np.min(zb, initial=0.0) < -1e-7:
            return z
        out = z.copy()
        out[basis] = np.maximum(zb, 0.0)
        return out


def solve(lp: LinearProgram, **options) -> LpSolution:
    """Solve ``lp`` with a fresh :class:`SimplexSolver`."""
    return SimplexSolver(**options).solve(lp)


def check_feasible(lp: LinearProgram, **options) -> bool:
    return solve(lp.with_sense(Sense.FEASIBILITY), **options).status is Status.OPTIMAL


def to_lp_format(lp: LinearProgram) -> str:
    """Render ``lp`` in the plain-text LP format read by lp_solve."""
    names = lp.names or tuple(f"x{j}" for j in range(lp.n_vars))
    names = [_lp_name(n) for n in names]

    def expr(coefs):
        terms = [f"{v:+.17g} {names[j]}" for j, v in enumerate(coefs) if v != 0.0]
        return " ".join(terms) if terms else "0"

    head = {Sense.MINIMIZE: "min", Sense.MAXIMIZE: "max", Sense.FEASIBILITY: "min"}[lp.sense]
    obj = expr(lp.objective) if lp.sense is not Sense.FEASIBILITY else ""
    lines = [f"/* {lp.n_vars} variables, {lp.n_rows} constraints */", f"{head}: {obj};", ""]
    for i in range(lp.n_rows):
        lines.append(f"R{i + 1}: {expr(lp.A[i])} {_REL_TEXT[int(lp.relations[i])]} "
                     f"{lp.rhs[i]:.17g};")
    lines.append("")
    free = []
    for j, name in enumerate(names):
        lo, hi = lp.lower[j], lp.upper[j]
        if np.isinf(lo) and np.isinf(hi):
            free.append(name)
        elif np.isinf(lo):
            lines.append(f"{name} >= -1e30;")
            lines.append(f"{name} <= {hi:.17g};")
        elif np.isinf(hi):
            if lo != 0.0:
                lines.append(f"{name} >= {lo:.17g};")
        else:
            lines.append(f"{lo:.17g} <= {name} <= {hi:.17g};")
    if free:
        lines.append(f"free {', '.join(free)};")
    return "\n".join(lines) + "\n"


def _lp_name(name):
    out = "".join(ch if ch.isalnum() or ch == "_" else "_" for ch in str(name))
    return out if out and not out[0].isdigit() else f"v_{out}"


_dump_counter = itertools.count(1)


def _maybe_dump(lp):
    if os.environ.get("HILBERTSEP_LP_DUMP") != "1":
        return
    directory = os.environ.get("HILBERTSEP_LP_DUMP_DIR", "lp_dump")
    os.makedirs(directory, exist_ok=True)
    path = os.path.join(directory, f"lp_{next(_dump_counter):06d}.lp")
    with open(path, "w") as fh:
        fh.write(to_lp_format(lp))
