"""Dense two-phase tableau simplex with Bland's anti-cycling rule.

Problems are tiny (tens of variables), so a dense tableau is plenty.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DimensionMismatch, InfeasibleFixing, NumericalBreakdown

FEAS_TOL = 1e-7
PIVOT_TOL = 1e-11
INT_TOL = 1e-6
COST_TOL = 1e-9
MAX_PIVOTS = 200_000


class LpStatus(enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"


@dataclass
class LpProblem:
    c: np.ndarray
    A: np.ndarray
    b: np.ndarray
    senses: list                       # "<=", ">=" or "=" per row
    lo: np.ndarray | None = None       # default 0
    hi: np.ndarray | None = None       # default +inf
    maximize: bool = False

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).ravel()
        n = self.c.size
        self.A = np.asarray(self.A, dtype=float).reshape(-1, n) if np.size(self.A) else np.zeros((0, n))
        self.b = np.asarray(self.b, dtype=float).ravel()
        self.senses = list(self.senses)
        self.lo = np.zeros(n) if self.lo is None else np.asarray(self.lo, dtype=float).ravel().copy()
        self.hi = np.full(n, np.inf) if self.hi is None else np.asarray(self.hi, dtype=float).ravel().copy()
        m = self.A.shape[0]
        if self.b.size != m or len(self.senses) != m or self.lo.size != n or self.hi.size != n:
            raise DimensionMismatch(
                f"c:{n} A:{self.A.shape} b:{self.b.size} senses:{len(self.senses)} "
                f"lo:{self.lo.size} hi:{self.hi.size}")
        bad = [s for s in self.senses if s not in ("<=", ">=", "=")]
        if bad:
            raise ValueError(f"unknown row senses {bad}")
        if np.any(self.lo > self.hi):
            raise ValueError("variable bounds with lo > hi")

    @property
    def num_vars(self) -> int:
        return self.c.size


@dataclass
class LpSolution:
    status: LpStatus
    x: np.ndarray = field(default_factory=lambda: np.zeros(0))
    objective: float = math.nan
    pivots: int = 0

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


def _pivot(T: np.ndarray, r: int, s: int) -> None:
    T[r] /= T[r, s]
    col = T[:, s].copy()
    col[r] = 0.0
    nz = np.flatnonzero(col)
    if nz.size:
        T[nz] -= np.outer(col[nz], T[r])


def _run(T: np.ndarray, basis: list, allowed: np.ndarray, budget: list) -> str:
    """Iterate on tableau ``T`` (objective in the last row) until optimal/unbounded."""
    m = T.shape[0] - 1
    while True:
        d = T[m, :-1]
        cand = np.flatnonzero((d < -COST_TOL) & allowed)
        if cand.size == 0:
            return "optimal"
        s = int(cand[0])  # Bland: lowest index entering
        col = T[:m, s]
        rows = np.flatnonzero(col > PIVOT_TOL)
        if rows.size == 0:
            return "unbounded"
        ratios = T[rows, -1] / col[rows]
        best = ratios.min()
        ties = rows[ratios <= best + 1e-12 * max(1.0, abs(best))]
        r = int(min(ties, key=lambda i: basis[i]))  # Bland: lowest leaving index
        _pivot(T, r, s)
        basis[r] = s
        budget[0] += 1
        if budget[0] > MAX_PIVOTS:
            raise NumericalBreakdown("pivot limit exceeded")
        if not np.isfinite(T[r]).all():
            raise NumericalBreakdown("non-finite tableau entry after pivot")


def simplex_solve(prob: LpProblem) -> LpSolution:
    n = prob.num_vars
    lo, hi = prob.lo, prob.hi
    sign = -1.0 if prob.maximize else 1.0
    c = sign * prob.c

    # x = offset + M y with y >= 0 (fixed variables are substituted out)
    offset = np.zeros(n)
    cols = []          # (original index, coefficient)
    extra_rows = []    # (column in y, upper bound)
    for j in range(n):
        if math.isfinite(lo[j]) and math.isfinite(hi[j]) and hi[j] - lo[j] <= 0:
            offset[j] = lo[j]
        elif math.isfinite(lo[j]):
            offset[j] = lo[j]
            cols.append((j, 1.0))
            if math.isfinite(hi[j]):
                extra_rows.append((len(cols) - 1, hi[j] - lo[j]))
        elif math.isfinite(hi[j]):
            offset[j] = hi[j]
            cols.append((j, -1.0))
        else:
            cols.append((j, 1.0))
            cols.append((j, -1.0))
    ny = len(cols)
    Mmap = np.zeros((n, ny))
    for k, (j, coef) in enumerate(cols):
        Mmap[j, k] = coef

    A = prob.A @ Mmap
    b = prob.b - prob.A @ offset
    senses = list(prob.senses)
    if extra_rows:
        ub = np.zeros((len(extra_rows), ny))
        for i, (k, u) in enumerate(extra_rows):
            ub[i, k] = 1.0
        A = np.vstack([A, ub])
        b = np.concatenate([b, [u for _, u in extra_rows]])
        senses += ["<="] * len(extra_rows)
    cy = c @ Mmap
    const = float(c @ offset)

    # rows with no variables left decide feasibility on their own
    keep = []
    for i in range(A.shape[0]):
        if np.all(A[i] == 0):
            ok = ((senses[i] == "<=" and b[i] >= -FEAS_TOL) or (senses[i] == ">=" and b[i] <= FEAS_TOL)
                  or (senses[i] == "=" and abs(b[i]) <= FEAS_TOL))
            if not ok:
                return LpSolution(LpStatus.INFEASIBLE)
        else:
            keep.append(i)
    A, b = A[keep], b[keep]
    senses = [senses[i] for i in keep]

    m = A.shape[0]
    flip = b < 0
    A[flip] *= -1
    b[flip] *= -1
    senses = [{"<=": ">=", ">=": "<=", "=": "="}[s] if f else s for s, f in zip(senses, flip)]

    n_slack = sum(s != "=" for s in senses)
    n_art = sum(s != "<=" for s in senses)
    N = ny + n_slack + n_art
    T = np.zeros((m + 1, N + 1))
    T[:m, :ny] = A
    T[:m, -1] = b
    basis = [0] * m
    si, ai = ny, ny + n_slack
    art_cols = []
    for i, s in enumerate(senses):
        if s == "<=":
            T[i, si] = 1.0
            basis[i] = si
            si += 1
        else:
            if s == ">=":
                T[i, si] = -1.0
                si += 1
            T[i, ai] = 1.0
            basis[i] = ai
            art_cols.append(ai)
            ai += 1

    budget = [0]
    allowed = np.ones(N, dtype=bool)
    if art_cols:
        # phase I: minimise the sum of artificials
        T[m, :] = 0.0
        T[m, art_cols] = 1.0
        for i, bv in enumerate(basis):
            if bv >= ny + n_slack:
                T[m] -= T[i]
        _run(T, basis, allowed, budget)
        if -T[m, -1] > FEAS_TOL * max(1.0, np.abs(b).max(initial=0.0)):
            return LpSolution(LpStatus.INFEASIBLE, pivots=budget[0])
        # drive artificials out of the basis, dropping redundant rows
        drop = []
        for i in range(m):
            if basis[i] >= ny + n_slack:
                nz = np.flatnonzero(np.abs(T[i, :ny + n_slack]) > 1e-9)
                if nz.size:
                    _pivot(T, i, int(nz[0]))
                    basis[i] = int(nz[0])
                else:
                    drop.append(i)
        if drop:
            keep_rows = [i for i in range(m) if i not in drop]
            T = np.vstack([T[keep_rows], T[m:m + 1]])
            basis = [basis[i] for i in keep_rows]
            m = len(keep_rows)
        allowed[ny + n_slack:] = False

    # phase II
    T[m, :] = 0.0
    T[m, :ny] = cy
    for i, bv in enumerate(basis):
        if T[m, bv] != 0.0:
            T[m] -= T[m, bv] * T[i]
    status = _run(T, basis, allowed, budget)
    if status == "unbounded":
        return LpSolution(LpStatus.UNBOUNDED, pivots=budget[0])

    y = np.zeros(N)
    for i, bv in enumerate(basis):
        y[bv] = T[i, -1]
    y = np.maximum(y[:ny], 0.0)
    x = offset + Mmap @ y
    x = np.minimum(np.maximum(x, lo), hi)
    obj = float(prob.c @ x)
    _check_residuals(prob, x)
    return LpSolution(LpStatus.OPTIMAL, x, obj, budget[0])


def _check_residuals(prob: LpProblem, x: np.ndarray) -> None:
    if prob.A.shape[0] == 0:
        return
    ax = prob.A @ x
    scale = 1.0 + np.abs(prob.b)
    for s, lhs, rhs, sc in zip(prob.senses, ax, prob.b, scale):
        viol = {"<=": lhs - rhs, ">=": rhs - lhs, "=": abs(lhs - rhs)}[s]
        if viol > FEAS_TOL * sc * 10:
            raise NumericalBreakdown(f"row residual {viol:.3e} after solve")


def solve_with_fixed(prob: LpProblem, fixings: dict) -> LpSolution:
    """Solve with the given variables pinned (``lo = hi = value``)."""
    lo, hi = prob.lo.copy(), prob.hi.copy()
    for j, v in fixings.items():
        if not (0 <= j < prob.num_vars):
            raise InfeasibleFixing(f"variable index {j} out of range")
        if v < lo[j] - 1e-9 or v > hi[j] + 1e-9:
            raise InfeasibleFixing(f"fixing x[{j}] = {v} outside [{lo[j]}, {hi[j]}]")
        lo[j] = hi[j] = v
    return simplex_solve(replace(prob, lo=lo, hi=hi))
