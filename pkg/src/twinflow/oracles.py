"""Brute-force reference solvers used to cross-check the fast paths.

Each oracle trades speed for obviousness: enumeration of vertices, of
associations, of candidates, and finite differences.
"""
from __future__ import annotations

import itertools
import math

import numpy as np

from .twin import kl_divergence


def lp_vertex_optimum(c, A_ub, b_ub, tol: float = 1e-9):
    """Optimum of ``min c.x s.t. A_ub x <= b_ub`` (bounds must be rows of A_ub).

    Enumerates every basis of ``n`` active constraints. Returns ``(value, x)``,
    or ``(None, None)`` when no vertex is feasible. The feasible region is
    assumed bounded.
    """
    c = np.asarray(c, dtype=float)
    A = np.asarray(A_ub, dtype=float)
    b = np.asarray(b_ub, dtype=float)
    n = c.size
    best, best_x = None, None
    for rows in itertools.combinations(range(A.shape[0]), n):
        sub = A[list(rows)]
        if abs(np.linalg.det(sub)) < 1e-10:
            continue
        x = np.linalg.solve(sub, b[list(rows)])
        if np.all(A @ x <= b + tol * (1 + np.abs(b))):
            val = float(c @ x)
            if best is None or val < best - 1e-12:
                best, best_x = val, x
    return best, best_x


def association_optimum(costs, tie_weight: float = 0.0):
    """Exhaustive min over associations where every MU picks a nonempty BS subset.

    Objective is ``max_n sum_m a[m,n] v[m,n] + tie_weight * sum(a * v)``.
    Returns ``(objective, v)`` of the first minimizer in enumeration order.
    """
    a = np.asarray(costs, dtype=float)
    M, N = a.shape
    subsets = [s for s in itertools.product((0, 1), repeat=M) if any(s)]
    best, best_v = math.inf, None
    for choice in itertools.product(subsets, repeat=N):
        v = np.array(choice, dtype=float).T
        per_mu = (a * v).sum(axis=0)
        val = float(per_mu.max() + tie_weight * (a * v).sum())
        if val < best:
            best, best_v = val, v.astype(int)
    return best, best_v


def kl_argmin_bruteforce(q, candidates, tol: float = 1e-12) -> int:
    """First index whose KL(p || q) is within ``tol`` (relative) of the minimum."""
    vals = [kl_divergence(p, q) for p in candidates]
    best = min(vals)
    if math.isinf(best):
        return 0
    for i, v in enumerate(vals):
        if v <= best + tol * max(1.0, abs(best)):
            return i
    raise AssertionError("unreachable")


def finite_difference_grads(loss_fn, params, h: float = 1e-5) -> list:
    """Central differences of ``loss_fn()`` w.r.t. every entry of every array in ``params``.

    The arrays are perturbed in place and restored.
    """
    grads = []
    for p in params:
        g = np.zeros_like(p)
        it = np.nditer(p, flags=["multi_index"])
        for _ in it:
            idx = it.multi_index
            old = p[idx]
            p[idx] = old + h
            up = loss_fn()
            p[idx] = old - h
            down = loss_fn()
            p[idx] = old
            g[idx] = (up - down) / (2 * h)
        grads.append(g)
    return grads


def reference_mlp(params, x) -> np.ndarray:
    """Plain-loop evaluation of the affine/ReLU stack, independent of QNetwork."""
    h = [float(v) for v in x]
    L = len(params) // 2
    for i in range(L):
        W, b = params[2 * i], params[2 * i + 1]
        out = []
        for j in range(W.shape[1]):
            s = float(b[j])
            for k in range(W.shape[0]):
                s += h[k] * float(W[k, j])
            out.append(max(s, 0.0) if i < L - 1 else s)
        h = out
    return np.array(h)


# ---------------------------------------------------------------- instance makers

def random_bounded_lp(rng, max_vars: int = 6, max_rows: int = 6, box: float = 10.0):
    """Random ``<=`` LP in a box; returns ``(c, A, b, box)``."""
    n = int(rng.integers(1, max_vars + 1))
    m = int(rng.integers(1, max_rows + 1))
    A = rng.integers(-5, 6, (m, n)).astype(float)
    b = rng.integers(-5, 16, m).astype(float)
    c = rng.integers(-9, 10, n).astype(float)
    return c, A, b, box


def box_rows(A, b, box: float):
    n = A.shape[1]
    A_full = np.vstack([A, -np.eye(n), np.eye(n)])
    b_full = np.concatenate([b, np.zeros(n), np.full(n, box)])
    return A_full, b_full


def random_candidates(rng, num_classes: int, count: int, ties: bool = False) -> np.ndarray:
    cand = rng.dirichlet(np.ones(num_classes), count)
    if rng.random() < 0.3 and num_classes > 1:
        # some candidates with an empty class, to exercise the support handling
        rows = rng.random(count) < 0.5
        cand[rows, rng.integers(num_classes)] = 0.0
    if ties and count > 1:
        i, j = sorted(rng.choice(count, 2, replace=False))
        cand[j] = cand[i]
    return cand / cand.sum(axis=1, keepdims=True)


def run_suite(instances: int = 50, seed: int = 0) -> list:
    """Quick oracle cross-checks; returns ``(name, passed, detail)`` rows."""
    from .agent import QNetwork
    from .lp import LpProblem, simplex_solve
    from .planner import solve_association
    from .twin import optimal_generation_distribution

    rng = np.random.default_rng(seed)
    out = []

    worst, mismatched = 0.0, 0
    for _ in range(instances):
        c, A, b, box = random_bounded_lp(rng)
        sol = simplex_solve(LpProblem(c, A, b, ["<="] * len(b), None, np.full(c.size, box)))
        ref, _ = lp_vertex_optimum(c, *box_rows(A, b, box))
        if ref is None:
            mismatched += sol.optimal
        elif not sol.optimal:
            mismatched += 1
        else:
            worst = max(worst, abs(sol.objective - ref))
    out.append(("simplex vs vertex enumeration", mismatched == 0 and worst <= 1e-7,
                f"{instances} LPs, status mismatches {mismatched}, max gap {worst:.2e}"))

    worst = 0.0
    for _ in range(instances):
        costs = rng.uniform(0.1, 10.0, (3, int(rng.integers(1, 5))))
        ref, _ = association_optimum(costs)
        worst = max(worst, abs(solve_association(costs).eta - ref))
    out.append(("branch and bound vs enumeration", worst <= 1e-9,
                f"{instances} instances, max gap {worst:.2e}"))

    wrong = 0
    for _ in range(instances):
        k = int(rng.integers(2, 6))
        cand = random_candidates(rng, k, int(rng.integers(1, 51)), ties=rng.random() < 0.5)
        q = rng.dirichlet(np.ones(k))
        wrong += optimal_generation_distribution(q, cand)[0] != kl_argmin_bruteforce(q, cand)
    out.append(("KL argmin vs brute force", wrong == 0, f"{instances} instances, {wrong} wrong"))

    worst = 0.0
    for _ in range(3):
        net = QNetwork([4, 5, 5, 3], rng)
        for b in net.params[1::2]:
            b[:] = rng.normal(0.0, 0.5, b.shape)
        x = rng.normal(size=(6, 4))
        w = rng.normal(size=(6, 3))
        loss = lambda: float(np.sum(w * net.predict(x)) ** 2)
        q, cache = net.forward(x)
        analytic = net.backward(cache, 2 * np.sum(w * q) * w)
        numeric = finite_difference_grads(loss, net.params)
        for g_a, g_n in zip(analytic, numeric):
            worst = max(worst, float(np.max(np.abs(g_a - g_n) / np.maximum(1e-6, np.abs(g_a) + np.abs(g_n)))))
    out.append(("backprop vs finite differences", worst <= 1e-4, f"max relative error {worst:.2e}"))
    return out
