"""Frame-boundary planning: user association, frame accuracy and retraining."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import path_gain, snr, uplink_rate
from .errors import NumericalBreakdown, WrongSampleCount
from .lp import INT_TOL, LpProblem, LpSolution, simplex_solve, solve_with_fixed
from .twin import AccuracyModel, accuracy_curve


@dataclass
class AssociationResult:
    v: np.ndarray            # (M, N) binary
    eta: float               # worst per-MU cost under v
    objective: float         # LP objective at v (eta + tie term)
    relaxed_objective: float
    nodes: int


@dataclass
class RetrainPlan:
    flags: np.ndarray        # per MU, 0/1
    predicted: np.ndarray    # predicted frame accuracy per MU


def build_association_lp(costs, tie_weight: float = 0.0) -> LpProblem:
    """Epigraph LP: minimise eta subject to every MU's summed pair cost <= eta.

    Variables are ``v[m, n]`` flattened row-major, followed by ``eta``.
    ``tie_weight`` adds ``tie_weight * sum(a * v)`` so MUs that are not the
    bottleneck still pick their cheapest BS; it never changes the optimal eta.
    """
    a = np.asarray(costs, dtype=float)
    M, N = a.shape
    nv = M * N
    c = np.zeros(nv + 1)
    c[-1] = 1.0
    c[:nv] = tie_weight * a.ravel()
    rows, rhs, senses = [], [], []
    for n in range(N):
        r = np.zeros(nv + 1)
        r[[m * N + n for m in range(M)]] = a[:, n]
        r[-1] = -1.0
        rows.append(r); rhs.append(0.0); senses.append("<=")
    for n in range(N):
        r = np.zeros(nv + 1)
        r[[m * N + n for m in range(M)]] = 1.0
        rows.append(r); rhs.append(1.0); senses.append(">=")
        rows.append(r.copy()); rhs.append(float(M)); senses.append("<=")
    lo = np.zeros(nv + 1)
    hi = np.concatenate([np.ones(nv), [np.inf]])
    return LpProblem(c, np.array(rows), np.array(rhs), senses, lo, hi)


def branch_and_bound(prob: LpProblem, binaries, root: LpSolution | None = None):
    """Depth-first branch and bound over the listed 0/1 variables.

    Branches on the most fractional variable, explores the 0-branch first and
    prunes any node whose LP bound is no better than the incumbent.
    Returns ``(x, objective, root_objective, nodes)``.
    """
    binaries = list(binaries)
    root = simplex_solve(prob) if root is None else root
    if not root.optimal:
        raise NumericalBreakdown(f"relaxation not solvable: {root.status.value}")
    best_x, best_obj = None, math.inf
    stack = [({}, root)]
    nodes = 0
    while stack:
        fix, sol = stack.pop()
        if sol is None:
            sol = solve_with_fixed(prob, fix)
        nodes += 1
        if not sol.optimal or sol.objective >= best_obj - 1e-12:
            continue
        xb = sol.x[binaries]
        frac = np.abs(xb - np.round(xb))
        if frac.max(initial=0.0) <= INT_TOL:
            best_x = sol.x.copy()
            best_x[binaries] = np.round(xb)
            best_obj = sol.objective
            continue
        k = int(np.argmax(frac))  # most fractional, lowest index on ties
        j = binaries[k]
        stack.append(({**fix, j: 1.0}, None))
        stack.append(({**fix, j: 0.0}, None))
    if best_x is None:
        raise NumericalBreakdown("branch and bound found no integer point")
    return best_x, best_obj, root.objective, nodes


def solve_association(costs, tie_weight: float = 0.0) -> AssociationResult:
    a = np.asarray(costs, dtype=float)
    M, N = a.shape
    prob = build_association_lp(a, tie_weight)
    x, obj, root_obj, nodes = branch_and_bound(prob, range(M * N))
    v = np.rint(x[:M * N]).reshape(M, N).astype(int)
    assert np.all(v.sum(axis=0) >= 1), "every MU needs a serving BS"
    eta = float(np.max((a * v).sum(axis=0))) if N else 0.0
    return AssociationResult(v, eta, float(obj), float(root_obj), nodes)


def frame_accuracy_posterior(samples, slots_per_frame: int) -> float:
    samples = np.asarray(samples, dtype=float)
    if samples.size != slots_per_frame:
        raise WrongSampleCount(f"expected {slots_per_frame} samples, got {samples.size}")
    return float(samples.mean())


def frame_accuracy_predicted(c0: float, model: AccuracyModel, drift: float, frame_len: float,
                             t0: float = 0.0, panels: int = 256) -> float:
    """Average of the accuracy curve over ``[t0, t0 + frame_len]`` (trapezoid rule)."""
    t = np.linspace(t0, t0 + frame_len, panels + 1)
    f = accuracy_curve(c0, model, drift, t)
    h = frame_len / panels
    return float(h * (f.sum() - 0.5 * (f[0] + f[-1])) / frame_len)


def retrain_decision(predicted: float, threshold: float) -> int:
    return int(predicted < threshold)


def fallback_pair_costs(cfg, distances, n_active: int, gains=None) -> np.ndarray:
    """Predicted effective delay per pair from path loss alone.

    Assumes a mean-size task, full offload and an even spread of MUs over BSs.
    ``gains`` (instantaneous channel gains) replaces the mean path gain when given.
    """
    d = np.maximum(np.asarray(distances, dtype=float), 1e-9)
    g = path_gain(d, cfg.ref_gain, cfg.ref_distance, cfg.pathloss_exponent) if gains is None else gains
    rate = uplink_rate(cfg.bandwidth, 1, snr(cfg.tx_power, g, cfg.noise_power))
    q_off = (1.0 - cfg.local_fraction) * 0.5 * sum(cfg.task_size_range)
    share = cfg.bs_compute * cfg.num_bs / max(n_active, 1)
    return (q_off + cfg.downlink_size) / np.maximum(rate, 1e-9) + q_off * cfg.flops_per_bit / share


class PairCostTracker:
    """Exponentially weighted mean of realized per-pair delay (bias corrected)."""

    def __init__(self, num_bs: int, num_mus: int, half_life: float = 3.0):
        self.decay = 0.5 ** (1.0 / half_life)
        self.num = np.zeros((num_bs, num_mus))
        self.den = np.zeros((num_bs, num_mus))

    def update(self, m: int, n: int, realized: float) -> None:
        self.num[m, n] = self.decay * self.num[m, n] + realized
        self.den[m, n] = self.decay * self.den[m, n] + 1.0

    def mean(self) -> np.ndarray:
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(self.den > 0, self.num / np.where(self.den > 0, self.den, 1.0), np.nan)


def estimate_pair_costs(tracker: PairCostTracker, fallback) -> np.ndarray:
    hist = tracker.mean()
    fallback = np.asarray(fallback, dtype=float)
    return np.where(np.isnan(hist), fallback, hist)
