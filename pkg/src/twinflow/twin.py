"""Digital-twin statistics: class distributions, KL-guided data generation and
the parametric accuracy model.

Distributions are plain 1-D numpy arrays that sum to one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import AccuracyModel, DIST_TOL
from .errors import AllZeroCounts, EmptyCandidateSet

SMOOTHING = 1e-6
TIE_TOL = 1e-12

__all__ = [
    "AccuracyModel", "GeneratedBatch", "check_distribution", "kl_divergence",
    "kl_to_candidates", "optimal_generation_distribution", "dt_data_size",
    "observe_distribution", "accuracy_curve", "apply_retrain",
]


@dataclass
class GeneratedBatch:
    size: float                 # bits
    dist: np.ndarray
    per_class: np.ndarray       # bits per class, sums to ``size``


def check_distribution(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or np.any(p < 0) or abs(p.sum() - 1.0) > DIST_TOL:
        raise ValueError(f"not a probability vector: {p}")
    return p


def kl_divergence(p, q) -> float:
    """KL(p || q) in nats; ``inf`` when q has a zero where p does not."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    mask = p > 0
    if np.any(q[mask] <= 0):
        return math.inf
    return float(np.sum(p[mask] * np.log(p[mask] / q[mask])))


def kl_to_candidates(candidates, q) -> np.ndarray:
    """KL(p || q) for every row p of ``candidates``."""
    cand = np.asarray(candidates, dtype=float)
    q = np.asarray(q, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(cand > 0, cand * np.log(cand / q), 0.0)
    terms = np.where((cand > 0) & (q <= 0), np.inf, terms)
    return terms.sum(axis=1)


def optimal_generation_distribution(q, candidates) -> tuple[int, np.ndarray]:
    """Candidate closest to ``q`` in KL(p || q); ties go to the lowest index.

    Returns ``(index, distribution)``.
    """
    cand = np.asarray(candidates, dtype=float)
    if cand.size == 0:
        raise EmptyCandidateSet("candidate set is empty")
    kl = kl_to_candidates(cand, q)
    best = kl.min()
    if math.isinf(best):
        idx = 0
    else:
        idx = int(np.flatnonzero(kl <= best + TIE_TOL * max(1.0, abs(best)))[0])
    return idx, cand[idx].copy()


def dt_data_size(scale: float, p, class_bits) -> GeneratedBatch:
    """Generated volume is ``scale`` times the 2-norm of the per-class upload."""
    p = np.asarray(p, dtype=float)
    size = float(scale * np.linalg.norm(np.asarray(class_bits, dtype=float)))
    return GeneratedBatch(size=size, dist=p, per_class=size * p)


def observe_distribution(counts, smoothing: float = SMOOTHING) -> np.ndarray:
    counts = np.asarray(counts, dtype=float)
    if np.any(counts < 0) or not np.any(counts > 0):
        raise AllZeroCounts("need nonnegative counts with at least one positive entry")
    smoothed = counts + smoothing
    return smoothed / smoothed.sum()


def accuracy_curve(c0: float, model: AccuracyModel, drift: float, t):
    """Accuracy ``t`` seconds after (re)training under KL drift ``drift``."""
    val = c0 * np.exp(-model.decay * np.asarray(t, dtype=float)) - model.drift_sensitivity * drift
    val = np.clip(val, 0.0, 1.0)
    return float(val) if np.ndim(val) == 0 else val


def apply_retrain(c_base: float, generated_bits: float, real_bits: float,
                  model: AccuracyModel) -> tuple[float, float]:
    """Incremental retraining; returns the new accuracy and the reset model age."""
    gain = model.data_gain * math.log1p((real_bits + generated_bits) / model.ref_bits)
    return min(model.c_max, c_base + gain), 0.0
