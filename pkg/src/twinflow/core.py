"""Scenario ground truth: network state, random-waypoint mobility and task arrivals."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class MobilityModel:
    waypoints: np.ndarray                 # (N, 2) m
    speeds: np.ndarray                    # (N,) m/s, fixed per leg
    arena: float
    speed_range: tuple[float, float]

    @classmethod
    def start(cls, positions, arena: float, speed_range, rng) -> "MobilityModel":
        n = len(positions)
        return cls(rng.uniform(0.0, arena, (n, 2)), rng.uniform(*speed_range, n), arena,
                   tuple(speed_range))


@dataclass
class NetworkState:
    slot: int
    frame: int
    bs_positions: np.ndarray              # (M, 2)
    mu_positions: np.ndarray              # (N_max, 2)
    channel_gains: np.ndarray             # (M, N_max)
    task_sizes: np.ndarray                # (N_max,) bits
    local_shares: np.ndarray              # (N_max,) bits
    association: np.ndarray               # (M, N_max) 0/1
    retrain_flags: np.ndarray             # (N_max,) 0/1
    accuracies: np.ndarray                # (N_max,)
    model_age: np.ndarray                 # (N_max,) s
    stored_dist: np.ndarray               # (M, N_max, K)
    bs_budget_used: np.ndarray            # (M,) FLOP/s
    active: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=bool))

    @property
    def num_active(self) -> int:
        return int(self.active.sum())


def pair_distance(bs_pos, mu_pos):
    """Euclidean distance; broadcasts over leading axes."""
    diff = np.asarray(bs_pos, dtype=float) - np.asarray(mu_pos, dtype=float)
    d = np.sqrt(np.sum(diff * diff, axis=-1))
    return float(d) if np.ndim(d) == 0 else d


def distance_matrix(bs_positions, mu_positions) -> np.ndarray:
    return pair_distance(np.asarray(bs_positions)[:, None, :], np.asarray(mu_positions)[None, :, :])


def step_mobility(positions, model: MobilityModel, dt: float, rng) -> np.ndarray:
    """Advance every MU toward its waypoint; a fresh waypoint and speed are drawn on arrival.

    Waypoints lie inside the arena and motion is along straight segments, so
    positions never leave it. Returns the new positions; ``model`` is updated in place.
    """
    pos = np.array(positions, dtype=float)
    delta = model.waypoints - pos
    dist = np.sqrt(np.sum(delta * delta, axis=1))
    step = model.speeds * dt
    arrive = dist <= step
    move = ~arrive & (dist > 0)
    pos[move] += delta[move] * (step[move] / dist[move])[:, None]
    pos[arrive] = model.waypoints[arrive]
    k = int(arrive.sum())
    if k:
        model.waypoints[arrive] = rng.uniform(0.0, model.arena, (k, 2))
        model.speeds[arrive] = rng.uniform(*model.speed_range, k)
    return np.clip(pos, 0.0, model.arena)


def sample_task(cfg, rng, size=None):
    """Task size uniform in the configured range and its pinned local share."""
    lo, hi = cfg.task_size_range
    q = rng.uniform(lo, hi, size)
    return q, cfg.local_fraction * q
