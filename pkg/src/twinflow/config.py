"""Scenario configuration.

Defaults follow the simulation table of the reference setup (3 BSs, 5-10 MUs,
5 ms slots, 10 slots per frame, 0.85 accuracy threshold, 50 GFLOP/s per BS,
10-20 MB tasks, -10 dBm transmit power, -100 dBm noise). Everything the
reference setup leaves open (bandwidth, path loss, accuracy dynamics, agent
hyperparameters) is a documented default here.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, fields, asdict, replace

import numpy as np

from .errors import (
    ConfigError,
    EmptyDistributionSet,
    NegativeParameter,
    ThresholdOutOfRange,
)

MB = 8e6  # bits per megabyte
DIST_TOL = 1e-9


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0) / 1000.0


def simplex_grid(num_classes: int, step: float = 0.1) -> list[tuple[float, ...]]:
    """All probability vectors of length ``num_classes`` on a grid of ``step``."""
    n = int(round(1.0 / step))
    out = []
    for bars in itertools.combinations(range(n + num_classes - 1), num_classes - 1):
        parts, prev = [], -1
        for b in bars:
            parts.append(b - prev - 1)
            prev = b
        parts.append(n + num_classes - 2 - prev)
        out.append(tuple(p / n for p in parts))
    return out


@dataclass
class AccuracyModel:
    """Parameters of the model-accuracy dynamics kept by the digital twin.

    Accuracy decays as ``c0 * exp(-decay * age) - drift_sensitivity * KL``
    and jumps by ``data_gain * ln(1 + bits / ref_bits)`` on retraining.
    """
    c_max: float = 0.95
    decay: float = 0.08          # 1/s
    drift_sensitivity: float = 0.25
    data_gain: float = 0.04
    ref_bits: float = 1.2e8      # ~5000 CIFAR-sized samples
    initial: float = 0.93


@dataclass
class AgentConfig:
    hidden: int = 128
    discount: float = 0.95
    step_size: float = 1e-3
    buffer_capacity: int = 10_000
    batch_size: int = 64
    target_sync: int = 100
    epsilon_start: float = 1.0
    epsilon_end: float = 0.05
    eval_epsilon: float = 0.0            # exploration during the measured run (learning stays on)
    train_episodes: int = 500
    train_every: int = 1
    min_buffer: int = 64                 # learning starts once this many transitions are stored
    clear_buffer_each_frame: bool = False
    terminal_each_slot: bool = True      # end the TD chain at every slot instead of every frame
    reward_clip: float = 5.0             # stored rewards are floored at -reward_clip (after scaling)
    reward_scale: float = 0.1            # multiplies rewards before they enter the buffer
    double_q: bool = False
    reward_mode: str = "pair"            # "global": slot reward for every step; "pair": serving MU only


@dataclass
class ScenarioConfig:
    num_bs: int = 3
    mu_count_range: tuple[int, int] = (5, 10)
    slot_duration: float = 0.005          # s
    slots_per_frame: int = 10
    total_slots: int = 2000
    bandwidth: float = 20e6               # Hz
    tx_power: float = dbm_to_watts(-10.0)     # W
    noise_power: float = dbm_to_watts(-100.0)  # W
    accuracy_threshold: float = 0.85
    bs_compute: float = 50e9              # FLOP/s
    bs_reserved: float = 0.0              # FLOP/s kept aside per BS
    local_rate: float = 2e-8              # s/bit
    downlink_size: float = 1e6            # bits
    task_size_mb: tuple[float, float] = (10.0, 20.0)
    local_fraction: float = 0.2
    flops_per_bit: float = 500.0
    dt_scale: float = 0.3
    reward_weight: float = 5e-8           # per bit of unserved demand
    num_classes: int = 4
    candidate_dists: list | None = None   # None -> simplex grid, step 0.1
    class_concentration: float = 1.0
    image_bits: float = 3072 * 8
    incremental_samples: int = 5000
    training_samples: int = 40_000
    dist_forgetting: float = 0.7
    pathloss_exponent: float = 3.0
    ref_gain: float = 2e-6
    ref_distance: float = 100.0           # m
    arena_size: float = 1000.0            # m
    speed_range: tuple[float, float] = (1.0, 10.0)
    bs_positions: list | None = None      # None -> spread over the arena
    shift_frame: int | None = None
    breakout_factor: float = 10.0
    retrain_requires_upload: bool = True  # MUs flagged for retraining may not stay fully local
    planning_overhead: float = 0.002      # s per plan
    cost_half_life: float = 3.0           # frames
    cost_tie_weight: float = 1e-3
    accuracy: AccuracyModel = field(default_factory=AccuracyModel)
    agent: AgentConfig = field(default_factory=AgentConfig)
    rng_seed: int = 0

    @property
    def task_size_range(self) -> tuple[float, float]:
        return (self.task_size_mb[0] * MB, self.task_size_mb[1] * MB)

    @property
    def max_mus(self) -> int:
        return int(self.mu_count_range[1])

    @property
    def frame_duration(self) -> float:
        return self.slots_per_frame * self.slot_duration

    def candidates(self) -> np.ndarray:
        return np.asarray(self.candidate_dists, dtype=float)

    def positions_of_bs(self) -> np.ndarray:
        return np.asarray(self.bs_positions, dtype=float)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["mu_count_range"] = list(self.mu_count_range)
        d["task_size_mb"] = list(self.task_size_mb)
        d["speed_range"] = list(self.speed_range)
        return d


def default_bs_positions(num_bs: int, arena: float) -> list[list[float]]:
    if num_bs == 3:
        return [[0.25 * arena, 0.25 * arena], [0.75 * arena, 0.25 * arena],
                [0.5 * arena, 0.75 * arena]]
    # evenly on a circle around the centre
    c = arena / 2
    return [[c + 0.3 * arena * math.cos(2 * math.pi * i / num_bs),
             c + 0.3 * arena * math.sin(2 * math.pi * i / num_bs)] for i in range(num_bs)]


def config_from_dict(data: dict) -> ScenarioConfig:
    """Overlay ``data`` on the defaults; nested sections are merged key by key."""
    base = ScenarioConfig()
    known = {f.name for f in fields(ScenarioConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown config keys: {unknown}", [f"unknown key {k!r}" for k in unknown])
    kw = {}
    for key, value in data.items():
        if key == "accuracy":
            kw[key] = _overlay(AccuracyModel, value)
        elif key == "agent":
            kw[key] = _overlay(AgentConfig, value)
        elif key in ("mu_count_range", "task_size_mb", "speed_range") and value is not None:
            kw[key] = tuple(value)
        else:
            kw[key] = value
    return replace(base, **kw)


def _overlay(cls, value):
    if isinstance(value, cls):
        return value
    if not isinstance(value, dict):
        raise ConfigError(f"section for {cls.__name__} must be an object")
    names = {f.name for f in fields(cls)}
    bad = sorted(set(value) - names)
    if bad:
        raise ConfigError(f"unknown keys in {cls.__name__}: {bad}")
    return replace(cls(), **value)


def validate_config(cfg: ScenarioConfig) -> ScenarioConfig:
    """Check invariants and return a normalized copy.

    Candidate distributions that are not valid probability vectors are dropped.
    All violations are collected; the raised error is typed after the first
    one and carries the full list in ``violations``.
    """
    problems: list[ConfigError] = []

    positive = {
        "slot_duration": cfg.slot_duration, "bandwidth": cfg.bandwidth,
        "tx_power": cfg.tx_power, "noise_power": cfg.noise_power,
        "bs_compute": cfg.bs_compute, "local_rate": cfg.local_rate,
        "downlink_size": cfg.downlink_size, "flops_per_bit": cfg.flops_per_bit,
        "image_bits": cfg.image_bits, "ref_gain": cfg.ref_gain,
        "ref_distance": cfg.ref_distance, "pathloss_exponent": cfg.pathloss_exponent,
        "arena_size": cfg.arena_size, "cost_half_life": cfg.cost_half_life,
        "class_concentration": cfg.class_concentration,
        "accuracy.ref_bits": cfg.accuracy.ref_bits,
        "agent.step_size": cfg.agent.step_size,
        "agent.reward_scale": cfg.agent.reward_scale,
    }
    for name, value in positive.items():
        if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
            problems.append(NegativeParameter(f"{name} must be > 0, got {value!r}"))
    nonneg = {
        "bs_reserved": cfg.bs_reserved, "dt_scale": cfg.dt_scale,
        "reward_weight": cfg.reward_weight, "planning_overhead": cfg.planning_overhead,
        "breakout_factor": cfg.breakout_factor, "cost_tie_weight": cfg.cost_tie_weight,
        "accuracy.decay": cfg.accuracy.decay,
        "accuracy.drift_sensitivity": cfg.accuracy.drift_sensitivity,
        "accuracy.data_gain": cfg.accuracy.data_gain,
    }
    for name, value in nonneg.items():
        if not (math.isfinite(value) and value >= 0):
            problems.append(NegativeParameter(f"{name} must be >= 0, got {value!r}"))
    for name, value in {"num_bs": cfg.num_bs, "slots_per_frame": cfg.slots_per_frame,
                        "total_slots": cfg.total_slots, "num_classes": cfg.num_classes,
                        "incremental_samples": cfg.incremental_samples,
                        "training_samples": cfg.training_samples}.items():
        if int(value) != value or value < 1:
            problems.append(NegativeParameter(f"{name} must be a positive integer, got {value!r}"))

    lo, hi = cfg.mu_count_range
    if not (1 <= lo <= hi <= 64):
        problems.append(NegativeParameter(f"mu_count_range must lie within [1, 64], got {cfg.mu_count_range}"))
    if not (0 < cfg.task_size_mb[0] <= cfg.task_size_mb[1]):
        problems.append(NegativeParameter(f"task_size_mb must be a positive interval, got {cfg.task_size_mb}"))
    if not (0 <= cfg.speed_range[0] <= cfg.speed_range[1]):
        problems.append(NegativeParameter(f"speed_range must be a nonnegative interval, got {cfg.speed_range}"))
    if not (0.0 <= cfg.local_fraction <= 1.0):
        problems.append(ThresholdOutOfRange(f"local_fraction must be in [0, 1], got {cfg.local_fraction}"))
    if not (0.0 < cfg.accuracy_threshold < 1.0):
        problems.append(ThresholdOutOfRange(f"accuracy_threshold must be in (0, 1), got {cfg.accuracy_threshold}"))
    if not (0.0 < cfg.accuracy.c_max <= 1.0):
        problems.append(ThresholdOutOfRange(f"accuracy.c_max must be in (0, 1], got {cfg.accuracy.c_max}"))
    if not (0.0 <= cfg.accuracy.initial <= 1.0):
        problems.append(ThresholdOutOfRange(f"accuracy.initial must be in [0, 1], got {cfg.accuracy.initial}"))
    if not (0.0 <= cfg.dist_forgetting < 1.0):
        problems.append(ThresholdOutOfRange(f"dist_forgetting must be in [0, 1), got {cfg.dist_forgetting}"))
    if not (0.0 <= cfg.agent.discount < 1.0):
        problems.append(ThresholdOutOfRange(f"agent.discount must be in [0, 1), got {cfg.agent.discount}"))
    if not (0.0 <= cfg.agent.epsilon_end <= cfg.agent.epsilon_start <= 1.0):
        problems.append(ThresholdOutOfRange("agent epsilons must satisfy 0 <= end <= start <= 1"))
    if not (0.0 <= cfg.agent.eval_epsilon <= 1.0):
        problems.append(ThresholdOutOfRange(f"agent.eval_epsilon must be in [0, 1], got {cfg.agent.eval_epsilon}"))
    if not cfg.agent.reward_clip > 0:
        problems.append(NegativeParameter(f"agent.reward_clip must be > 0, got {cfg.agent.reward_clip}"))
    if cfg.agent.reward_mode not in ("global", "pair"):
        problems.append(ConfigError(f"agent.reward_mode must be 'global' or 'pair', got {cfg.agent.reward_mode!r}"))
    for name in ("hidden", "buffer_capacity", "batch_size", "target_sync", "train_every", "min_buffer"):
        if getattr(cfg.agent, name) < 1:
            problems.append(NegativeParameter(f"agent.{name} must be >= 1"))
    if cfg.agent.train_episodes < 0:
        problems.append(NegativeParameter("agent.train_episodes must be >= 0"))
    if cfg.shift_frame is not None and cfg.shift_frame < 0:
        problems.append(NegativeParameter(f"shift_frame must be >= 0, got {cfg.shift_frame}"))

    k = int(cfg.num_classes) if cfg.num_classes >= 1 else 1
    raw = simplex_grid(k) if cfg.candidate_dists is None else cfg.candidate_dists
    kept = []
    for vec in raw:
        v = np.asarray(vec, dtype=float)
        if v.shape == (k,) and np.all(np.isfinite(v)) and np.all(v >= 0) and abs(v.sum() - 1.0) <= DIST_TOL:
            kept.append([float(x) for x in v])
    if not kept:
        problems.append(EmptyDistributionSet("no valid probability vector in candidate_dists"))

    bs_pos = cfg.bs_positions
    if bs_pos is None:
        bs_pos = default_bs_positions(int(cfg.num_bs), cfg.arena_size)
    elif len(bs_pos) != cfg.num_bs:
        problems.append(ConfigError(f"bs_positions has {len(bs_pos)} entries for {cfg.num_bs} BSs"))

    if problems:
        first = problems[0]
        first.violations = [str(p) for p in problems]
        raise first
    return replace(cfg, candidate_dists=kept, bs_positions=[list(map(float, p)) for p in bs_pos],
                   mu_count_range=(int(lo), int(hi)),
                   task_size_mb=tuple(map(float, cfg.task_size_mb)),
                   speed_range=tuple(map(float, cfg.speed_range)))
