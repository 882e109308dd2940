"""Two-timescale simulation loop and the three comparison schemes.

A run advances slot by slot. Frame-based schemes plan association and the
retraining set on frame boundaries; the single-timescale scheme replans every
slot. Environment randomness (mobility, fading, tasks, class mix) comes from
its own stream, so paired runs of different schemes see the same world.
"""
from __future__ import annotations

import copy
import enum
import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import agent as ag
from .channel import (bs_compute_delay, bs_total_delay, dt_compute_delay, local_delay,
                      path_gain, snr, transmission_delay, uplink_rate)
from .core import MobilityModel, distance_matrix, sample_task, step_mobility
from .errors import EmptyRun
from .planner import (PairCostTracker, estimate_pair_costs, fallback_pair_costs,
                      frame_accuracy_predicted, retrain_decision, solve_association)
from .twin import (accuracy_curve, apply_retrain, dt_data_size, kl_divergence,
                   observe_distribution, optimal_generation_distribution)

ENV_STREAM, AGENT_STREAM, TRAIN_STREAM = 0, 1, 2


class SchemeKind(enum.Enum):
    PROPOSED = "proposed"
    NO_INCREMENTAL_LEARNING = "no_il"
    NO_DIGITAL_TWIN = "no_dt"
    SINGLE_TIMESCALE = "single_timescale"

    @classmethod
    def parse(cls, name) -> "SchemeKind":
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower().replace("-", "_")
        aliases = {"noil": "no_il", "no_incremental_learning": "no_il", "nodt": "no_dt",
                   "no_digital_twin": "no_dt", "st": "single_timescale", "single": "single_timescale"}
        key = aliases.get(key, key)
        for kind in cls:
            if kind.value == key:
                return kind
        raise ValueError(f"unknown scheme {name!r}; choose from {[k.value for k in cls]}")

    @property
    def uses_agent(self) -> bool:
        return self is not SchemeKind.NO_DIGITAL_TWIN

    @property
    def uses_twin(self) -> bool:
        return self in (SchemeKind.PROPOSED, SchemeKind.SINGLE_TIMESCALE)


ALL_SCHEMES = tuple(SchemeKind)


@dataclass
class SlotRecord:
    slot: int
    frame: int
    scheme: str
    seed: int
    mu_ids: np.ndarray
    delays: np.ndarray            # effective delay per active MU, s
    mean_delay: float
    p95_delay: float
    reward: float
    retrain_events: int
    accuracy: np.ndarray          # per active MU
    mean_accuracy: float
    budget_utilization: np.ndarray  # per BS, fraction of capacity
    bs_delay: np.ndarray          # per BS, slowest served pair
    breakout: bool
    dt_delay: float               # mean twin-related delay over active MUs
    planned: bool
    conservation_gap: float       # worst per-MU mismatch, bits
    budget_ok: bool
    min_association: int


@dataclass
class RunResult:
    scheme: SchemeKind
    seed: int
    records: list
    summary: dict
    training_curve: list = field(default_factory=list)   # (episode, mean_reward, epsilon)
    plans: int = 0


def summarize(records) -> dict:
    if not records:
        raise EmptyRun("no slot records to summarize")
    delays = np.array([r.mean_delay for r in records])
    return {
        "slots": len(records),
        "mean_delay_s": float(delays.mean()),
        "p95_delay_s": float(np.percentile(delays, 95)),
        "mean_accuracy": float(np.mean([r.mean_accuracy for r in records])),
        "retrain_count": int(sum(r.retrain_events for r in records)),
        "breakout_count": int(sum(bool(r.breakout) for r in records)),
        "total_reward": float(sum(r.reward for r in records)),
    }


def _cap_bits(per_class: np.ndarray, cap: float) -> np.ndarray:
    total = per_class.sum()
    return per_class * (cap / total) if total > cap else per_class


class Environment:
    """Ground truth shared by all schemes under one seed."""

    def __init__(self, cfg, rng):
        self.cfg = cfg
        self.rng = rng
        N, K = cfg.max_mus, cfg.num_classes
        self.bs = cfg.positions_of_bs()
        self.positions = rng.uniform(0.0, cfg.arena_size, (N, 2))
        self.mobility = MobilityModel.start(self.positions, cfg.arena_size, cfg.speed_range, rng)
        alpha = np.full(K, cfg.class_concentration)
        self.q_before = rng.dirichlet(alpha, N)
        self.q_after = rng.dirichlet(alpha, N)
        self.n_active = cfg.mu_count_range[0]

    def q_true(self, slot: int) -> np.ndarray:
        sf = self.cfg.shift_frame
        if sf is not None and slot >= sf * self.cfg.slots_per_frame:
            return self.q_after
        return self.q_before

    def advance(self, slot: int) -> dict:
        cfg, rng = self.cfg, self.rng
        if slot % cfg.slots_per_frame == 0:
            lo, hi = cfg.mu_count_range
            self.n_active = int(rng.integers(lo, hi + 1))
        if slot > 0:
            self.positions = step_mobility(self.positions, self.mobility, cfg.slot_duration, rng)
        N = cfg.max_mus
        fading = rng.exponential(1.0, (cfg.num_bs, N))
        tasks, local = sample_task(cfg, rng, N)
        q = self.q_true(slot)
        class_frac = np.empty((N, cfg.num_classes))
        for n in range(N):
            images = max(1, int(round(tasks[n] / cfg.image_bits)))
            class_frac[n] = rng.multinomial(images, q[n]) / images
        return {"n_active": self.n_active, "dist": distance_matrix(self.bs, self.positions),
                "fading": fading, "tasks": tasks, "local": local, "class_frac": class_frac}


class Simulation:
    """One scheme under one seed. ``agent`` is used (and trained online) in place."""

    def __init__(self, cfg, scheme, seed: int, agent: ag.DQNAgent | None = None,
                 env_stream: int = ENV_STREAM, learn: bool = True, random_policy: bool = False):
        self.cfg = cfg
        self.scheme = SchemeKind.parse(scheme)
        self.seed = int(seed)
        self.env = Environment(cfg, np.random.default_rng([self.seed, env_stream]))
        M, N, K = cfg.num_bs, cfg.max_mus, cfg.num_classes
        self.M, self.N, self.K = M, N, K
        self.dim = ag.state_dim(M, N, K)
        if self.scheme.uses_agent and agent is None:
            agent = ag.DQNAgent(self.dim, cfg.agent, np.random.default_rng([self.seed, AGENT_STREAM]))
        self.agent = agent if self.scheme.uses_agent else None
        self.learn = learn
        self.random_policy = random_policy
        self.candidates = cfg.candidates()
        self.budget = np.full(M, cfg.bs_compute)
        self.capacity = np.maximum(self.budget - cfg.bs_reserved, 0.0)

        acc = cfg.accuracy
        self.c0 = np.full(N, acc.initial)
        self.age = np.zeros(N)
        self.q_trained = self.env.q_before.copy()
        self.counts = np.zeros((M, N, K))
        self.stored = self.env.q_before * (cfg.training_samples * cfg.image_bits)
        self.real_acc = np.zeros((N, K))
        self.gen_acc = np.zeros((N, K))
        self.carry = np.zeros(N)

        self.v = np.zeros((M, N), dtype=int)
        self.flags = np.zeros(N, dtype=int)
        self.tracker = PairCostTracker(M, N, cfg.cost_half_life)
        self.frame_pair_sum = np.zeros((M, N))
        self.frame_pair_cnt = np.zeros((M, N))
        self.static_offload = np.zeros((M, N))
        self.static_compute = np.zeros((M, N))
        self.feasible_means: list[float] = []
        self.plans = 0
        self.pending_exp = None
        self.epsilon = cfg.agent.epsilon_end

    # ------------------------------------------------------------------ helpers
    def _mean_gain(self, dist):
        return path_gain(np.maximum(dist, 1e-9), self.cfg.ref_gain, self.cfg.ref_distance,
                         self.cfg.pathloss_exponent)

    def _drift_estimate(self, n: int) -> float:
        obs = self.counts[:, n].sum(axis=0)
        if not np.any(obs > 0):
            return 0.0
        return kl_divergence(observe_distribution(obs), self.q_trained[n])

    def _true_accuracy(self, n: int, slot: int) -> float:
        drift = kl_divergence(self.env.q_true(slot)[n], self.q_trained[n])
        return accuracy_curve(self.c0[n], self.cfg.accuracy, drift, self.age[n])

    def _gen_distribution(self, m: int, n: int) -> np.ndarray:
        pair = self.counts[m, n]
        if np.any(pair > 0):
            q = observe_distribution(pair)
        elif np.any(self.counts[:, n] > 0):
            q = observe_distribution(self.counts[:, n].sum(axis=0))
        else:
            q = self.q_trained[n]
        return optimal_generation_distribution(q, self.candidates)[1]

    def _plan(self, draw, instantaneous: bool) -> None:
        cfg = self.cfg
        n_act = draw["n_active"]
        dist = draw["dist"][:, :n_act]
        if instantaneous:
            gains = self._mean_gain(dist) * draw["fading"][:, :n_act]
            costs = fallback_pair_costs(cfg, dist, n_act, gains=gains)
        else:
            fb = fallback_pair_costs(cfg, dist, n_act)
            costs = estimate_pair_costs(self.tracker, np.pad(fb, ((0, 0), (0, self.N - n_act))))[:, :n_act]
        res = solve_association(costs, cfg.cost_tie_weight)
        self.v = np.zeros((self.M, self.N), dtype=int)
        self.v[:, :n_act] = res.v
        self.flags = np.zeros(self.N, dtype=int)
        for n in range(n_act):
            drift = self._drift_estimate(n)
            if instantaneous:
                pred = accuracy_curve(self.c0[n], cfg.accuracy, drift, self.age[n])
            else:
                pred = frame_accuracy_predicted(self.c0[n], cfg.accuracy, drift, cfg.frame_duration,
                                                t0=self.age[n])
            self.flags[n] = retrain_decision(pred, cfg.accuracy_threshold)
        if self.scheme is SchemeKind.NO_DIGITAL_TWIN:
            self._design_static(draw)
        self.plans += 1

    def _design_static(self, draw) -> None:
        """Frame-fixed allocation: equal compute split and an offload level chosen
        from the action catalog for the snapshot at the frame boundary."""
        cfg = self.cfg
        self.static_offload[:] = 0.0
        self.static_compute[:] = 0.0
        gains = self._mean_gain(draw["dist"]) * draw["fading"]
        rate = uplink_rate(cfg.bandwidth, 1, snr(cfg.tx_power, gains, cfg.noise_power))
        per_bs = self.v.sum(axis=1)
        for n in np.flatnonzero(self.v.sum(axis=0)):
            serving = np.flatnonzero(self.v[:, n])
            off_bits = (1.0 - cfg.local_fraction) * draw["tasks"][n] + self.carry[n]
            best, best_delay = None, math.inf
            levels = ag.OFFLOAD_LEVELS[1:] if self._must_upload(n) else ag.OFFLOAD_LEVELS
            for phi in levels:
                pending, worst, plan = off_bits, 0.0, []
                for m in serving:
                    lam = self.capacity[m] / per_bs[m]
                    q = phi * pending
                    pending -= q
                    plan.append((m, q, lam))
                    worst = max(worst, (q + cfg.downlink_size) / rate[m, n] + q * cfg.flops_per_bit / lam)
                worst = max(worst, (draw["local"][n] + pending) * cfg.local_rate)
                if worst < best_delay - 1e-12:
                    best, best_delay = plan, worst
            for m, q, lam in best:
                self.static_offload[m, n] = q
                self.static_compute[m, n] = lam

    # -------------------------------------------------------------- allocation
    def _decide(self, state, n: int) -> int:
        allowed = ag.upload_mask() if self._must_upload(n) else None
        if self.random_policy:
            return ag.select_action(np.zeros(ag.NUM_ACTIONS), 1.0, self.agent.rng, allowed)
        return self.agent.act(state, self.epsilon, allowed)

    def _must_upload(self, n: int) -> bool:
        # a retraining MU has to get some of its data to the BS
        return bool(self.cfg.retrain_requires_upload and self.flags[n])

    def _allocate_agent(self, draw, pairs, pending_off, se, rate, gen_dists, simultaneous: bool):
        cfg = self.cfg
        offload = np.zeros((self.M, self.N))
        compute = np.zeros((self.M, self.N))
        spill = np.zeros(self.N)
        remaining = self.capacity.copy()
        undecided = self.v.sum(axis=1).astype(float)
        active = np.zeros(self.N, dtype=bool)
        active[:draw["n_active"]] = True
        local_load = draw["local"] * cfg.local_rate
        steps = []
        pending = pending_off.copy()
        for m, n in pairs:
            avail = self.capacity[m] if simultaneous else remaining[m]
            fair = max(avail / max(undecided[m], 1.0), 1.0)
            times = ((draw["local"][n] + pending[n]) * cfg.local_rate,
                     (pending[n] + cfg.downlink_size) / rate[m, n],
                     pending[n] * cfg.flops_per_bit / fair)
            ctx = ag.DecisionContext(
                bs_budget=self.budget, remaining=self.capacity if simultaneous else remaining,
                active=active, assoc=self.v, pending=pending, gen_dists=gen_dists,
                spectral_eff=se, retrain=self.flags, undecided=undecided, local_load=local_load,
                pair=(m, n), pair_times=times, pending_scale=cfg.task_size_range[1])
            state = ag.encode_state(ctx)
            a = self._decide(state, n)
            steps.append((state, a, n))
            dec = ag.decode_action(a, pending[n], avail, self.budget[m])
            compute[m, n] = dec.compute
            pending[n] -= dec.offload
            if dec.compute > 0:
                offload[m, n] = dec.offload
            else:
                spill[n] += dec.offload
            if not simultaneous:
                remaining[m] -= dec.compute
            undecided[m] -= 1
        return offload, compute, spill, pending, steps

    def _allocate_static(self, pending_off):
        offload = np.zeros((self.M, self.N))
        pending = pending_off.copy()
        for m, n in zip(*np.nonzero(self.v)):
            q = min(self.static_offload[m, n], pending[n])
            offload[m, n] = q
            pending[n] -= q
        return offload, self.static_compute.copy(), np.zeros(self.N), pending

    # --------------------------------------------------------------------- loop
    def step(self, t: int) -> SlotRecord:
        cfg, M, N = self.cfg, self.M, self.N
        S = cfg.slots_per_frame
        single = self.scheme is SchemeKind.SINGLE_TIMESCALE
        draw = self.env.advance(t)
        n_act = draw["n_active"]
        frame_start = t % S == 0
        planned = single or frame_start
        if frame_start and self.agent is not None and cfg.agent.clear_buffer_each_frame:
            self.agent.buffer.clear()
        if planned:
            self._plan(draw, instantaneous=single)

        gains = self._mean_gain(draw["dist"]) * draw["fading"]
        snr_v = snr(cfg.tx_power, gains, cfg.noise_power)
        rate = uplink_rate(cfg.bandwidth, 1, snr_v)
        se = np.log2(1.0 + snr_v)

        tasks = draw["tasks"].copy()
        tasks[n_act:] = 0.0
        self.carry[n_act:] = 0.0
        local_fixed = cfg.local_fraction * tasks
        demand = tasks + self.carry
        pending_off = demand - local_fixed
        pairs = [(m, n) for m in range(M) for n in range(n_act) if self.v[m, n]]
        if cfg.retrain_requires_upload:
            # at each BS, retraining MUs pick first so they still find compute there
            pairs.sort(key=lambda mn: (mn[0], not self.flags[mn[1]]))

        gen_dists = np.zeros((M, N, self.K))
        if self.scheme.uses_twin:
            for m, n in pairs:
                if self.flags[n]:
                    gen_dists[m, n] = self._gen_distribution(m, n)

        steps = []
        if self.scheme is SchemeKind.NO_DIGITAL_TWIN:
            offload, compute, spill, rest = self._allocate_static(pending_off)
        else:
            offload, compute, spill, rest, steps = self._allocate_agent(
                draw, pairs, pending_off, se, rate, gen_dists, simultaneous=single)
        local_bits = local_fixed + rest

        # twin bookkeeping: observed class mix and generated data
        class_frac = draw["class_frac"]
        self.counts *= cfg.dist_forgetting
        self.counts += offload[:, :, None] * class_frac[None, :, :]
        dt_pair = np.zeros((M, N))
        dt_mu = np.zeros(N)
        for m, n in pairs:
            if not self.flags[n]:
                continue
            if self.scheme.uses_twin and offload[m, n] > 0:
                batch = dt_data_size(cfg.dt_scale, gen_dists[m, n], offload[m, n] * class_frac[n])
                dt_pair[m, n] = dt_compute_delay(batch.size, compute[m, n], cfg.flops_per_bit)
                self.gen_acc[n] += batch.per_class
        if self.scheme is SchemeKind.NO_INCREMENTAL_LEARNING:
            for n in np.flatnonzero(self.flags[:n_act]):
                lam = compute[:, n].sum()
                lam = lam if lam > 0 else min(ag.SHARE_LEVELS) * cfg.bs_compute
                dt_mu[n] = dt_compute_delay(self.stored[n].sum() / S, lam, cfg.flops_per_bit)
        dt_mu = np.maximum(dt_mu, dt_pair.max(axis=0))

        # delays
        pair_delay = np.zeros((M, N))
        for m, n in pairs:
            pair_delay[m, n] = (transmission_delay(offload[m, n], cfg.downlink_size, rate[m, n], 1)
                                + bs_compute_delay(offload[m, n], compute[m, n], cfg.flops_per_bit))
        overhead = cfg.planning_overhead if planned else 0.0
        eff = np.empty(n_act)
        for n in range(n_act):
            service = max(local_delay(local_bits[n], cfg.local_rate), pair_delay[:, n].max())
            eff[n] = service + self.flags[n] * dt_mu[n] + overhead

        used = compute.sum(axis=1)
        budget_ok = bool(np.all(cfg.bs_reserved + used <= self.budget * (1 + 1e-12) + 1e-6))
        breakout = False
        if single:
            idle = any(offload[m, n] > 0 and compute[m, n] <= 0 for m, n in pairs)
            breakout = (not budget_ok) or idle or bool(spill.any())
            if breakout:
                ref = (np.percentile(self.feasible_means, 95) if self.feasible_means
                       else float(eff.mean()))
                eff = np.full(n_act, cfg.breakout_factor * ref)
            else:
                self.feasible_means.append(float(eff.mean()))

        gap = np.abs(demand[:n_act] - local_bits[:n_act] - offload[:, :n_act].sum(axis=0)
                     - spill[:n_act])
        served = offload.sum(axis=0)
        slot_reward = ag.reward(eff, demand[:n_act], local_bits[:n_act], served[:n_act],
                                cfg.reward_weight)
        if self.agent is not None and steps:
            self._store(steps, eff, demand, local_bits, served, slot_reward, t)

        # accuracy (ground truth) for this slot, then bookkeeping
        accs = np.array([self._true_accuracy(n, t) for n in range(n_act)])
        self.real_acc += offload.sum(axis=0)[:, None] * class_frac
        for n in range(N):
            self.real_acc[n] = _cap_bits(self.real_acc[n], cfg.incremental_samples * cfg.image_bits)
        new_real = offload.sum(axis=0)[:, None] * class_frac
        self.stored = self.stored + new_real
        for n in range(N):
            self.stored[n] = _cap_bits(self.stored[n], cfg.training_samples * cfg.image_bits)
        self.carry = spill
        for m, n in pairs:
            self.frame_pair_sum[m, n] += pair_delay[m, n] + dt_pair[m, n]
            self.frame_pair_cnt[m, n] += 1
        self.age += cfg.slot_duration

        frame_end = (t + 1) % S == 0
        retrains = 0
        if single or frame_end:
            retrains = self._apply_retrains(n_act)
        if frame_end:
            self._close_frame()

        util = (cfg.bs_reserved + used) / self.budget
        bs_delay = np.array([bs_total_delay(pair_delay[m, self.v[m] > 0]) for m in range(M)])
        vsum = self.v[:, :n_act].sum(axis=0)
        return SlotRecord(
            slot=t, frame=t // S, scheme=self.scheme.value, seed=self.seed,
            mu_ids=np.arange(n_act), delays=eff, mean_delay=float(eff.mean()),
            p95_delay=float(np.percentile(eff, 95)), reward=slot_reward, retrain_events=retrains,
            accuracy=accs, mean_accuracy=float(accs.mean()), budget_utilization=util,
            bs_delay=bs_delay, breakout=breakout,
            dt_delay=float((self.flags[:n_act] * dt_mu[:n_act]).mean()), planned=planned,
            conservation_gap=float(gap.max(initial=0.0)), budget_ok=budget_ok,
            min_association=int(vsum.min()) if n_act else 0)

    def _store(self, steps, eff, demand, local_bits, served, slot_reward, t) -> None:
        cfg = self.cfg
        per_mu = {}
        for n in range(len(eff)):
            per_mu[n] = ag.reward([eff[n]], [demand[n]], [local_bits[n]], [served[n]], cfg.reward_weight)
        mode = cfg.agent.reward_mode
        k = cfg.agent.reward_scale
        lo = -cfg.agent.reward_clip
        rewards = [max(lo, k * (slot_reward if mode == "global" else per_mu[n])) for _, _, n in steps]
        if self.pending_exp is not None:
            s, a, r = self.pending_exp
            self._push(ag.Experience(s, a, r, steps[0][0], False))
        for i in range(len(steps) - 1):
            self._push(ag.Experience(steps[i][0], steps[i][1], rewards[i], steps[i + 1][0], False))
        self.pending_exp = (steps[-1][0], steps[-1][1], rewards[-1])
        if cfg.agent.terminal_each_slot:
            self._push(ag.Experience(*self.pending_exp, np.zeros(self.dim), True))
            self.pending_exp = None

    def _push(self, exp) -> None:
        if self.random_policy:
            return
        self.agent.remember(exp, learn=self.learn)

    def _apply_retrains(self, n_act: int) -> int:
        cfg = self.cfg
        count = 0
        for n in np.flatnonzero(self.flags[:n_act]):
            base = self.c0[n] * math.exp(-cfg.accuracy.decay * self.age[n])
            if self.scheme is SchemeKind.NO_INCREMENTAL_LEARNING:
                real, gen = self.stored[n], np.zeros(self.K)
            else:
                real, gen = self.real_acc[n], self.gen_acc[n]
            data = real + gen
            self.c0[n], self.age[n] = apply_retrain(base, gen.sum(), real.sum(), cfg.accuracy)
            if np.any(data > 0):
                self.q_trained[n] = observe_distribution(data)
            count += 1
        self.real_acc[:] = 0.0
        self.gen_acc[:] = 0.0
        return count

    def _close_frame(self) -> None:
        served = self.frame_pair_cnt > 0
        for m, n in zip(*np.nonzero(served)):
            self.tracker.update(m, n, self.frame_pair_sum[m, n] / self.frame_pair_cnt[m, n])
        self.frame_pair_sum[:] = 0.0
        self.frame_pair_cnt[:] = 0.0
        if self.pending_exp is not None and self.agent is not None:
            s, a, r = self.pending_exp
            self._push(ag.Experience(s, a, r, np.zeros(self.dim), True))
        self.pending_exp = None

    def run(self, num_slots: int, epsilon_for_frame=None, on_frame=None) -> list:
        """Advance ``num_slots`` slots. ``epsilon_for_frame(k)`` sets exploration per frame."""
        records = []
        S = self.cfg.slots_per_frame
        for t in range(num_slots):
            if t % S == 0 and epsilon_for_frame is not None:
                self.epsilon = epsilon_for_frame(t // S)
            records.append(self.step(t))
            if on_frame is not None and ((t + 1) % S == 0 or t == num_slots - 1):
                on_frame(t // S, records[-((t % S) + 1):], self.epsilon)
        if self.pending_exp is not None:
            self._close_frame()
        return records


# ------------------------------------------------------------------ training

def epsilon_schedule(agent_cfg, episode: int) -> float:
    span = max(agent_cfg.train_episodes - 1, 1)
    frac = min(episode / span, 1.0)
    return agent_cfg.epsilon_start + (agent_cfg.epsilon_end - agent_cfg.epsilon_start) * frac


def _training_config(cfg):
    return replace(cfg, shift_frame=None)


def train_agent(cfg, scheme, seed: int):
    """Warm-up: ``train_episodes`` one-frame episodes with annealed exploration.

    Returns ``(agent, curve)`` where ``curve`` rows are (episode, mean_reward, epsilon).
    """
    scheme = SchemeKind.parse(scheme)
    if not scheme.uses_agent:
        return None, []
    tcfg = _training_config(cfg)
    sim = Simulation(tcfg, scheme, seed, env_stream=TRAIN_STREAM)
    curve = []

    def on_frame(k, recs, eps):
        curve.append((k, float(np.mean([r.reward for r in recs])), eps))

    episodes = cfg.agent.train_episodes
    sim.run(episodes * cfg.slots_per_frame, lambda k: epsilon_schedule(cfg.agent, k), on_frame)
    return sim.agent, curve


def evaluate_random_policy(cfg, scheme, seed: int, episodes: int | None = None) -> list:
    """Episode mean rewards of a uniform-random allocation policy on the training stream."""
    scheme = SchemeKind.parse(scheme)
    tcfg = _training_config(cfg)
    episodes = cfg.agent.train_episodes if episodes is None else episodes
    sim = Simulation(tcfg, scheme, seed, env_stream=TRAIN_STREAM, learn=False, random_policy=True)
    out = []
    sim.run(episodes * cfg.slots_per_frame, None,
            lambda k, recs, eps: out.append(float(np.mean([r.reward for r in recs]))))
    return out


_AGENT_CACHE: dict = {}


def trained_agent(cfg, scheme, seed: int, use_cache: bool = True):
    """Train (or fetch a cached copy of) the warm-up agent for this scheme and seed."""
    scheme = SchemeKind.parse(scheme)
    key = (json.dumps(_training_config(cfg).to_dict(), sort_keys=True), scheme.value, int(seed))
    if use_cache and key in _AGENT_CACHE:
        agent, curve = _AGENT_CACHE[key]
    else:
        agent, curve = train_agent(cfg, scheme, seed)
        if use_cache:
            _AGENT_CACHE[key] = (agent, curve)
    return copy.deepcopy(agent), list(curve)


def run_simulation(cfg, scheme, seed: int, agent=None, train: bool = True,
                   use_cache: bool = True) -> RunResult:
    """Warm up the scheme's agent (unless one is given), then run ``total_slots`` slots."""
    scheme = SchemeKind.parse(scheme)
    curve = []
    if scheme.uses_agent and agent is None and train:
        agent, curve = trained_agent(cfg, scheme, seed, use_cache)
    sim = Simulation(cfg, scheme, seed, agent=agent)
    records = sim.run(cfg.total_slots, lambda k: cfg.agent.eval_epsilon)
    return RunResult(scheme, int(seed), records, summarize(records), curve, sim.plans)


def run_baseline_no_il(cfg, seed: int, **kw) -> RunResult:
    return run_simulation(cfg, SchemeKind.NO_INCREMENTAL_LEARNING, seed, **kw)


def run_baseline_no_dt(cfg, seed: int, **kw) -> RunResult:
    return run_simulation(cfg, SchemeKind.NO_DIGITAL_TWIN, seed, **kw)


def run_baseline_single_timescale(cfg, seed: int, **kw) -> RunResult:
    return run_simulation(cfg, SchemeKind.SINGLE_TIMESCALE, seed, **kw)
