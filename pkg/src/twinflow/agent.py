"""Short-timescale allocation agent: a small numpy DQN.

The agent walks through the (BS, MU) pairs of a slot one at a time; each step
picks one offload level and one compute-share level from a joint catalog.
"""
from __future__ import annotations

import copy
import struct
from dataclasses import dataclass, field

import numpy as np

from .channel import AllocationDecision
from .errors import DimensionMismatch, EmptyBuffer, IndexOutOfRange

OFFLOAD_LEVELS = (0.0, 0.25, 0.5, 0.75, 1.0)
SHARE_LEVELS = (0.1, 0.25, 0.5, 0.75, 1.0)
NUM_ACTIONS = len(OFFLOAD_LEVELS) * len(SHARE_LEVELS)
SE_SCALE = 12.0  # bit/s/Hz mapped to 1.0
LOCAL_FEATURES = 10


def action_levels(index: int) -> tuple[float, float]:
    if not 0 <= index < NUM_ACTIONS:
        raise IndexOutOfRange(f"action index {index} outside [0, {NUM_ACTIONS})")
    i, j = divmod(index, len(SHARE_LEVELS))
    return OFFLOAD_LEVELS[i], SHARE_LEVELS[j]


def action_index(offload: float, share: float) -> int:
    return OFFLOAD_LEVELS.index(offload) * len(SHARE_LEVELS) + SHARE_LEVELS.index(share)


def decode_action(index: int, pending_bits: float, remaining: float, bs_budget: float) -> AllocationDecision:
    """Offload a fraction of the pending bits and request a share of the BS budget,
    clipped to what is left at that BS."""
    phi, psi = action_levels(index)
    return AllocationDecision(offload=phi * pending_bits, compute=min(psi * bs_budget, max(remaining, 0.0)))


def reward(delays, demand, local, offloaded, weight: float) -> float:
    """Negative mean effective delay minus a penalty on unserved demand (bits)."""
    delays = np.asarray(delays, dtype=float)
    gap = np.abs(np.asarray(demand, dtype=float) - np.asarray(local, dtype=float)
                 - np.asarray(offloaded, dtype=float))
    mean_delay = float(delays.mean()) if delays.size else 0.0
    return -mean_delay - weight * float(gap.sum())


def select_action(q_values, epsilon: float, rng, allowed=None) -> int:
    """Epsilon-greedy; greedy ties resolve to the lowest index.

    ``allowed`` is an optional boolean mask; both the random and the greedy
    branch stay inside it.
    """
    q_values = np.asarray(q_values, dtype=float)
    if allowed is None:
        if epsilon > 0 and rng.random() < epsilon:
            return int(rng.integers(q_values.size))
        return int(np.argmax(q_values))
    idx = np.flatnonzero(allowed)
    if epsilon > 0 and rng.random() < epsilon:
        return int(idx[rng.integers(idx.size)])
    return int(idx[np.argmax(q_values[idx])])


def upload_mask() -> np.ndarray:
    """Actions that move at least some data to the BS."""
    mask = np.ones(NUM_ACTIONS, dtype=bool)
    mask[:len(SHARE_LEVELS)] = False
    return mask


def state_dim(num_bs: int, max_mus: int, num_classes: int) -> int:
    pairs = num_bs * max_mus
    return pairs * (4 + num_classes) + max_mus + LOCAL_FEATURES


@dataclass
class DecisionContext:
    """What the agent can observe when deciding one pair."""
    bs_budget: np.ndarray        # (M,) FLOP/s
    remaining: np.ndarray        # (M,) FLOP/s still unallocated
    active: np.ndarray           # (N,) bool
    assoc: np.ndarray            # (M, N) 0/1
    pending: np.ndarray          # (N,) bits
    gen_dists: np.ndarray        # (M, N, K), zeros where no data is generated
    spectral_eff: np.ndarray     # (M, N) bit/s/Hz
    retrain: np.ndarray          # (N,) 0/1
    undecided: np.ndarray        # (M,) pairs still to decide per BS
    local_load: np.ndarray       # (N,) local delay already committed, s
    pair: tuple | None = None    # (m, n) being decided
    pair_times: tuple = (0.0, 0.0, 0.0)  # all-local, full-upload and fair-share compute times, s
    pending_scale: float = 160e6
    delay_scale: float = 5.0


def encode_state(ctx: DecisionContext) -> np.ndarray:
    M, N = ctx.assoc.shape
    act = ctx.active.astype(float)
    frac = np.clip(ctx.remaining / ctx.bs_budget, 0.0, 1.0)
    budgets = frac[:, None] * act[None, :]
    pending = np.clip(ctx.pending / ctx.pending_scale, 0.0, 1.0) * act
    gen = (ctx.gen_dists * act[None, :, None]).ravel()
    assoc = ctx.assoc * act[None, :]
    se = np.clip(ctx.spectral_eff / SE_SCALE, 0.0, 1.0) * act[None, :]
    onehot = np.zeros((M, N))
    local = np.zeros(LOCAL_FEATURES)
    if ctx.pair is not None:
        m, n = ctx.pair
        onehot[m, n] = 1.0
        und = max(ctx.undecided[m], 1.0)
        times = [min(x / ctx.delay_scale, 1.0) for x in (ctx.local_load[n], *ctx.pair_times)]
        local[:] = (frac[m], pending[n], se[m, n], ctx.undecided[m] / N, ctx.retrain[n],
                    *times, frac[m] / und)
    return np.concatenate([budgets.ravel(), pending, gen, assoc.ravel(), se.ravel(),
                           onehot.ravel(), local])


class QNetwork:
    """Affine-ReLU-affine-ReLU-affine network with hand-written backprop."""

    def __init__(self, sizes, rng=None, params=None):
        self.sizes = list(sizes)
        if params is not None:
            self.params = [np.array(p, dtype=float) for p in params]
        else:
            rng = np.random.default_rng(0) if rng is None else rng
            self.params = []
            for fan_in, fan_out in zip(self.sizes[:-1], self.sizes[1:]):
                self.params.append(rng.normal(0.0, np.sqrt(2.0 / fan_in), (fan_in, fan_out)))
                self.params.append(np.zeros(fan_out))

    @property
    def num_layers(self) -> int:
        return len(self.sizes) - 1

    def forward(self, x):
        x = np.asarray(x, dtype=float)
        squeeze = x.ndim == 1
        h = x[None, :] if squeeze else x
        if h.shape[1] != self.sizes[0]:
            raise DimensionMismatch(f"input width {h.shape[1]} != {self.sizes[0]}")
        cache = [h]
        L = self.num_layers
        for i in range(L):
            W, b = self.params[2 * i], self.params[2 * i + 1]
            z = h @ W + b
            h = np.maximum(z, 0.0) if i < L - 1 else z
            cache.append(z)
        return (h[0] if squeeze else h), cache

    def predict(self, x):
        return self.forward(x)[0]

    def backward(self, cache, dout):
        """Gradients of the parameters given dL/d(output)."""
        dout = np.asarray(dout, dtype=float)
        g = dout[None, :] if dout.ndim == 1 else dout
        grads = [None] * len(self.params)
        L = self.num_layers
        for i in reversed(range(L)):
            z = cache[i + 1]
            if i < L - 1:
                g = g * (z > 0)
            h_in = cache[0] if i == 0 else np.maximum(cache[i], 0.0)
            grads[2 * i] = h_in.T @ g
            grads[2 * i + 1] = g.sum(axis=0)
            if i > 0:
                g = g @ self.params[2 * i].T
        return grads

    def copy(self) -> "QNetwork":
        return QNetwork(self.sizes, params=[p.copy() for p in self.params])

    def save(self, path) -> None:
        """Little-endian: uint32 layer count, uint32 widths, then each W (row-major) and b as float64."""
        with open(path, "wb") as fh:
            fh.write(struct.pack("<I", self.num_layers))
            fh.write(struct.pack(f"<{len(self.sizes)}I", *self.sizes))
            for p in self.params:
                fh.write(np.ascontiguousarray(p, dtype="<f8").tobytes())

    @classmethod
    def load(cls, path) -> "QNetwork":
        with open(path, "rb") as fh:
            data = fh.read()
        (L,) = struct.unpack_from("<I", data, 0)
        sizes = list(struct.unpack_from(f"<{L + 1}I", data, 4))
        off = 4 + 4 * (L + 1)
        params = []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            for shape in ((fan_in, fan_out), (fan_out,)):
                count = int(np.prod(shape))
                params.append(np.frombuffer(data, dtype="<f8", count=count, offset=off).reshape(shape).copy())
                off += 8 * count
        if off != len(data):
            raise DimensionMismatch("checkpoint size does not match its header")
        return cls(sizes, params=params)


class Adam:
    def __init__(self, params, step_size=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.step_size, self.beta1, self.beta2, self.eps = step_size, beta1, beta2, eps
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, params, grads) -> None:
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        corr = self.step_size * np.sqrt(1 - b2 ** self.t) / (1 - b1 ** self.t)
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= b1
            m += (1 - b1) * g
            v *= b2
            v += (1 - b2) * g * g
            p -= corr * m / (np.sqrt(v) + self.eps)


@dataclass
class Experience:
    state: np.ndarray
    action: int
    reward: float
    next_state: np.ndarray
    terminal: bool


class ReplayBuffer:
    """Fixed-capacity ring buffer; sampling is uniform with replacement."""

    def __init__(self, capacity: int, dim: int):
        if capacity <= 0:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self.s = np.zeros((capacity, dim))
        self.a = np.zeros(capacity, dtype=np.int64)
        self.r = np.zeros(capacity)
        self.s2 = np.zeros((capacity, dim))
        self.done = np.zeros(capacity)
        self.size = 0
        self.head = 0

    def __len__(self):
        return self.size

    def push(self, exp: Experience) -> None:
        i = self.head
        self.s[i], self.a[i], self.r[i] = exp.state, exp.action, exp.reward
        self.s2[i], self.done[i] = exp.next_state, float(exp.terminal)
        self.head = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, batch_size: int, rng):
        if self.size == 0:
            raise EmptyBuffer("cannot sample from an empty buffer")
        idx = rng.integers(0, self.size, batch_size)
        return self.s[idx], self.a[idx], self.r[idx], self.s2[idx], self.done[idx]

    def items(self) -> list[Experience]:
        order = [(self.head - self.size + k) % self.capacity for k in range(self.size)]
        return [Experience(self.s[i].copy(), int(self.a[i]), float(self.r[i]), self.s2[i].copy(),
                           bool(self.done[i])) for i in order]

    def clear(self) -> None:
        self.size = 0
        self.head = 0


def td_update(net: QNetwork, target: QNetwork, opt: Adam, batch, discount: float,
              double: bool = False) -> float:
    """One optimizer step on the mean squared TD error; returns the loss.

    With ``double`` the online net picks the bootstrap action and the target
    net scores it, which curbs the max-operator's upward bias.
    """
    s, a, r, s2, done = batch
    q, cache = net.forward(s)
    q_next = target.predict(s2)
    if double:
        pick = np.argmax(net.predict(s2), axis=1)
        bootstrap = q_next[np.arange(len(pick)), pick]
    else:
        bootstrap = q_next.max(axis=1)
    y = r + discount * (1.0 - done) * bootstrap
    rows = np.arange(len(a))
    err = q[rows, a] - y
    loss = float(np.mean(err ** 2))
    dq = np.zeros_like(q)
    dq[rows, a] = 2.0 * err / len(a)
    opt.step(net.params, net.backward(cache, dq))
    return loss


class DQNAgent:
    def __init__(self, dim: int, cfg, rng):
        self.cfg = cfg
        self.rng = rng
        self.net = QNetwork([dim, cfg.hidden, cfg.hidden, NUM_ACTIONS], rng)
        self.target = self.net.copy()
        self.opt = Adam(self.net.params, cfg.step_size)
        self.buffer = ReplayBuffer(cfg.buffer_capacity, dim)
        self.updates = 0
        self.steps = 0
        self.last_loss = float("nan")

    def act(self, state, epsilon: float, allowed=None) -> int:
        if allowed is None:
            if epsilon >= 1.0:
                return int(self.rng.integers(NUM_ACTIONS))
            if epsilon > 0 and self.rng.random() < epsilon:
                return int(self.rng.integers(NUM_ACTIONS))
            return int(np.argmax(self.net.predict(state)))
        idx = np.flatnonzero(allowed)
        if epsilon >= 1.0 or (epsilon > 0 and self.rng.random() < epsilon):
            return int(idx[self.rng.integers(idx.size)])
        return int(idx[np.argmax(self.net.predict(state)[idx])])

    def remember(self, exp: Experience, learn: bool = True) -> None:
        self.buffer.push(exp)
        self.steps += 1
        if (learn and len(self.buffer) >= self.cfg.min_buffer
                and self.steps % self.cfg.train_every == 0):
            self.learn()

    def learn(self) -> float:
        batch = self.buffer.sample(self.cfg.batch_size, self.rng)
        self.last_loss = td_update(self.net, self.target, self.opt, batch, self.cfg.discount,
                                   self.cfg.double_q)
        self.updates += 1
        if self.updates % self.cfg.target_sync == 0:
            self.target = self.net.copy()
        return self.last_loss

    def clone(self) -> "DQNAgent":
        return copy.deepcopy(self)
