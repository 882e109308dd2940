"""Link budget and delay arithmetic.

All functions are pure. Data sizes are bits, compute is FLOP/s and work is
converted from bits with an explicit ``flops_per_bit`` factor.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ZeroAllocationWithWork, ZeroDistance, ZeroRateWhileConnected


@dataclass
class LinkBudget:
    gain: float
    snr: float
    rate: float


@dataclass
class DelayBreakdown:
    trans: float = 0.0
    local: float = 0.0
    bs_comp: float = 0.0
    bs_total: float = 0.0
    dt: float = 0.0
    effective: float = 0.0


@dataclass
class AllocationDecision:
    offload: float = 0.0   # bits sent to the BS
    compute: float = 0.0   # FLOP/s granted by the BS


def path_gain(distance, ref_gain: float, ref_distance: float, exponent: float):
    """Mean (large-scale) channel gain of log-distance path loss."""
    return ref_gain * (np.asarray(distance, dtype=float) / ref_distance) ** (-exponent)


def channel_gain(distance: float, rng, ref_gain: float, ref_distance: float,
                 exponent: float, fading: float | None = None) -> float:
    """Path loss times Rayleigh power fading ``X ~ Exp(1)``.

    Pass ``fading`` to use a pre-drawn fading sample instead of ``rng``.
    """
    if distance <= 0:
        raise ZeroDistance(f"distance must be > 0, got {distance}")
    x = rng.exponential(1.0) if fading is None else fading
    return float(path_gain(distance, ref_gain, ref_distance, exponent) * x)


def snr(tx_power: float, gain, noise_power: float):
    return tx_power * gain / noise_power


def uplink_rate(bandwidth: float, connected, snr_value):
    return bandwidth * connected * np.log2(1.0 + snr_value)


def link_budget(distance, fading, cfg) -> LinkBudget:
    g = float(path_gain(max(distance, 1e-9), cfg.ref_gain, cfg.ref_distance, cfg.pathloss_exponent) * fading)
    r = float(snr(cfg.tx_power, g, cfg.noise_power))
    return LinkBudget(g, r, float(uplink_rate(cfg.bandwidth, 1, r)))


def transmission_delay(offload_bits: float, downlink_bits: float, rate: float, connected: int) -> float:
    if not connected:
        return 0.0
    if rate <= 0:
        raise ZeroRateWhileConnected("connected pair has zero uplink rate")
    return (offload_bits + downlink_bits) / rate


def local_delay(local_bits: float, local_rate: float) -> float:
    # local_rate is seconds per bit, so this is a product
    return local_bits * local_rate


def bs_compute_delay(offload_bits: float, compute: float, flops_per_bit: float) -> float:
    if offload_bits <= 0:
        return 0.0
    if compute <= 0:
        raise ZeroAllocationWithWork("offloaded work with no compute allocated")
    return offload_bits * flops_per_bit / compute


def budget_check(allocations, bs_budget: float, reserved: float = 0.0, tol: float = 1e-6) -> bool:
    """Per-BS compute constraint: reserved + sum of allocations <= budget."""
    return reserved + float(np.sum(allocations)) <= bs_budget * (1.0 + 1e-12) + tol


def bs_total_delay(pair_delays) -> float:
    """Parallel processing at a BS: the batch finishes with its slowest pair."""
    pair_delays = list(pair_delays)
    return max(pair_delays) if pair_delays else 0.0


def dt_compute_delay(generated_bits: float, compute: float, flops_per_bit: float) -> float:
    if generated_bits <= 0:
        return 0.0
    if compute <= 0:
        raise ZeroAllocationWithWork("generated data to process with no compute allocated")
    return generated_bits * flops_per_bit / compute


def effective_delay(service_delay: float, retrain: int, dt_delay: float) -> float:
    return service_delay + (dt_delay if retrain else 0.0)


def spectral_efficiency(snr_value) -> float:
    return float(math.log2(1.0 + snr_value))
