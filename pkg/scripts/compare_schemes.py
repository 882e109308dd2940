"""Mean delay and accuracy of every scheme over paired seeds.

    python3 scripts/compare_schemes.py --seeds 1..10 [--slots 2000]
"""
import argparse
import time
from dataclasses import replace

import numpy as np

from twinflow.cli import parse_seeds
from twinflow.config import ScenarioConfig, validate_config
from twinflow.sim import ALL_SCHEMES, run_simulation


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seeds", type=parse_seeds, default=parse_seeds("1..10"))
    ap.add_argument("--slots", type=int, default=None)
    ap.add_argument("--shift-frame", type=int, default=None)
    args = ap.parse_args()
    cfg = ScenarioConfig()
    if args.slots:
        cfg = replace(cfg, total_slots=args.slots)
    if args.shift_frame is not None:
        cfg = replace(cfg, shift_frame=args.shift_frame)
    cfg = validate_config(cfg)

    table = {k: [] for k in ALL_SCHEMES}
    for seed in args.seeds:
        row = []
        for scheme in ALL_SCHEMES:
            t0 = time.time()
            s = run_simulation(cfg, scheme, seed).summary
            table[scheme].append((s["mean_delay_s"], s["mean_accuracy"], s["breakout_count"]))
            row.append(f"{scheme.value}={s['mean_delay_s']:.3f}s({time.time() - t0:.0f}s)")
        print(f"seed {seed}: " + " ".join(row), flush=True)

    print(f"\n{'scheme':>18} {'delay_s':>9} {'accuracy':>9} {'breakouts':>10}")
    for scheme, rows in table.items():
        d, a, b = np.array(rows).T
        print(f"{scheme.value:>18} {d.mean():9.3f} {a.mean():9.4f} {b.mean():10.1f}")


if __name__ == "__main__":
    main()
