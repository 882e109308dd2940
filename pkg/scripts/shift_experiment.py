"""Accuracy before and after an abrupt change of every MU's class mix.

    python3 scripts/shift_experiment.py --seeds 1..3 --shift-frame 50
"""
import argparse
from dataclasses import replace

import numpy as np

from twinflow.cli import parse_seeds
from twinflow.config import ScenarioConfig, validate_config
from twinflow.sim import ALL_SCHEMES, run_simulation


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seeds", type=parse_seeds, default=parse_seeds("1..3"))
    ap.add_argument("--shift-frame", type=int, default=50)
    args = ap.parse_args()
    cfg = validate_config(replace(ScenarioConfig(), shift_frame=args.shift_frame))
    start = args.shift_frame * cfg.slots_per_frame

    print(f"{'seed':>4} {'scheme':>18} {'acc_pre':>8} {'acc_post':>9} {'retrains':>9} {'breakouts':>10}")
    for seed in args.seeds:
        for scheme in ALL_SCHEMES:
            res = run_simulation(cfg, scheme, seed)
            acc = np.array([r.mean_accuracy for r in res.records])
            print(f"{seed:4d} {scheme.value:>18} {acc[:start].mean():8.4f} {acc[start:].mean():9.4f} "
                  f"{res.summary['retrain_count']:9d} {res.summary['breakout_count']:10d}", flush=True)


if __name__ == "__main__":
    main()
