"""Warm-up reward curve of the DQN versus a uniform-random policy.

    python3 scripts/learning_curve.py --seed 1 --out curve.csv
"""
import argparse

import numpy as np

from twinflow.config import ScenarioConfig, validate_config
from twinflow.io import curve_csv
from twinflow.sim import SchemeKind, evaluate_random_policy, trained_agent


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--scheme", default="proposed")
    ap.add_argument("--out", default=None, help="optional CSV path for the curve")
    args = ap.parse_args()
    cfg = validate_config(ScenarioConfig())
    scheme = SchemeKind.parse(args.scheme)

    _, curve = trained_agent(cfg, scheme, args.seed)
    rewards = np.array([r for _, r, _ in curve])
    rand = np.array(evaluate_random_policy(cfg, scheme, args.seed))
    for ep in range(49, len(rewards), 50):
        print(f"episode {ep + 1:4d}  moving avg {rewards[ep - 49:ep + 1].mean():8.3f}")
    print(f"random policy: mean {rand.mean():.3f}, std {rand.std():.3f}")
    if args.out:
        with open(args.out, "w", newline="\n") as fh:
            fh.write(curve_csv(curve))


if __name__ == "__main__":
    main()
