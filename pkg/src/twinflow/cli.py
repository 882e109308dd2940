"""Command-line entry point: ``twinflow {run,compare,validate,oracle}``."""
from __future__ import annotations

import argparse
import os
import sys
import time
from dataclasses import replace
from pathlib import Path

from .config import ScenarioConfig, validate_config
from .errors import ConfigError
from .io import RunManifest, dump_config, load_config, write_metrics
from .sim import ALL_SCHEMES, SchemeKind, run_simulation


def parse_seeds(text: str) -> list[int]:
    """``"3"`` or an inclusive range ``"1..10"``."""
    if ".." in text:
        lo, hi = text.split("..", 1)
        lo, hi = int(lo), int(hi)
        if hi < lo:
            raise argparse.ArgumentTypeError(f"empty seed range {text!r}")
        return list(range(lo, hi + 1))
    try:
        return [int(text)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad seed value {text!r}; use N or A..B") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="twinflow", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, need_config=False):
        p.add_argument("--config", required=need_config, help="JSON config overlaid on the defaults")
        p.add_argument("--shift-frame", type=int, default=None,
                       help="frame at which the true class mix of every MU changes")

    p_run = sub.add_parser("run", help="run one scheme")
    common(p_run)
    p_run.add_argument("--scheme", required=True, choices=[k.value for k in ALL_SCHEMES])
    p_run.add_argument("--seeds", type=parse_seeds, default=[0])
    p_run.add_argument("--out", default="runs")

    p_cmp = sub.add_parser("compare", help="run all four schemes on paired seeds")
    common(p_cmp)
    p_cmp.add_argument("--seeds", type=parse_seeds, default=[0])
    p_cmp.add_argument("--out", default="runs")

    p_val = sub.add_parser("validate", help="check a config file and exit")
    common(p_val, need_config=True)

    p_orc = sub.add_parser("oracle", help="run the LP, KL and gradient oracle suites")
    p_orc.add_argument("--instances", type=int, default=50)
    p_orc.add_argument("--seed", type=int, default=0)
    return parser


def resolve_config(args) -> ScenarioConfig:
    cfg = load_config(args.config) if args.config else validate_config(ScenarioConfig())
    if getattr(args, "shift_frame", None) is not None:
        cfg = validate_config(replace(cfg, shift_frame=args.shift_frame))
    return cfg


def execute(cfg, schemes, seeds, out_dir, config_path=None, log=print) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    dump_config(cfg, out / "config.json")
    files = {"config.json": ""}
    for seed in seeds:
        for scheme in schemes:
            t0 = time.time()
            res = run_simulation(replace(cfg, rng_seed=seed), scheme, seed)
            rel = Path(scheme.value) / f"seed_{seed}"
            digests = write_metrics(res.records, out / rel, res.training_curve,
                                    {"scheme": scheme.value, "seed": seed})
            files.update({str(rel / name): d for name, d in digests.items()})
            s = res.summary
            log(f"{scheme.value:>16} seed={seed:<4} mean_delay={s['mean_delay_s']:.4f}s "
                f"acc={s['mean_accuracy']:.4f} breakouts={s['breakout_count']} "
                f"({time.time() - t0:.1f}s)")
    label = schemes[0].value if len(schemes) == 1 else "compare"
    manifest = RunManifest(config_path, label, list(seeds), str(out), files)
    return manifest.write()


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "oracle":
        from .oracles import run_suite
        results = run_suite(args.instances, args.seed)
        for name, ok, detail in results:
            print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
        return 0 if all(ok for _, ok, _ in results) else 1
    try:
        cfg = resolve_config(args)
    except ConfigError as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        for v in getattr(exc, "violations", None) or [str(exc)]:
            print(f"  - {v}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return 2
    if args.command == "validate":
        print("config ok")
        return 0
    out = os.environ.get("TWINFLOW_OUT") or args.out
    schemes = [SchemeKind.parse(args.scheme)] if args.command == "run" else list(ALL_SCHEMES)
    path = execute(cfg, schemes, args.seeds, out, args.config)
    print(f"manifest: {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
