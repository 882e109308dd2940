"""Config ingestion and metric sinks (CSV time series, JSON summaries, manifest)."""
from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from .config import ScenarioConfig, config_from_dict, validate_config
from .errors import EmptyRun, ParseError
from .sim import summarize

SLOT_HEADER = ("slot", "frame", "scheme", "seed", "mean_delay_s", "p95_delay_s",
               "mean_accuracy", "reward", "retrain_events", "breakout")


def fmt(x: float) -> str:
    """Shortest round-trip decimal; stable across runs and locales."""
    return repr(float(x))


def parse_config_text(text: str) -> dict:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None
    if not isinstance(data, dict):
        raise ParseError("top level must be a JSON object", 1, 1)
    return data


def load_config(path) -> ScenarioConfig:
    """Defaults overlaid by the file contents, then validated."""
    text = Path(path).read_text(encoding="utf-8")
    return validate_config(config_from_dict(parse_config_text(text)))


def dump_config(cfg: ScenarioConfig, path) -> None:
    Path(path).write_text(json.dumps(cfg.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _write(path: Path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def slots_csv(records) -> str:
    lines = [",".join(SLOT_HEADER)]
    for r in records:
        lines.append(",".join([str(r.slot), str(r.frame), r.scheme, str(r.seed), fmt(r.mean_delay),
                               fmt(r.p95_delay), fmt(r.mean_accuracy), fmt(r.reward),
                               str(r.retrain_events), str(int(r.breakout))]))
    return "\n".join(lines) + "\n"


def accuracy_csv(records) -> str:
    lines = ["slot,mu_id,accuracy"]
    for r in records:
        for mu, acc in zip(r.mu_ids, r.accuracy):
            lines.append(f"{r.slot},{int(mu)},{fmt(acc)}")
    return "\n".join(lines) + "\n"


def curve_csv(curve) -> str:
    lines = ["episode,mean_reward,epsilon"]
    lines += [f"{int(e)},{fmt(r)},{fmt(eps)}" for e, r, eps in curve]
    return "\n".join(lines) + "\n"


def write_metrics(records, out_dir, training_curve=(), extra_summary: dict | None = None) -> dict:
    """Write the per-run files; returns ``{filename: sha256}``.

    With no records the CSVs are header-only and the summary is refused
    (``EmptyRun`` propagates after the CSVs are on disk).
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write(out / "slots.csv", slots_csv(records))
    _write(out / "accuracy_trace.csv", accuracy_csv(records))
    _write(out / "training_curve.csv", curve_csv(training_curve))
    summary = summarize(records)
    if extra_summary:
        summary = {**extra_summary, **summary}
    _write(out / "summary.json", json.dumps(summary, indent=2, sort_keys=True) + "\n")
    names = ("slots.csv", "accuracy_trace.csv", "training_curve.csv", "summary.json")
    return {name: file_digest(out / name) for name in names}


def file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


@dataclass
class RunManifest:
    config_path: str | None
    scheme: str
    seeds: list
    output_dir: str
    files: dict = field(default_factory=dict)   # relative path -> sha256

    def write(self) -> Path:
        """Digests are taken from disk so they always match; written last."""
        root = Path(self.output_dir)
        self.files = {rel: file_digest(root / rel) for rel in sorted(self.files)}
        path = root / "manifest.json"
        _write(path, json.dumps({"config_path": self.config_path, "scheme": self.scheme,
                                 "seeds": list(self.seeds), "output_dir": str(self.output_dir),
                                 "files": self.files}, indent=2, sort_keys=True) + "\n")
        return path

    def verify(self) -> bool:
        root = Path(self.output_dir)
        return all(os.path.exists(root / rel) and file_digest(root / rel) == d
                   for rel, d in self.files.items())
