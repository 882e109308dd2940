import csv
import json

import numpy as np
import pytest

from twinflow.config import ScenarioConfig, validate_config
from twinflow.errors import EmptyRun, ParseError
from twinflow.io import (SLOT_HEADER, RunManifest, dump_config, file_digest, load_config,
                         slots_csv, write_metrics)
from twinflow.sim import SlotRecord, summarize


def rec(slot, delay, acc, reward, retrain=0, breakout=False):
    return SlotRecord(slot, slot // 10, "proposed", 7, np.arange(2), np.array([delay, delay]),
                      delay, delay, reward, retrain, np.array([acc, acc]), acc, np.zeros(3),
                      np.zeros(3), breakout, 0.0, slot % 10 == 0, 0.0, True, 1)


FIXTURE = [rec(0, 1.25, 0.9, -1.25), rec(1, 2.5, 0.875, -2.5, 1), rec(2, 0.1, 0.5, -0.1, 0, True)]
GOLDEN = (
    "slot,frame,scheme,seed,mean_delay_s,p95_delay_s,mean_accuracy,reward,retrain_events,breakout\n"
    "0,0,proposed,7,1.25,1.25,0.9,-1.25,0,0\n"
    "1,0,proposed,7,2.5,2.5,0.875,-2.5,1,0\n"
    "2,0,proposed,7,0.1,0.1,0.5,-0.1,0,1\n"
)


def test_empty_object_gives_defaults(tmp_path):
    p = tmp_path / "c.json"
    p.write_text("{}")
    assert load_config(p) == validate_config(ScenarioConfig())


def test_single_override(tmp_path):
    p = tmp_path / "c.json"
    p.write_text('{"accuracy_threshold": 0.9}')
    cfg = load_config(p)
    assert cfg.accuracy_threshold == 0.9
    assert cfg.num_bs == 3


def test_trailing_comma_reports_position(tmp_path):
    p = tmp_path / "c.json"
    p.write_text('{\n  "num_bs": 3,\n}\n')
    with pytest.raises(ParseError) as info:
        load_config(p)
    assert info.value.line == 3 and info.value.column == 1


def test_config_roundtrip(tmp_path, cfg):
    p = tmp_path / "resolved.json"
    dump_config(cfg, p)
    assert load_config(p) == cfg


def test_golden_slots_csv(tmp_path):
    assert slots_csv(FIXTURE) == GOLDEN
    write_metrics(FIXTURE, tmp_path)
    assert (tmp_path / "slots.csv").read_bytes() == GOLDEN.encode()


def test_header_only_on_empty_run(tmp_path):
    with pytest.raises(EmptyRun):
        write_metrics([], tmp_path)
    assert (tmp_path / "slots.csv").read_text() == ",".join(SLOT_HEADER) + "\n"


def test_summary_recomputed_from_csv(tmp_path):
    rng = np.random.default_rng(3)
    records = [rec(i, float(rng.uniform(0.5, 3)), float(rng.uniform(0.6, 0.95)),
                   float(-rng.uniform(0, 5)), int(rng.integers(0, 2)), bool(rng.random() < 0.1))
               for i in range(100)]
    write_metrics(records, tmp_path)
    with open(tmp_path / "slots.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len({len(r) for r in rows}) == 1
    delays = [float(r["mean_delay_s"]) for r in rows]
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["mean_delay_s"] == pytest.approx(sum(delays) / len(delays), rel=1e-12)
    assert summary["p95_delay_s"] == pytest.approx(float(np.percentile(delays, 95)), rel=1e-12)
    assert summary["retrain_count"] == sum(int(r["retrain_events"]) for r in rows)
    assert summary["breakout_count"] == sum(int(r["breakout"]) for r in rows)
    assert summary["total_reward"] == pytest.approx(sum(float(r["reward"]) for r in rows))
    assert summary == summarize(records)


def test_accuracy_trace_and_curve(tmp_path):
    write_metrics(FIXTURE, tmp_path, [(0, -3.0, 1.0), (1, -2.0, 0.5)])
    acc = (tmp_path / "accuracy_trace.csv").read_text().splitlines()
    assert acc[0] == "slot,mu_id,accuracy" and len(acc) == 1 + 2 * len(FIXTURE)
    curve = (tmp_path / "training_curve.csv").read_text().splitlines()
    assert curve == ["episode,mean_reward,epsilon", "0,-3.0,1.0", "1,-2.0,0.5"]


def test_manifest_digests_match(tmp_path):
    digests = write_metrics(FIXTURE, tmp_path / "run")
    files = {f"run/{k}": v for k, v in digests.items()}
    m = RunManifest(None, "proposed", [7], str(tmp_path), files)
    path = m.write()
    data = json.loads(path.read_text())
    for rel, digest in data["files"].items():
        assert file_digest(tmp_path / rel) == digest
    assert m.verify()
