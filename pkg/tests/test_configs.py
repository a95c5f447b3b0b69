"""The shipped sweep configs parse, run, and meet their headline bounds."""

import csv
from pathlib import Path

import pytest

from csfg.sweeps import SweepConfig, run_sweep

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


@pytest.mark.parametrize("path", sorted(CONFIG_DIR.glob("*.json")),
                         ids=lambda p: p.stem)
def test_config_parses(path):
    config = SweepConfig.from_file(path)
    assert config.experiment
    if config.full:
        scaled = SweepConfig.from_file(path, use_full=True)
        assert scaled.n_bins >= config.n_bins


def test_fig_metrics_1n_sf_ce_unity(tmp_path):
    # the headline single-frequency-bin property on the shipped grid: the
    # conversion efficiency column stays unity to 1e-6 across the whole sweep
    config = SweepConfig.from_file(CONFIG_DIR / "fig_metrics_1n.json")
    run_sweep(config, tmp_path)
    with open(tmp_path / "metrics_1n_sf.csv", newline="") as fh:
        rows = [r for r in csv.DictReader(fh) if r["metric_name"] == "fm_ce"]
    assert len(rows) == len(config.r_values)
    for row in rows:
        assert abs(float(row["value"]) - 1.0) < 1e-6, row


def test_fig_metrics_mn_monotone(tmp_path):
    config = SweepConfig.from_file(CONFIG_DIR / "fig_metrics_mn.json")
    run_sweep(config, tmp_path, stream=True)
    with open(tmp_path / "metrics_mn_identity31.csv", newline="") as fh:
        fids = [float(r["value"]) for r in csv.DictReader(fh)
                if r["metric_name"] == "fm_fidelity"]
    assert all(b < a for a, b in zip(fids, fids[1:]))
