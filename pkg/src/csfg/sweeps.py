"""Configuration-driven parameter sweeps and CSV emission.

A sweep is described by a JSON config (versioned schema) and produces CSV
artifacts with fixed column contracts; CSV is the sole interchange format
with the plotting frontend:

  metrics_1n / metrics_mn / sensitivity / synth_check
      one file per pump label: ``<experiment>_<label>.csv`` with columns
      (r, metric_name, value, runtime_ms)
  loss_peak_ce
      ``loss_peak_ce.csv`` with columns
      (iota_over_gamma, peak_ce_analytic, peak_ce_numeric)
  transfer_map
      one file per pump label and sweep point:
      ``transfer_map_<label>_r<i>.csv`` with columns (n, m, re, im), plus a
      ``transfer_map_<label>.json`` manifest mapping files to r values.

Values are written with ``repr`` so identical configs give byte-identical
artifacts; sweep points may be dispatched to a thread pool, but results are
always emitted in config order.
"""

from __future__ import annotations

import csv
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import FrequencyGrid, make_grid, matched_eta, params_at_ratio
from .kernel1n import build_kernels, lossy_coeffs, transfer_matrix
from .kernelmn import build_mn
from .metrics import (metrics_report_1n, metrics_report_mn,
                      metrics_report_mn_streaming, sf_indistinguishability)
from .pumps import (PumpEnvelope, hermite_gauss_pump, identity_multipump,
                    pump_from_unitary, single_bin_pump)

EXPERIMENTS = ("transfer_map", "metrics_1n", "metrics_mn", "loss_peak_ce",
               "sensitivity", "synth_check")
SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Invalid sweep config; ``payload`` is the machine-readable error object."""

    def __init__(self, message: str, field_name: str | None = None):
        super().__init__(message)
        self.payload = {"error": message}
        if field_name:
            self.payload["field"] = field_name


@dataclass(frozen=True)
class SweepConfig:
    experiment: str
    n_bins: int = 31
    oversample: int = 16
    pumps: tuple = ()
    r_values: tuple = ()
    iota_over_gamma: tuple = (0.0,)
    matched_coupling: bool = True
    m_channels: int | None = None
    seed: int = 1234
    out_dir: str = "out"
    full: dict | None = None

    @staticmethod
    def from_dict(raw: dict, use_full: bool = False) -> "SweepConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        version = raw.get("schema_version")
        if version != SCHEMA_VERSION:
            raise ConfigError(f"unsupported schema_version {version!r}; expected {SCHEMA_VERSION}",
                              "schema_version")
        experiment = raw.get("experiment")
        if experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {experiment!r}; one of {EXPERIMENTS}",
                              "experiment")
        full = raw.get("full")
        scale = dict(raw)
        if use_full and full:
            scale.update(full)
        n_bins = scale.get("n_bins", 31)
        oversample = scale.get("oversample", 16)
        if not isinstance(n_bins, int) or n_bins < 3 or n_bins % 2 == 0:
            raise ConfigError(f"n_bins must be an odd integer >= 3, got {n_bins!r}", "n_bins")
        if not isinstance(oversample, int) or oversample < 2:
            raise ConfigError(f"oversample must be an integer >= 2, got {oversample!r}",
                              "oversample")
        r_values = tuple(scale.get("r_values", raw.get("r_values", ())))
        if experiment != "loss_peak_ce":
            if not r_values:
                raise ConfigError("r_values must be a non-empty list", "r_values")
            if any(not isinstance(r, (int, float)) or r <= 0 for r in r_values):
                raise ConfigError("all r_values must be > 0", "r_values")
        iog = tuple(raw.get("iota_over_gamma", (0.0,)))
        if any(not isinstance(x, (int, float)) or x < 0 for x in iog):
            raise ConfigError("iota_over_gamma entries must be >= 0", "iota_over_gamma")
        pumps = tuple(raw.get("pumps", ()))
        if experiment in ("transfer_map", "metrics_1n") and not pumps:
            raise ConfigError(f"{experiment} needs a non-empty 'pumps' list", "pumps")
        for spec in pumps:
            if not isinstance(spec, dict) or "kind" not in spec or "label" not in spec:
                raise ConfigError(f"pump spec needs 'kind' and 'label': {spec!r}", "pumps")
            if spec["kind"] not in ("hg", "sf"):
                raise ConfigError(f"unknown pump kind {spec['kind']!r}", "pumps")
        m_channels = scale.get("m_channels", raw.get("m_channels"))
        if experiment in ("metrics_mn", "synth_check"):
            if m_channels is None:
                m_channels = n_bins
            if not isinstance(m_channels, int) or m_channels < 1 or m_channels > n_bins:
                raise ConfigError(f"m_channels must be in [1, n_bins], got {m_channels!r}",
                                  "m_channels")
        return SweepConfig(
            experiment=experiment, n_bins=n_bins, oversample=oversample, pumps=pumps,
            r_values=r_values, iota_over_gamma=iog,
            matched_coupling=bool(raw.get("matched_coupling", True)),
            m_channels=m_channels, seed=int(raw.get("seed", 1234)),
            out_dir=str(raw.get("out_dir", "out")), full=full,
        )

    @staticmethod
    def from_file(path, use_full: bool = False) -> "SweepConfig":
        try:
            with open(path) as fh:
                raw = json.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}")
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}")
        return SweepConfig.from_dict(raw, use_full=use_full)


def _build_pump(spec: dict, grid: FrequencyGrid) -> PumpEnvelope:
    if spec["kind"] == "hg":
        return hermite_gauss_pump(spec.get("order", 2), spec.get("width"), grid)
    return single_bin_pump(spec.get("bin", 0), grid)


def _write_rows(path: Path, header: list, rows: list) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([x if isinstance(x, (str, int)) else repr(float(x)) for x in row])


def _metric_rows(r: float, report, runtime_ms: float) -> list:
    rows = []
    for name, value in report.as_dict().items():
        if name == "config_hash" or value is None:
            continue
        rows.append([repr(float(r)), name, value, runtime_ms])
    return rows


def _map_points(fn, points, threads: int):
    if threads <= 1:
        return [fn(pt) for pt in points]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, points))


def run_sweep(config: SweepConfig, out_dir, stream: bool = False,
              threads: int = 1) -> list[Path]:
    """Execute one experiment config and write its CSV artifacts."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    grid = make_grid(config.n_bins, config.oversample)
    iota_ratio = config.iota_over_gamma[0] if config.iota_over_gamma else 0.0
    written: list[Path] = []

    def gate_params(r):
        return params_at_ratio(r, iota_over_gamma=iota_ratio,
                               matched=config.matched_coupling)

    if config.experiment == "loss_peak_ce":
        rows = []
        for ratio in config.iota_over_gamma:
            p = matched_eta(params_at_ratio(0.1, iota_over_gamma=ratio))
            mu0, _, _ = lossy_coeffs(p)
            rows.append([repr(float(ratio)), 1.0 / (1.0 + ratio), mu0**2])
        path = out / "loss_peak_ce.csv"
        _write_rows(path, ["iota_over_gamma", "peak_ce_analytic", "peak_ce_numeric"], rows)
        written.append(path)
        return written

    if config.experiment == "sensitivity":
        def point(r):
            t0 = time.perf_counter()
            val = sf_indistinguishability(gate_params(r), grid)
            return [repr(float(r)), "sf_indistinguishability", val,
                    (time.perf_counter() - t0) * 1e3]
        rows = _map_points(point, config.r_values, threads)
        path = out / "sensitivity.csv"
        _write_rows(path, ["r", "metric_name", "value", "runtime_ms"], rows)
        written.append(path)
        return written

    if config.experiment == "metrics_1n":
        for spec in config.pumps:
            def point(r, _spec=spec):
                t0 = time.perf_counter()
                report = metrics_report_1n(build_kernels(gate_params(r), _build_pump(_spec, grid)))
                return _metric_rows(r, report, (time.perf_counter() - t0) * 1e3)
            rows = [row for chunk in _map_points(point, config.r_values, threads)
                    for row in chunk]
            path = out / f"metrics_1n_{spec['label']}.csv"
            _write_rows(path, ["r", "metric_name", "value", "runtime_ms"], rows)
            written.append(path)
        return written

    if config.experiment == "metrics_mn":
        mp = identity_multipump(config.m_channels, grid)

        def point(r):
            t0 = time.perf_counter()
            if stream:
                report = metrics_report_mn_streaming(gate_params(r), mp, grid)
            else:
                kset, _ = build_mn(gate_params(r), mp, grid, with_idler=False)
                report = metrics_report_mn(kset)
            return _metric_rows(r, report, (time.perf_counter() - t0) * 1e3)
        rows = [row for chunk in _map_points(point, config.r_values, threads)
                for row in chunk]
        path = out / f"metrics_mn_identity{config.m_channels}.csv"
        _write_rows(path, ["r", "metric_name", "value", "runtime_ms"], rows)
        written.append(path)
        return written

    if config.experiment == "synth_check":
        rng = np.random.default_rng(config.seed)
        shape = (config.n_bins, config.m_channels)
        target = np.linalg.qr(rng.normal(size=shape) + 1j * rng.normal(size=shape))[0].T
        mp = pump_from_unitary(target, grid)

        def point(r):
            t0 = time.perf_counter()
            _, tset = build_mn(gate_params(r), mp, grid, with_idler=False)
            dev = float(np.max(np.abs(tset.synthesized_unitary() - target)))
            return [[repr(float(r)), "synth_max_dev", dev,
                     (time.perf_counter() - t0) * 1e3]]
        rows = [row for chunk in _map_points(point, config.r_values, threads)
                for row in chunk]
        path = out / f"synth_check_m{config.m_channels}.csv"
        _write_rows(path, ["r", "metric_name", "value", "runtime_ms"], rows)
        written.append(path)
        return written

    # transfer_map
    for spec in config.pumps:
        manifest = {"pump": spec, "grid": {"n_bins": config.n_bins,
                                           "oversample": config.oversample},
                    "files": []}
        for i, r in enumerate(config.r_values):
            t0 = time.perf_counter()
            ts = transfer_matrix(build_kernels(gate_params(r), _build_pump(spec, grid)))
            rows = []
            for a, n in enumerate(grid.bins):
                for b, m in enumerate(grid.bins):
                    v = ts.gs_tilde[a, b]
                    rows.append([int(n), int(m), v.real, v.imag])
            path = out / f"transfer_map_{spec['label']}_r{i}.csv"
            _write_rows(path, ["n", "m", "re", "im"], rows)
            manifest["files"].append({"path": path.name, "r": r,
                                      "runtime_ms": (time.perf_counter() - t0) * 1e3})
            written.append(path)
        mpath = out / f"transfer_map_{spec['label']}.json"
        with open(mpath, "w") as fh:
            json.dump(manifest, fh, indent=2)
        written.append(mpath)
    return written
