import math
from dataclasses import replace

import numpy as np
import pytest

from csfg.core import GateParams, make_grid, params_at_ratio
from csfg.kernel1n import build_kernels
from csfg.kernelmn import build_mn
from csfg.metrics import (MetricsReport, NoConversionError, adjacent_overlap,
                          export_report_csv, fm_metrics_1n, fm_metrics_mn,
                          hd_metrics_mn, metrics_report_1n, metrics_report_mn,
                          metrics_report_mn_streaming, pc_metrics_1n, pc_metrics_mn,
                          sf_indistinguishability)
from csfg.pumps import (MultiPump, hermite_gauss_pump, identity_multipump,
                        pump_from_unitary, single_bin_pump)


def random_multipump(m_ch, grid, rng):
    q = np.linalg.qr(rng.normal(size=(grid.n_bins, m_ch))
                     + 1j * rng.normal(size=(grid.n_bins, m_ch)))[0].T
    return pump_from_unitary(q, grid)


def test_sf_ce_unity_quick():
    grid = make_grid(31, 64)
    ks = build_kernels(params_at_ratio(0.1), single_bin_pump(0, grid))
    _, ce = fm_metrics_1n(ks)
    assert abs(ce - 1.0) < 1e-6


def test_hg2_asymptotic_fidelity():
    grid = make_grid(31, 16)
    ks = build_kernels(params_at_ratio(1e-3), hermite_gauss_pump(2, None, grid))
    fid, ce = fm_metrics_1n(ks)
    assert fid >= 0.999
    assert ce >= 0.999


def test_small_eta_ce_vanishes():
    grid = make_grid(11, 8)
    gamma = 2 * math.pi * 0.1
    ces = []
    for eta in (0.3, 0.1, 0.03):
        ks = build_kernels(GateParams(gamma=gamma, eta=eta), single_bin_pump(0, grid))
        ces.append(fm_metrics_1n(ks)[1])
    assert ces[0] > ces[1] > ces[2]
    assert ces[2] < 1e-2


def test_eta_zero_raises_no_conversion():
    grid = make_grid(11, 8)
    ks = build_kernels(GateParams(gamma=1.0, eta=0.0), single_bin_pump(0, grid))
    with pytest.raises(NoConversionError, match="no conversion"):
        fm_metrics_1n(ks)
    with pytest.raises(NoConversionError):
        pc_metrics_1n(ks)


def test_pc_dominates_fm_1n():
    grid = make_grid(11, 8)
    for r in (0.05, 0.3):
        for pump in (hermite_gauss_pump(2, None, grid), single_bin_pump(1, grid)):
            ks = build_kernels(params_at_ratio(r), pump)
            fm_f, fm_ce = fm_metrics_1n(ks)
            pc_f, pc_ce = pc_metrics_1n(ks)
            assert fm_f <= pc_f + 1e-12
            assert fm_ce <= pc_ce + 1e-12


def test_sf_pump_pc_fm_close():
    # the flat pump's kernel is nearly rank-1 with a flat output mode, so the
    # photon-counting and full-matrix figures nearly coincide
    grid = make_grid(31, 16)
    ks = build_kernels(params_at_ratio(0.1), single_bin_pump(0, grid))
    fm_f, _ = fm_metrics_1n(ks)
    pc_f, _ = pc_metrics_1n(ks)
    assert pc_f - fm_f < 5e-3


def test_rank1_flat_kernel_perfect_metrics():
    # ideal factorized map: constant output profile times the pump row
    grid = make_grid(11, 8)
    p = params_at_ratio(0.1)
    pump = hermite_gauss_pump(2, None, grid)
    ks = build_kernels(p, pump)
    beta_t = pump.time_samples()
    ideal = replace(ks, gs=np.full((grid.n_time, 1), 0.7 + 0.2j) * beta_t[None, :])
    fm_f, _ = fm_metrics_1n(ideal)
    pc_f, _ = pc_metrics_1n(ideal)
    assert fm_f == pytest.approx(1.0, abs=1e-12)
    assert pc_f == pytest.approx(1.0, abs=1e-12)


def test_rank1_flat_kernel_perfect_hd():
    grid = make_grid(11, 8)
    p = params_at_ratio(0.1)
    mp = identity_multipump(3, grid)
    kset, _ = build_mn(p, mp, grid, with_idler=False)
    beta = mp.time_matrix()
    flat = np.ones(grid.n_time, dtype=complex) * 0.3
    ideal = replace(kset, Gs=flat[None, :, None] * beta[:, None, :])
    hd_f, _ = hd_metrics_mn(ideal)
    assert hd_f == pytest.approx(1.0, abs=1e-12)


def test_mn_m1_reduces_to_1n_metrics():
    grid = make_grid(11, 16)
    p = params_at_ratio(0.2)
    pump = hermite_gauss_pump(2, None, grid)
    ks = build_kernels(p, pump)
    kset, _ = build_mn(p, MultiPump(envelopes=[pump]), grid, with_idler=False)
    assert fm_metrics_mn(kset) == pytest.approx(fm_metrics_1n(ks), abs=1e-13)
    assert pc_metrics_mn(kset) == pytest.approx(pc_metrics_1n(ks), abs=1e-13)


def test_pc_invariant_under_channel_phases():
    grid = make_grid(11, 8)
    rng = np.random.default_rng(4)
    mp = random_multipump(3, grid, rng)
    kset, _ = build_mn(params_at_ratio(0.2), mp, grid, with_idler=False)
    phases = np.exp(1j * rng.uniform(0, 2 * np.pi, size=3))
    phased = replace(kset, Gs=phases[:, None, None] * kset.Gs)
    assert pc_metrics_mn(phased) == pytest.approx(pc_metrics_mn(kset), abs=1e-12)
    # FM is phase-sensitive, confirming the phases were not trivial
    assert abs(fm_metrics_mn(phased)[0] - fm_metrics_mn(kset)[0]) > 1e-6


def test_global_pump_phase_leaves_metrics():
    grid = make_grid(11, 8)
    p = params_at_ratio(0.15)
    pump = hermite_gauss_pump(2, None, grid)
    from csfg.pumps import PumpEnvelope
    phased = PumpEnvelope(coeffs=pump.coeffs * np.exp(0.7j), grid=grid)
    a = metrics_report_1n(build_kernels(p, pump))
    b = metrics_report_1n(build_kernels(p, phased))
    for name in ("fm_fidelity", "fm_ce", "pc_fidelity", "pc_ce"):
        assert abs(a.as_dict()[name] - b.as_dict()[name]) < 1e-12


def test_ordering_and_range_random_configs():
    rng = np.random.default_rng(2718)
    for _ in range(30):
        n_bins = int(rng.choice([11, 31]))
        m_ch = int(rng.choice([1, 3, 5]))
        r = float(np.exp(rng.uniform(np.log(1e-3), np.log(0.5))))
        grid = make_grid(n_bins, 8)
        mp = random_multipump(m_ch, grid, rng)
        kset, _ = build_mn(params_at_ratio(r), mp, grid, with_idler=False)
        rep = metrics_report_mn(kset)
        vals = [rep.fm_fidelity, rep.fm_ce, rep.pc_fidelity, rep.pc_ce,
                rep.hd_fidelity, rep.hd_ce]
        assert all(0.0 <= v <= 1.0 + 1e-9 for v in vals)
        assert rep.fm_fidelity <= rep.pc_fidelity + 1e-9
        assert rep.fm_ce <= rep.pc_ce + 1e-9
        assert rep.fm_fidelity <= rep.hd_fidelity + 1e-9
        assert rep.hd_ce == rep.fm_ce


def test_identity_multipump_asymptotic_floors():
    grid = make_grid(11, 16)
    mp = identity_multipump(11, grid)
    for r, floor in ((1e-3, 0.99), (1e-4, 0.999)):
        kset, _ = build_mn(params_at_ratio(r), mp, grid, with_idler=False)
        rep = metrics_report_mn(kset)
        vals = [rep.fm_fidelity, rep.fm_ce, rep.pc_fidelity, rep.pc_ce,
                rep.hd_fidelity, rep.hd_ce]
        assert min(vals) >= floor


def test_streaming_report_matches_materialized():
    grid = make_grid(11, 8)
    p = params_at_ratio(0.25)
    mp = identity_multipump(5, grid)
    kset, _ = build_mn(p, mp, grid, with_idler=False)
    a = metrics_report_mn(kset)
    b = metrics_report_mn_streaming(p, mp, grid)
    for name, val in a.as_dict().items():
        if isinstance(val, float):
            assert abs(val - b.as_dict()[name]) < 1e-12
    assert a.config_hash == b.config_hash


def test_adjacent_overlap_constant_profile():
    assert adjacent_overlap(np.ones(100)) == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(NoConversionError):
        adjacent_overlap(np.zeros(5))


def test_indistinguishability_monotone_and_limits():
    grid = make_grid(31, 8)
    vals = [sf_indistinguishability(params_at_ratio(r), grid)
            for r in (0.01, 0.05, 0.1, 0.5)]
    assert all(b > a for a, b in zip(vals, vals[1:]))
    assert vals[0] < 0.01          # resolved bins at small r
    assert all(0.0 <= v <= 1.0 for v in vals)


def test_export_report_csv(tmp_path):
    rep = MetricsReport(fm_fidelity=0.9, fm_ce=0.8, pc_fidelity=0.95, pc_ce=0.85,
                        hd_fidelity=None, hd_ce=None, config_hash="abc123")
    path = tmp_path / "report.csv"
    export_report_csv(rep, path, sidecar={"r": 0.1})
    lines = path.read_text().splitlines()
    assert lines[0].startswith("fm_fidelity,")
    assert lines[1].split(",")[:2] == ["0.9", "0.8"]
    assert (tmp_path / "report.json").exists()
