import math
import numpy as np
import pytest

from csfg.core import GateParams, make_grid, params_at_ratio
from csfg.kernel1n import build_kernels
from csfg.kernelmn import (NearSingularPeriodicSolveError, build_mn,
                           commutator_residual_mn, periodic_kernel, propagator,
                           rank1_step_factors, stream_gs_rows)
from csfg.oracle import dense_expm
from csfg.pumps import (MultiPump, hermite_gauss_pump, identity_multipump,
                        pump_from_unitary, single_bin_pump)

RNG = np.random.default_rng(777)


def random_multipump(m_ch, grid, rng=RNG):
    q = np.linalg.qr(rng.normal(size=(grid.n_bins, m_ch))
                     + 1j * rng.normal(size=(grid.n_bins, m_ch)))[0].T
    return pump_from_unitary(q, grid)


def test_propagator_eta_zero_exact():
    grid = make_grid(11, 8)
    p = GateParams(gamma=1.3, eta=0.0)
    mp = identity_multipump(3, grid)
    for n_steps in (grid.n_time, 2 * grid.n_time):
        chain = propagator(p, mp, grid, n_steps)
        expected = math.exp(-p.gamma * grid.T / 2) * np.eye(3)
        np.testing.assert_allclose(chain.full, expected, atol=1e-14)


def test_propagator_step_misalignment():
    grid = make_grid(11, 8)
    mp = identity_multipump(3, grid)
    with pytest.raises(ValueError, match="misalignment"):
        propagator(params_at_ratio(0.1), mp, grid, grid.n_time + 1)
    with pytest.raises(ValueError, match="misalignment"):
        propagator(params_at_ratio(0.1), mp, grid, grid.n_time // 2)


def test_propagator_m1_sf_scalar_chain():
    # flat |beta|^2: the chain reduces to exp(-(gamma/2 + eta^2/(2T)) (t - t0))
    grid = make_grid(11, 8)
    p = params_at_ratio(0.3)
    mp = MultiPump(envelopes=[single_bin_pump(0, grid)])
    chain = propagator(p, mp, grid)
    expected = math.exp(-(p.gamma / 2 + p.eta**2 / (2 * grid.T)) * grid.T)
    assert chain.full[0, 0] == pytest.approx(expected, rel=1e-12)


def test_propagator_richardson_order_two():
    grid = make_grid(5, 8)
    p = params_at_ratio(0.3)
    mp = random_multipump(3, grid)
    ref = propagator(p, mp, grid, 16 * grid.n_time).full
    devs = [np.max(np.abs(propagator(p, mp, grid, k * grid.n_time).full - ref))
            for k in (1, 2, 4)]
    assert 3.0 < devs[0] / devs[1] < 5.0
    assert 3.0 < devs[1] / devs[2] < 5.5


def test_rank1_step_vs_dense_expm():
    p = params_at_ratio(0.2, iota_over_gamma=0.3)
    worst = 0.0
    for _ in range(20):
        m_ch = int(RNG.integers(2, 9))
        beta = RNG.normal(size=m_ch) + 1j * RNG.normal(size=m_ch)
        h = float(RNG.uniform(1e-3, 0.05))
        factor = rank1_step_factors(p, beta[:, None], h)[0]
        mat = (p.gamma + p.iota) / 2 * np.eye(m_ch) + p.eta**2 / 2 * np.outer(beta, beta.conj())
        worst = max(worst, float(np.max(np.abs(factor - dense_expm(-mat * h)))))
    assert worst < 1e-12


def test_step_factors_are_contractions():
    # MM(t) has a nonnegative-definite Hermitian part, so every step factor
    # has singular values <= 1 and P(t, t) is the identity
    grid = make_grid(11, 8)
    p = params_at_ratio(0.3)
    mp = random_multipump(3, grid, np.random.default_rng(8))
    chain = propagator(p, mp, grid)
    svals = np.linalg.svd(chain.steps, compute_uv=False)
    assert svals.max() <= 1.0 + 1e-12
    kev = periodic_kernel(chain)
    np.testing.assert_allclose(kev.propagate(17, 17), np.eye(3), atol=1e-15)


def test_rank1_step_handles_zero_envelope():
    p = params_at_ratio(0.2)
    beta = np.zeros((3, 2), dtype=complex)
    factors = rank1_step_factors(p, beta, 0.01)
    expected = math.exp(-p.gamma * 0.005) * np.eye(3)
    np.testing.assert_allclose(factors[0], expected, atol=1e-15)


def test_periodic_kernel_eta_zero_matches_1n():
    grid = make_grid(11, 8)
    p = GateParams(gamma=2.1, eta=0.0)
    mp = identity_multipump(3, grid)
    kev = periodic_kernel(propagator(p, mp, grid))
    ks = build_kernels(p, single_bin_pump(0, grid))
    # gamma * K must reproduce the single-channel idler kernel on each diagonal
    col = p.gamma * kev.column(40)
    for k in range(3):
        np.testing.assert_allclose(col[:, k, k], ks.gi_smooth[:, 40], atol=1e-12)
    off = col.copy()
    for k in range(3):
        off[:, k, k] = 0
    assert np.max(np.abs(off)) < 1e-14


def test_periodic_kernel_periodicity():
    grid = make_grid(11, 8)
    mp = random_multipump(3, grid)
    kev = periodic_kernel(propagator(params_at_ratio(0.2), mp, grid))
    k_left, k_right = kev.boundary_values(37)
    assert np.max(np.abs(k_left - k_right)) < 1e-13


def test_periodic_kernel_m1_matches_1n_kernel():
    grid = make_grid(11, 16)
    p = params_at_ratio(0.15)
    pump = hermite_gauss_pump(2, None, grid)
    kev = periodic_kernel(propagator(p, MultiPump(envelopes=[pump]), grid))
    ks = build_kernels(p, pump)
    b = 57
    col = kev.column(b)[:, 0, 0]
    np.testing.assert_allclose(p.gamma * col, ks.gi_smooth[:, b], atol=1e-12)


def test_periodic_solve_near_singular():
    grid = make_grid(3, 8)
    mp = identity_multipump(1, grid)
    p = GateParams(gamma=1e-15, eta=0.0)
    with pytest.raises(NearSingularPeriodicSolveError, match="near-singular"):
        periodic_kernel(propagator(p, mp, grid))


def _ode_residual(p, mp, grid, b):
    kev = periodic_kernel(propagator(p, mp, grid))
    col = kev.column(b)
    beta = mp.time_matrix()
    m_ch = mp.n_channels
    worst = 0.0
    for a in range(1, grid.n_time - 1):
        if abs(a - b) <= 1:
            continue
        mat = (p.gamma / 2) * np.eye(m_ch) \
            + (p.eta**2 / 2) * np.outer(beta[:, a], beta[:, a].conj())
        resid = (col[a + 1] - col[a - 1]) / (2 * grid.dt) + mat @ col[a]
        worst = max(worst, float(np.max(np.abs(resid))))
    return worst


def test_kernel_ode_residual_flat_pump_bound():
    # dK/dt + M(t) K = 0 away from t = u; for a flat pump the coefficient
    # matrix is constant and the centered-difference residual sits well
    # below 10 dt^2
    grid = make_grid(11, 16)
    p = params_at_ratio(0.1)
    mp = MultiPump(envelopes=[single_bin_pump(0, grid)])
    assert _ode_residual(p, mp, grid, 70) < 10 * grid.dt**2


def test_kernel_ode_residual_order_two():
    # wide-band pumps carry a larger constant (third derivative scales with
    # the pump bandwidth cubed) but the residual still decays at order 2
    p = params_at_ratio(0.1)
    rng = np.random.default_rng(777)
    q = np.linalg.qr(rng.normal(size=(11, 2)) + 1j * rng.normal(size=(11, 2)))[0].T
    res = {}
    for ov in (16, 32):
        grid = make_grid(11, ov)
        mp = pump_from_unitary(q, grid)
        res[ov] = _ode_residual(p, mp, grid, 70 * (ov // 16))
    assert 3.0 < res[16] / res[32] < 5.0


def test_build_mn_identity_asymptotic():
    grid = make_grid(11, 16)
    mp = identity_multipump(3, grid)
    _, tset = build_mn(params_at_ratio(1e-3), mp, grid, with_idler=False)
    row0 = grid.bin_index(0)
    for i in range(3):
        k = i - 1
        target = np.zeros(11)
        target[grid.bin_index(k)] = 1.0
        assert np.max(np.abs(tset.Gs_tilde[i, row0, :] - target)) < 1e-2
        other = np.abs(tset.Gs_tilde[i])
        other[row0, :] = 0.0
        assert other.max() < 1e-2


def test_build_mn_m1_reduces_to_1n():
    grid = make_grid(11, 16)
    p = params_at_ratio(0.2)
    pump = hermite_gauss_pump(2, None, grid)
    from csfg.kernel1n import transfer_matrix
    ks = build_kernels(p, pump)
    ts = transfer_matrix(ks)
    kset, tset = build_mn(p, MultiPump(envelopes=[pump]), grid)
    assert np.max(np.abs(kset.Gs[0] - ks.gs)) < 1e-8
    assert np.max(np.abs(kset.Gi_smooth[0, 0] - ks.gi_smooth)) < 1e-8
    assert np.max(np.abs(tset.Gs_tilde[0] - ts.gs_tilde)) < 1e-8
    assert np.max(np.abs(tset.Gi_tilde[0, 0] - ts.gi_tilde)) < 1e-8


def test_build_mn_synthesis_from_random_isometry():
    grid = make_grid(5, 16)
    rng = np.random.default_rng(21)
    target = np.linalg.qr(rng.normal(size=(5, 2)) + 1j * rng.normal(size=(5, 2)))[0].T
    mp = pump_from_unitary(target, grid)
    devs = {}
    for r in (1e-3, 1e-4):
        _, tset = build_mn(params_at_ratio(r), mp, grid, with_idler=False)
        devs[r] = np.max(np.abs(tset.synthesized_unitary() - target))
    assert devs[1e-3] < 1e-2
    assert devs[1e-4] < devs[1e-3]


def test_stacked_isometry_within_tolerance():
    # The N x N stacked isometry carries the same bin-window truncation as
    # the single-channel case (edge rows couple outside the window), so it
    # saturates near |mu_edge|^2; the tolerance holds and the commutator
    # measure (next test) shows the quadrature convergence.
    grid = make_grid(11, 16)
    mp = identity_multipump(3, grid)
    _, tset = build_mn(params_at_ratio(0.1), mp, grid)
    assert tset.stacked_isometry_residual() < 1e-3


def test_commutator_residual_mn_converges():
    p = params_at_ratio(0.3)
    res = {}
    for ov in (8, 16):
        grid = make_grid(11, ov)
        mp = random_multipump(2, grid, np.random.default_rng(5))
        kset, _ = build_mn(p, mp, grid)
        res[ov] = commutator_residual_mn(kset)
    assert res[16] < 1e-3
    assert 2.5 < res[8] / res[16] < 6.0


def test_cross_channel_leakage_vanishes():
    # off-resonant output rows of each channel shrink as r -> 0
    grid = make_grid(11, 16)
    mp = random_multipump(3, grid, np.random.default_rng(9))
    row0 = grid.bin_index(0)

    def leakage(r):
        _, tset = build_mn(params_at_ratio(r), mp, grid, with_idler=False)
        off = np.abs(tset.Gs_tilde.copy())
        off[:, row0, :] = 0.0
        return off.max()

    l_01, l_001 = leakage(0.01), leakage(0.001)
    assert l_001 < l_01 / 5
    assert l_001 < 1e-2


def test_streaming_rows_match_materialized():
    grid = make_grid(11, 8)
    p = params_at_ratio(0.2)
    mp = random_multipump(3, grid, np.random.default_rng(31))
    kset, _ = build_mn(p, mp, grid, with_idler=False)
    for a, block in stream_gs_rows(p, mp, grid):
        np.testing.assert_array_equal(block, kset.Gs[:, a, :])


def test_lossy_mn_bath_column():
    grid = make_grid(11, 8)
    p = params_at_ratio(0.2, iota_over_gamma=0.5)
    mp = identity_multipump(3, grid)
    kset, tset = build_mn(p, mp, grid)
    assert kset.loss_smooth is not None
    np.testing.assert_allclose(kset.loss_smooth,
                               math.sqrt(p.iota / p.gamma) * kset.Gi_smooth, atol=1e-14)
    assert tset.loss_tilde is not None
    assert commutator_residual_mn(kset) < 1e-3


def test_export_transfer_csv_mn(tmp_path):
    grid = make_grid(5, 8)
    mp = identity_multipump(3, grid)
    _, tset = build_mn(params_at_ratio(0.1), mp, grid)
    from csfg.kernelmn import export_transfer_csv_mn
    written = export_transfer_csv_mn(tset, tmp_path, basename="t")
    names = {p.name for p in written}
    assert names == {"t_gs.csv", "t_gi.csv", "t.json"}
    gs_lines = (tmp_path / "t_gs.csv").read_text().splitlines()
    assert gs_lines[0] == "k,n,m,re,im"
    assert len(gs_lines) == 1 + 3 * 25
    gi_lines = (tmp_path / "t_gi.csv").read_text().splitlines()
    assert gi_lines[0] == "k,k_in,n,m,re,im"
    assert len(gi_lines) == 1 + 9 * 25
    import json
    sidecar = json.loads((tmp_path / "t.json").read_text())
    assert len(sidecar["pump_hashes"]) == 3


def test_with_idler_false_skips_tensors():
    grid = make_grid(11, 8)
    mp = identity_multipump(3, grid)
    kset, tset = build_mn(params_at_ratio(0.1), mp, grid, with_idler=False)
    assert kset.Gi_smooth is None and tset.Gi_tilde is None
    with pytest.raises(ValueError, match="idler"):
        commutator_residual_mn(kset)
    with pytest.raises(ValueError, match="idler"):
        tset.stacked_isometry_residual()
