import numpy as np
import pytest

from csfg.core import make_grid
from csfg.pumps import (MultiPump, PumpEnvelope, export_pump_csv, hermite_gauss_pump,
                        identity_multipump, import_pump_csv, pump_from_unitary,
                        single_bin_pump)


def test_hg0_is_normalized_gaussian():
    grid = make_grid(101, 8)
    env = hermite_gauss_pump(0, 5.0, grid)
    assert np.sum(np.abs(env.coeffs) ** 2) == pytest.approx(1.0, abs=1e-14)
    assert np.argmax(np.abs(env.coeffs)) == grid.bin_index(0)
    assert np.all(env.coeffs.real > 0)


def test_hg2_paper_scale_pump():
    # second-order mode, sigma = 10 bins on the 101-bin grid
    grid = make_grid(101, 8)
    env = hermite_gauss_pump(2, 10.0, grid)
    assert np.sum(np.abs(env.coeffs) ** 2) == pytest.approx(1.0, abs=1e-14)
    # H2 changes sign at |omega/sigma| = 1/sqrt(2)
    assert env.coeffs[grid.bin_index(0)].real < 0
    assert env.coeffs[grid.bin_index(20)].real > 0


def test_hg_orthogonality():
    grid = make_grid(101, 8)
    e1 = hermite_gauss_pump(1, 10.0, grid)
    e2 = hermite_gauss_pump(2, 10.0, grid)
    assert abs(e1.inner(e2)) < 1e-10


def test_hg_aliased_pump_rejected():
    grid = make_grid(11, 8)
    with pytest.raises(ValueError, match="aliased"):
        hermite_gauss_pump(2, 8.0, grid)


def test_hg_argument_validation():
    grid = make_grid(11, 8)
    with pytest.raises(ValueError):
        hermite_gauss_pump(-1, 2.0, grid)
    with pytest.raises(ValueError):
        hermite_gauss_pump(2, 0.0, grid)


def test_single_bin_time_profiles():
    grid = make_grid(31, 8)
    env0 = single_bin_pump(0, grid)
    beta_t = env0.time_samples()
    np.testing.assert_allclose(beta_t, np.full(grid.n_time, 1.0 / np.sqrt(grid.T)),
                               atol=1e-14)
    env1 = single_bin_pump(1, grid)
    expected = np.exp(-1j * grid.d_omega * grid.times) / np.sqrt(grid.T)
    np.testing.assert_allclose(env1.time_samples(), expected, atol=1e-13)
    assert np.linalg.norm(env1.coeffs) == 1.0


def test_single_bin_out_of_range():
    grid = make_grid(11, 8)
    with pytest.raises(ValueError, match="outside"):
        single_bin_pump(6, grid)


def test_envelope_norm_enforced():
    grid = make_grid(11, 8)
    bad = np.zeros(11, dtype=complex)
    bad[0] = 0.5
    with pytest.raises(ValueError, match="norm"):
        PumpEnvelope(coeffs=bad, grid=grid)


def test_pump_from_identity_equals_identity_multipump():
    grid = make_grid(3, 8)
    via_unitary = pump_from_unitary(np.eye(3), grid)
    direct = identity_multipump(3, grid)
    for a, b in zip(via_unitary.envelopes, direct.envelopes):
        np.testing.assert_allclose(a.coeffs, b.coeffs, atol=1e-15)
    # channel k carries the tone at bin -k, with a global minus sign
    for i, env in enumerate(direct.envelopes):
        k = i - 1
        expected = np.zeros(3, dtype=complex)
        expected[grid.bin_index(-k)] = -1.0
        np.testing.assert_allclose(env.coeffs, expected, atol=1e-15)


def test_pump_from_dft_matrix():
    n = 3
    dft = np.exp(-2j * np.pi * np.outer(np.arange(n), np.arange(n)) / n) / np.sqrt(n)
    grid = make_grid(3, 8)
    mp = pump_from_unitary(dft, grid)
    assert np.max(np.abs(mp.gram() - np.eye(n))) < 1e-12
    for env in mp.envelopes:
        np.testing.assert_allclose(np.abs(env.coeffs), np.full(n, 1 / np.sqrt(n)),
                                   atol=1e-12)


def test_pump_from_unitary_round_trip():
    rng = np.random.default_rng(0)
    grid = make_grid(5, 8)
    target = np.linalg.qr(rng.normal(size=(5, 2)) + 1j * rng.normal(size=(5, 2)))[0].T
    mp = pump_from_unitary(target, grid)
    assert mp.n_channels == 2
    np.testing.assert_allclose(mp.as_unitary(), target, atol=1e-12)
    np.testing.assert_allclose(mp.target_unitary, target, atol=0)


def test_pump_from_unitary_rejects_non_isometry():
    grid = make_grid(5, 8)
    bad = np.ones((2, 5)) / np.sqrt(5)
    with pytest.raises(ValueError, match=r"worst pair \(0, 1\)"):
        pump_from_unitary(bad, grid)
    with pytest.raises(ValueError, match="columns"):
        pump_from_unitary(np.eye(3), grid)


def test_identity_multipump_single_channel():
    grid = make_grid(11, 8)
    mp = identity_multipump(1, grid)
    ref = single_bin_pump(0, grid)
    np.testing.assert_allclose(mp.envelopes[0].coeffs, -ref.coeffs, atol=1e-15)


def test_identity_multipump_gram_exact():
    grid = make_grid(11, 8)
    mp = identity_multipump(5, grid)
    assert np.max(np.abs(mp.gram() - np.eye(5))) == 0.0


def test_identity_multipump_errors():
    grid = make_grid(11, 8)
    with pytest.raises(ValueError, match="exceeds"):
        identity_multipump(13, grid)
    with pytest.raises(ValueError, match="odd"):
        identity_multipump(4, grid)


def test_multipump_rejects_non_orthogonal():
    grid = make_grid(11, 8)
    env = single_bin_pump(0, grid)
    with pytest.raises(ValueError, match="orthonormal"):
        MultiPump(envelopes=[env, env])


def test_pump_csv_round_trip(tmp_path):
    grid = make_grid(31, 8)
    env = hermite_gauss_pump(2, None, grid)
    path = tmp_path / "pump.csv"
    export_pump_csv(env, path)
    back = import_pump_csv(path, grid)
    np.testing.assert_allclose(back.coeffs, env.coeffs, atol=1e-15)


def test_pump_csv_rejects_bad_columns(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError, match="columns"):
        import_pump_csv(path, make_grid(3, 8))
