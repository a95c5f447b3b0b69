"""Pump envelope construction, normalization and validation.

A pump is stored as its complex frequency-bin coefficient vector beta(omega_m)
on a :class:`~csfg.core.FrequencyGrid`; the time profile follows from

    beta(t) = (1/sqrt(T)) sum_m beta(omega_m) exp(-i omega_m t),

so unit norm in bins is unit L2 norm in time.  The gate converts the temporal
mode A = sum_m beta(omega_-m) a(omega_m); the index-reflected coefficient
vector c_m = beta(omega_-m) is exposed to the metrics layer so every fidelity
formula stays a plain inner product.

Multi-channel pumps hold one envelope per cavity resonance channel
k = -(M-1)/2 ... +(M-1)/2 (stored ascending, like the bins) and must be
mutually orthonormal.  A target M x N truncated unitary U with orthonormal
rows is realized by the pump choice beta_k(omega_-l) = -U[k, l]; the
resulting gate maps a_s(omega_l) -> sum_k U[k, l] (idler channel k) in the
asymptotic regime.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.hermite import hermval

from .core import FrequencyGrid

NORM_TOL = 1e-12
GRAM_TOL = 1e-10
EDGE_POWER_TOL = 1e-6


@dataclass(frozen=True)
class PumpEnvelope:
    """Normalized pump envelope: complex coefficients over the grid bins."""

    coeffs: np.ndarray
    grid: FrequencyGrid

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.shape != (self.grid.n_bins,):
            raise ValueError(f"coeffs shape {c.shape} != ({self.grid.n_bins},)")
        nrm = np.linalg.norm(c)
        if abs(nrm - 1.0) > NORM_TOL:
            raise ValueError(f"envelope norm {nrm!r} deviates from 1 beyond {NORM_TOL}")
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    def time_samples(self, times: np.ndarray | None = None) -> np.ndarray:
        """beta(t) on the grid's midpoint samples (or arbitrary times)."""
        return self.grid.bins_to_time(self.coeffs, times)

    def reflected_coeffs(self) -> np.ndarray:
        """c_m = beta(omega_-m), the ideal-map row used by the metrics."""
        return self.coeffs[::-1]

    def inner(self, other: "PumpEnvelope") -> complex:
        """Envelope overlap integral beta*(t) other(t) dt = sum_m conj(c_m) d_m."""
        return complex(np.vdot(self.coeffs, other.coeffs))


def _normalized(raw: np.ndarray, grid: FrequencyGrid) -> PumpEnvelope:
    nrm = np.linalg.norm(raw)
    if nrm == 0:
        raise ValueError("zero envelope cannot be normalized")
    return PumpEnvelope(coeffs=np.asarray(raw, dtype=complex) / nrm, grid=grid)


def hermite_gauss_pump(order: int, width: float | None, grid: FrequencyGrid) -> PumpEnvelope:
    """Hermite-Gaussian spectral envelope H_order(omega/sigma) exp(-omega^2/(2 sigma^2)).

    ``width`` is sigma in units of bins; None selects the default N/10, wide
    enough that the mode occupies many bins yet decays far below the
    truncation threshold at the grid edge.  A pump whose edge bins carry more
    than 1e-6 of the total power is rejected as aliased.
    """
    if order < 0:
        raise ValueError(f"order must be >= 0, got {order}")
    sigma = grid.n_bins / 10 if width is None else float(width)
    if sigma <= 0:
        raise ValueError(f"width must be > 0, got {sigma}")
    x = grid.bins / sigma
    herm_coeffs = np.zeros(order + 1)
    herm_coeffs[order] = 1.0
    raw = hermval(x, herm_coeffs) * np.exp(-0.5 * x * x)
    env = _normalized(raw.astype(complex), grid)
    edge_power = abs(env.coeffs[0]) ** 2 + abs(env.coeffs[-1]) ** 2
    if edge_power > EDGE_POWER_TOL:
        raise ValueError(
            f"aliased pump: edge bins carry {edge_power:.2e} of the power "
            f"(> {EDGE_POWER_TOL}); increase n_bins or decrease width"
        )
    return env


def single_bin_pump(l: int, grid: FrequencyGrid) -> PumpEnvelope:
    """Single-frequency-bin pump: beta(omega_m) = delta_{m,l}, beta(t) = e^{-i omega_l t}/sqrt(T)."""
    idx = grid.bin_index(l)
    c = np.zeros(grid.n_bins, dtype=complex)
    c[idx] = 1.0
    return PumpEnvelope(coeffs=c, grid=grid)


@dataclass(frozen=True)
class MultiPump:
    """M mutually orthonormal envelopes, one per cavity resonance channel.

    envelopes[i] drives channel k = channels[i]; channels are ascending
    -(M-1)/2 ... +(M-1)/2 to match the bin ordering, so a target unitary
    renders as the plain numpy identity for the identity gate.
    """

    envelopes: list[PumpEnvelope] = field()
    target_unitary: np.ndarray | None = None

    def __post_init__(self):
        if not self.envelopes:
            raise ValueError("MultiPump needs at least one envelope")
        grid = self.envelopes[0].grid
        if any(e.grid is not grid and e.grid != grid for e in self.envelopes):
            raise ValueError("all envelopes must share one grid")
        gram = self.gram()
        dev = np.max(np.abs(gram - np.eye(len(self.envelopes))))
        if dev > GRAM_TOL:
            raise ValueError(f"envelopes not mutually orthonormal: max Gram deviation {dev:.3e}")

    @property
    def grid(self) -> FrequencyGrid:
        return self.envelopes[0].grid

    @property
    def n_channels(self) -> int:
        return len(self.envelopes)

    @property
    def channels(self) -> np.ndarray:
        # Half-integer labels for even M; only the ordering matters downstream.
        return np.arange(self.n_channels) - (self.n_channels - 1) / 2

    def gram(self) -> np.ndarray:
        coeff_rows = np.stack([e.coeffs for e in self.envelopes])
        return coeff_rows @ coeff_rows.conj().T

    def coeff_matrix(self) -> np.ndarray:
        """(M, N) array of beta_k(omega_m), channels ascending, bins ascending."""
        return np.stack([e.coeffs for e in self.envelopes])

    def time_matrix(self, times: np.ndarray | None = None) -> np.ndarray:
        """(M, n_time) array of beta_k(t)."""
        return np.stack([e.time_samples(times) for e in self.envelopes])

    def as_unitary(self) -> np.ndarray:
        """Recover the realized truncated unitary U[k, l] = -beta_k(omega_-l)."""
        return -self.coeff_matrix()[:, ::-1]


def pump_from_unitary(U: np.ndarray, grid: FrequencyGrid) -> MultiPump:
    """Synthesize the multi-pump realizing a target M x N truncated unitary.

    Rows of U are output channels (ascending k), columns are input bins
    (ascending l); U must have orthonormal rows to 1e-10.  The pump choice is
    beta_k(omega_-l) = -U[k, l].
    """
    U = np.asarray(U, dtype=complex)
    if U.ndim != 2:
        raise ValueError(f"U must be 2-D, got shape {U.shape}")
    m_rows, n_cols = U.shape
    if n_cols != grid.n_bins:
        raise ValueError(f"U has {n_cols} columns but grid has {grid.n_bins} bins")
    if m_rows > n_cols:
        raise ValueError(f"need M <= N for orthonormal rows, got {m_rows} x {n_cols}")
    gram = U @ U.conj().T
    dev = np.abs(gram - np.eye(m_rows))
    if dev.max() > GRAM_TOL:
        i, j = np.unravel_index(np.argmax(dev), dev.shape)
        raise ValueError(
            f"U rows are not orthonormal: worst pair ({i}, {j}) with "
            f"|<row_i, row_j> - delta_ij| = {dev[i, j]:.3e}"
        )
    envelopes = [PumpEnvelope(coeffs=-U[i, ::-1], grid=grid) for i in range(m_rows)]
    return MultiPump(envelopes=envelopes, target_unitary=U)


def identity_multipump(m_channels: int, grid: FrequencyGrid) -> MultiPump:
    """Identity-gate pump: channel k carries a single tone at bin -k with a minus sign."""
    if m_channels % 2 == 0 or m_channels < 1:
        raise ValueError(f"m_channels must be odd and >= 1, got {m_channels}")
    if m_channels > grid.n_bins:
        raise ValueError(f"m_channels {m_channels} exceeds grid bins {grid.n_bins}")
    U = np.eye(m_channels, grid.n_bins, k=(grid.n_bins - m_channels) // 2, dtype=complex)
    return pump_from_unitary(U, grid)


def export_pump_csv(env: PumpEnvelope, path) -> None:
    """Write the envelope as CSV rows (bin_index, re, im)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bin_index", "re", "im"])
        for n, c in zip(env.grid.bins, env.coeffs):
            writer.writerow([int(n), repr(float(c.real)), repr(float(c.imag))])


def import_pump_csv(path, grid: FrequencyGrid) -> PumpEnvelope:
    """Read an envelope written by :func:`export_pump_csv` onto the given grid."""
    coeffs = np.zeros(grid.n_bins, dtype=complex)
    seen = np.zeros(grid.n_bins, dtype=bool)
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or set(reader.fieldnames) != {"bin_index", "re", "im"}:
            raise ValueError(f"expected columns bin_index,re,im; got {reader.fieldnames}")
        for row in reader:
            idx = grid.bin_index(int(row["bin_index"]))
            coeffs[idx] = float(row["re"]) + 1j * float(row["im"])
            seen[idx] = True
    if not seen.all():
        missing = grid.bins[~seen]
        raise ValueError(f"pump CSV missing bins {missing.tolist()}")
    return PumpEnvelope(coeffs=coeffs, grid=grid)
