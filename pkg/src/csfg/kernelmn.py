"""M x N gate kernels via the periodic-boundary time-ordered propagator.

The M coupled cavity modes obey db/dt = -MM(t) b - d(t) with

    MM(t) = ((gamma + iota)/2) I + (eta^2/2) J(t),      J(t) = beta(t) beta(t)+,

and periodic boundary condition b(T/2) = b(-T/2).  The periodic Green's
function is

    K(t, u) = -P(t, -T/2) [I - P(T/2, -T/2)]^-1 P(T/2, u) - step(t-u) P(t, u),

with P the time-ordered exponential of -MM.  Output kernels follow as
G_s(t, u) = sqrt(gamma) eta K(t, u) beta(u) and GG_i(t, u) = gamma K(t, u)
plus an exact delta(t - u) identity (and sqrt(gamma iota) K for the bath
column when iota > 0).

Numerics:
  * P is approximated piecewise-constant at cell midpoints, one step per
    time sample.  Because J is a rank-1 Hermitian projector times a scalar,
    each step factor has the closed form
        exp(-MM dt) = e^{-(gamma+iota) dt / 2} [I + (e^{-eta^2 |beta|^2 dt / 2} - 1) bb+/|b|^2],
    O(M^2) per step, validated against a dense matrix exponential oracle.
  * Propagation between midpoint samples composes two half-cell factors,
    P(t_{a+1}, t_a) = H_{a+1} H_a with H_a = exp(-MM(t_a) dt / 2).  For M = 1
    this reproduces the single-channel cumulative-midpoint exponent exactly,
    so the M = 1 reduction to the 1 x N kernels is exact to roundoff.
  * K is never materialized as a full (M, M, n_time, n_time) tensor on the
    signal path: G_s rows are assembled by marching t forward, carrying the
    boundary factor and the causal part as running products, O(M^2 n_time)
    memory.  The idler tensor is assembled only on request.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .core import FrequencyGrid, GateParams
from .kernel1n import frequency_transform
from .pumps import MultiPump

COND_LIMIT = 1e12


class NearSingularPeriodicSolveError(np.linalg.LinAlgError):
    """Raised when I - P(T/2, -T/2) is numerically singular (gamma*T + eta^2 -> 0)."""


@dataclass(frozen=True)
class PropagatorChain:
    """Per-cell factors of the time-ordered propagator and the full monodromy."""

    steps: np.ndarray        # (n_steps, M, M) full-cell factors exp(-MM(t*) h)
    half_steps: np.ndarray   # (n_steps, M, M) half-cell factors exp(-MM(t*) h/2)
    full: np.ndarray         # P(T/2, -T/2)
    dt: float
    params: GateParams
    multipump: MultiPump
    grid: FrequencyGrid

    @property
    def n_steps(self) -> int:
        return self.steps.shape[0]


def rank1_step_factors(params: GateParams, beta_cols: np.ndarray, h: float) -> np.ndarray:
    """Closed-form exp(-MM h) for each beta column; shape (n, M, M).

    MM = ((gamma+iota)/2) I + (eta^2/2) bb+ has the single non-identity
    eigendirection b, so its exponential is the identity plus a rank-1
    correction along bb+/|b|^2.
    """
    m_ch, n = beta_cols.shape
    scale = math.exp(-(params.gamma + params.iota) * h / 2)
    nrm2 = np.sum(np.abs(beta_cols) ** 2, axis=0)
    coef = np.zeros(n)
    nz = nrm2 > 0
    coef[nz] = np.expm1(-params.eta**2 * nrm2[nz] * h / 2) / nrm2[nz]
    outer = np.einsum("kt,mt->tkm", beta_cols, beta_cols.conj())
    return scale * (np.eye(m_ch)[None, :, :] + coef[:, None, None] * outer)


def propagator(params: GateParams, multipump: MultiPump, grid: FrequencyGrid,
               n_steps: int | None = None) -> PropagatorChain:
    """Piecewise-constant midpoint approximation of the time-ordered exponential.

    n_steps defaults to the grid's time-sample count and must be a positive
    multiple of it, so step midpoints stay aligned with the sample lattice.
    """
    if multipump.grid != grid:
        raise ValueError("multipump was built on a different grid")
    if n_steps is None:
        n_steps = grid.n_time
    if n_steps < grid.n_time or n_steps % grid.n_time:
        raise ValueError(
            f"sampling misalignment: n_steps {n_steps} must be a multiple of n_time {grid.n_time}"
        )
    h = grid.T / n_steps
    mids = (np.arange(n_steps) + 0.5) * h - grid.T / 2
    beta_cols = multipump.time_matrix(mids)
    steps = rank1_step_factors(params, beta_cols, h)
    half_steps = rank1_step_factors(params, beta_cols, h / 2)
    full = np.eye(multipump.n_channels, dtype=complex)
    for j in range(n_steps):
        full = steps[j] @ full
    return PropagatorChain(steps=steps, half_steps=half_steps, full=full, dt=h,
                           params=params, multipump=multipump, grid=grid)


class PeriodicKernel:
    """Evaluator for the periodic Green's function K(t_a, t_b) on the sample lattice.

    Precomputes the boundary propagators L_a = P(t_a, -T/2) and
    R_b = P(T/2, t_b), factors I - P(T/2, -T/2) once (with a condition-number
    gate), and exposes K entry/column evaluation.  Requires one propagator
    step per time sample.
    """

    def __init__(self, chain: PropagatorChain):
        if chain.n_steps != chain.grid.n_time:
            raise ValueError("periodic kernel needs one propagator step per time sample")
        self.chain = chain
        self.grid = chain.grid
        m_ch = chain.multipump.n_channels
        n = chain.n_steps
        H = chain.half_steps
        eye = np.eye(m_ch, dtype=complex)

        L = np.empty((n, m_ch, m_ch), dtype=complex)
        L[0] = H[0]
        for a in range(1, n):
            L[a] = H[a] @ (H[a - 1] @ L[a - 1])
        R = np.empty((n, m_ch, m_ch), dtype=complex)
        R[n - 1] = H[n - 1]
        for b in range(n - 2, -1, -1):
            R[b] = (R[b + 1] @ H[b + 1]) @ H[b]
        monodromy = R[0] @ H[0]

        boundary = eye - monodromy
        self.condition_number = float(np.linalg.cond(boundary))
        if not np.isfinite(self.condition_number) or self.condition_number > COND_LIMIT:
            raise NearSingularPeriodicSolveError(
                f"near-singular periodic solve: cond(I - P) = {self.condition_number:.3e}"
            )
        self.L = L
        self.R = R
        self.monodromy = monodromy
        # W_b = (I - P)^-1 P(T/2, t_b), the boundary part of K up to -L_a
        self.W = np.linalg.solve(boundary, R.transpose(1, 0, 2).reshape(m_ch, -1)) \
            .reshape(m_ch, n, m_ch).transpose(1, 0, 2)

    def step_between(self, a: int) -> np.ndarray:
        """P(t_{a}, t_{a-1}) = H_a H_{a-1}."""
        H = self.chain.half_steps
        return H[a] @ H[a - 1]

    def propagate(self, a: int, b: int) -> np.ndarray:
        """P(t_a, t_b) for a >= b."""
        if a < b:
            raise ValueError("propagate requires a >= b")
        H = self.chain.half_steps
        out = np.eye(self.chain.multipump.n_channels, dtype=complex)
        for j in range(b + 1, a + 1):
            out = (H[j] @ H[j - 1]) @ out
        return out

    def evaluate(self, a: int, b: int) -> np.ndarray:
        """K(t_a, t_b) as an M x M block; step(0) = 1/2 on the diagonal."""
        val = -(self.L[a] @ self.W[b])
        if a > b:
            val = val - self.propagate(a, b)
        elif a == b:
            val = val - 0.5 * np.eye(val.shape[0])
        return val

    def column(self, b: int) -> np.ndarray:
        """K(t_a, t_b) for all a at fixed b, shape (n_time, M, M)."""
        m_ch = self.chain.multipump.n_channels
        n = self.grid.n_time
        H = self.chain.half_steps
        col = -np.einsum("aij,jk->aik", self.L, self.W[b])
        col[b] -= 0.5 * np.eye(m_ch)
        prop = np.eye(m_ch, dtype=complex)
        for a in range(b + 1, n):
            prop = (H[a] @ H[a - 1]) @ prop
            col[a] -= prop
        return col

    def boundary_values(self, b: int) -> tuple[np.ndarray, np.ndarray]:
        """K at the window edges, (K(-T/2, t_b), K(T/2, t_b)); equal by construction."""
        eye = np.eye(self.chain.multipump.n_channels, dtype=complex)
        k_left = -np.linalg.solve(eye - self.monodromy, self.R[b])
        k_right = -(self.monodromy @ np.linalg.solve(eye - self.monodromy, self.R[b])) - self.R[b]
        return k_left, k_right


def periodic_kernel(chain: PropagatorChain) -> PeriodicKernel:
    """Build the periodic Green's-function evaluator for a one-step-per-sample chain."""
    return PeriodicKernel(chain)


@dataclass(frozen=True)
class KernelSetMN:
    """Sampled M x N output kernels; idler/loss tensors optional (memory)."""

    Gs: np.ndarray                     # (M, n_time, n_time) sqrt(gamma) eta K beta(u)
    Gi_smooth: np.ndarray | None       # (M, M, n_time, n_time) gamma K, delta symbolic
    loss_smooth: np.ndarray | None     # (M, M, n_time, n_time) sqrt(gamma iota) K
    params: GateParams
    multipump: MultiPump
    grid: FrequencyGrid


@dataclass(frozen=True)
class TransferSetMN:
    """Per-channel frequency-bin transfer tensors."""

    Gs_tilde: np.ndarray               # (M, N, N)
    Gi_tilde: np.ndarray | None        # (M, M, N, N), includes the delta identity
    loss_tilde: np.ndarray | None      # (M, M, N, N)
    params: GateParams
    multipump: MultiPump
    grid: FrequencyGrid

    def stacked_isometry_residual(self) -> float:
        """max |T T+ - I| over the stacked (channel, bin) output rows."""
        if self.Gi_tilde is None:
            raise ValueError("idler tensor not assembled; build with with_idler=True")
        m_ch = self.Gs_tilde.shape[0]
        n = self.grid.n_bins
        ts = self.Gs_tilde.reshape(m_ch * n, n)
        ti = self.Gi_tilde.transpose(0, 2, 1, 3).reshape(m_ch * n, m_ch * n)
        acc = ts @ ts.conj().T + ti @ ti.conj().T
        if self.loss_tilde is not None:
            tl = self.loss_tilde.transpose(0, 2, 1, 3).reshape(m_ch * n, m_ch * n)
            acc += tl @ tl.conj().T
        return float(np.max(np.abs(acc - np.eye(m_ch * n))))

    def synthesized_unitary(self) -> np.ndarray:
        """Estimate of the realized truncated unitary from the resonant output row.

        In the asymptotic regime g~_{s,k}(0, l) -> mu0 * (-U[k, l]), so
        -g~_s(row 0)/mu0 recovers U; away from it this measures the deviation.
        """
        from .kernel1n import asymptotic_coeffs

        mu0, _ = asymptotic_coeffs(self.params)
        row0 = self.grid.bin_index(0)
        return -self.Gs_tilde[:, row0, :] / mu0


def _gs_row_blocks(kernel: PeriodicKernel) -> Iterator[tuple[int, np.ndarray]]:
    """Yield (a, B_a) with B_a[k, b] = G_s(t_a, t_b)_k, marching t forward.

    Carries P(t_a, t_b) beta(t_b) for all b <= a as one matrix updated with a
    single half-step composition per sample; O(M n_time) live memory.
    """
    chain = kernel.chain
    params = chain.params
    grid = chain.grid
    n = grid.n_time
    beta_cols = chain.multipump.time_matrix()          # (M, n_time)
    scale = math.sqrt(params.gamma) * params.eta
    # boundary part: W1[:, b] = (I - P)^-1 P(T/2, t_b) beta(t_b)
    W1 = np.einsum("bij,jb->ib", kernel.W, beta_cols)
    H = chain.half_steps
    V = np.zeros_like(beta_cols)
    for a in range(n):
        if a > 0:
            V[:, :a] = (H[a] @ H[a - 1]) @ V[:, :a]
        V[:, a] = beta_cols[:, a]
        block = -(kernel.L[a] @ W1)
        block[:, :a] -= V[:, :a]
        block[:, a] -= 0.5 * V[:, a]
        yield a, scale * block


def build_mn(params: GateParams, multipump: MultiPump, grid: FrequencyGrid | None = None,
             with_idler: bool = True) -> tuple[KernelSetMN, TransferSetMN]:
    """Assemble the M x N kernels and their frequency-bin transfer tensors.

    with_idler=False skips the (M, M, n_time, n_time) idler/loss tensors and
    their transfers; the signal tensor and all conversion metrics remain
    available.  Use it for wide gates where those tensors do not fit.
    """
    if grid is None:
        grid = multipump.grid
    elif grid != multipump.grid:
        raise ValueError("multipump was built on a different grid")
    kernel = periodic_kernel(propagator(params, multipump, grid))
    m_ch = multipump.n_channels
    n = grid.n_time

    Gs = np.empty((m_ch, n, n), dtype=complex)
    for a, block in _gs_row_blocks(kernel):
        Gs[:, a, :] = block

    Gi_smooth = loss_smooth = None
    if with_idler:
        H = kernel.chain.half_steps
        eye = np.eye(m_ch, dtype=complex)
        VM = np.zeros((m_ch, m_ch, n), dtype=complex)
        Kfull = np.empty((n, m_ch, m_ch, n), dtype=complex)   # [a, k, k', b]
        for a in range(n):
            if a > 0:
                step = H[a] @ H[a - 1]
                VM[:, :, :a] = np.einsum("ij,jkb->ikb", step, VM[:, :, :a])
            VM[:, :, a] = eye
            blockM = -np.einsum("ij,bjk->ikb", kernel.L[a], kernel.W)
            blockM[:, :, :a] -= VM[:, :, :a]
            blockM[:, :, a] -= 0.5 * VM[:, :, a]
            Kfull[a] = blockM
        Kfull = Kfull.transpose(1, 2, 0, 3)                    # [k, k', a, b]
        Gi_smooth = params.gamma * Kfull
        if params.iota > 0:
            loss_smooth = math.sqrt(params.gamma * params.iota) / params.gamma * Gi_smooth

    kset = KernelSetMN(Gs=Gs, Gi_smooth=Gi_smooth, loss_smooth=loss_smooth,
                       params=params, multipump=multipump, grid=grid)

    n_bins = grid.n_bins
    Gs_tilde = np.empty((m_ch, n_bins, n_bins), dtype=complex)
    for k in range(m_ch):
        Gs_tilde[k] = frequency_transform(Gs[k], grid)
    Gi_tilde = loss_tilde = None
    if with_idler:
        Gi_tilde = np.empty((m_ch, m_ch, n_bins, n_bins), dtype=complex)
        for k in range(m_ch):
            for kp in range(m_ch):
                Gi_tilde[k, kp] = frequency_transform(Gi_smooth[k, kp], grid)
            Gi_tilde[k, k] += np.eye(n_bins)
        if loss_smooth is not None:
            loss_tilde = np.empty_like(Gi_tilde)
            for k in range(m_ch):
                for kp in range(m_ch):
                    loss_tilde[k, kp] = frequency_transform(loss_smooth[k, kp], grid)
    tset = TransferSetMN(Gs_tilde=Gs_tilde, Gi_tilde=Gi_tilde, loss_tilde=loss_tilde,
                         params=params, multipump=multipump, grid=grid)
    return kset, tset


def stream_gs_rows(params: GateParams, multipump: MultiPump,
                   grid: FrequencyGrid | None = None) -> Iterator[tuple[int, np.ndarray]]:
    """Row-block generator over G_s without materializing the full tensor.

    Yields (a, B_a) with B_a of shape (M, n_time); the memory-streaming path
    used by the sweep runner for wide gates.
    """
    if grid is None:
        grid = multipump.grid
    elif grid != multipump.grid:
        raise ValueError("multipump was built on a different grid")
    kernel = periodic_kernel(propagator(params, multipump, grid))
    yield from _gs_row_blocks(kernel)


def export_transfer_csv_mn(tset: TransferSetMN, out_dir, basename: str = "transfer_mn") -> list:
    """Transfer export in the single-channel schema plus a channel column.

    Signal rows are (k, n, m, re, im); idler/loss rows carry the input
    channel too, (k, k_in, n, m, re, im).  A JSON sidecar records params,
    grid and the per-channel pump hashes.  Returns the written paths.
    """
    import csv
    import json
    from pathlib import Path

    from .kernel1n import pump_hash

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    grid = tset.grid
    written = []

    path = out_dir / f"{basename}_gs.csv"
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "n", "m", "re", "im"])
        for ki in range(tset.Gs_tilde.shape[0]):
            for i, n in enumerate(grid.bins):
                for j, m in enumerate(grid.bins):
                    v = tset.Gs_tilde[ki, i, j]
                    writer.writerow([ki, int(n), int(m),
                                     repr(float(v.real)), repr(float(v.imag))])
    written.append(path)

    def write_channel_tensor(name, tensor):
        tpath = out_dir / f"{basename}_{name}.csv"
        with open(tpath, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["k", "k_in", "n", "m", "re", "im"])
            for ki in range(tensor.shape[0]):
                for kj in range(tensor.shape[1]):
                    for i, n in enumerate(grid.bins):
                        for j, m in enumerate(grid.bins):
                            v = tensor[ki, kj, i, j]
                            writer.writerow([ki, kj, int(n), int(m),
                                             repr(float(v.real)), repr(float(v.imag))])
        written.append(tpath)

    if tset.Gi_tilde is not None:
        write_channel_tensor("gi", tset.Gi_tilde)
    if tset.loss_tilde is not None:
        write_channel_tensor("loss", tset.loss_tilde)

    sidecar = {
        "params": {"gamma": tset.params.gamma, "eta": tset.params.eta,
                   "iota": tset.params.iota, "T": tset.params.T},
        "grid": {"n_bins": grid.n_bins, "oversample": grid.oversample},
        "channels": [float(k) for k in tset.multipump.channels],
        "pump_hashes": [pump_hash(e) for e in tset.multipump.envelopes],
    }
    sidecar_path = out_dir / f"{basename}.json"
    with open(sidecar_path, "w") as fh:
        json.dump(sidecar, fh, indent=2)
    written.append(sidecar_path)
    return written


def commutator_residual_mn(kset: KernelSetMN) -> float:
    """Canonical-commutator preservation of the stacked discrete gate map.

    Measures max |T T+ - I| over the gate's (channel, bin) output rows with
    the input sum taken over the complete discrete frequency comb of the time
    grid (computed in the time domain and projected), so it converges at the
    quadrature rate with no bin-window truncation.
    """
    if kset.Gi_smooth is None:
        raise ValueError("idler tensor required; build with with_idler=True")
    grid = kset.grid
    m_ch = kset.multipump.n_channels
    n = grid.n_time
    dt = grid.dt
    Ms = kset.Gs.reshape(m_ch * n, n) * dt
    Mi = kset.Gi_smooth.transpose(0, 2, 1, 3).reshape(m_ch * n, m_ch * n) * dt \
        + np.eye(m_ch * n)
    Rt = Ms @ Ms.conj().T + Mi @ Mi.conj().T
    if kset.loss_smooth is not None:
        Ml = kset.loss_smooth.transpose(0, 2, 1, 3).reshape(m_ch * n, m_ch * n) * dt
        Rt += Ml @ Ml.conj().T
    Rt -= np.eye(m_ch * n)
    F = grid.dft_matrix()
    Fs = np.kron(np.eye(m_ch), F)
    return float(np.max(np.abs(dt * (Fs @ Rt @ Fs.conj().T))))
