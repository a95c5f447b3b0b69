"""Independent brute-force solvers that validate the analytic kernels.

Nothing here reuses the closed-form Green's functions or the rank-1
propagator shortcut: the boundary-value solver discretizes the Langevin
system directly with the implicit midpoint rule and enforces the periodic
boundary condition through the discrete monodromy, and the reference matrix
exponential is scipy's scaling-and-squaring Pade implementation.  Agreement
between these paths and the analytic modules is the gating correctness test
for everything else.

The solvers run at reduced scale only (M <= 8, a few thousand substeps);
they are correctness instruments, not performance paths.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .core import FrequencyGrid, GateParams
from .kernel1n import build_kernels, sf_response, transfer_matrix
from .pumps import MultiPump, single_bin_pump


@dataclass(frozen=True)
class BVPSolution:
    """Periodic trajectory of the cavity modes for one impulse input.

    b_samples[k, a] is the intracavity amplitude of channel k at the grid's
    time sample t_a (the average of the two one-sided limits at the impulse
    time itself); out_samples = sqrt(gamma) * b_samples is the smooth part of
    the idler output, i.e. the sampled kernel column.  The delta pass-through
    of an idler impulse is not included.
    """

    b_samples: np.ndarray
    out_samples: np.ndarray
    input_field: str
    input_channel: int
    input_time_index: int


def _coupling_matrices(params: GateParams, beta_mat: np.ndarray) -> np.ndarray:
    """M(t) = (gamma+iota)/2 I + eta^2/2 beta(t) beta(t)+ at each time column."""
    m_ch = beta_mat.shape[0]
    eye = np.eye(m_ch)
    outer = np.einsum("kt,mt->tkm", beta_mat, beta_mat.conj())
    return ((params.gamma + params.iota) / 2) * eye[None, :, :] + (params.eta**2 / 2) * outer


def dense_bvp_solve(params: GateParams, multipump: MultiPump, grid: FrequencyGrid,
                    input_field: str, input_time_index: int,
                    input_channel: int = 0, substeps: int = 16) -> BVPSolution:
    """Impulse response of the periodic Langevin system, implicit midpoint rule.

    The impulse (signal or idler channel) at sample time t_b enters as an
    exact jump of the trajectory; the periodicity b(T/2) = b(-T/2) is imposed
    by solving (I - Phi) b(-T/2) = -(forcing propagated to T/2) with Phi the
    one-period discrete monodromy.  ``substeps`` (even) midpoint substeps per
    grid cell put both the impulse time and the sample times on substep
    boundaries.
    """
    m_ch = multipump.n_channels
    if m_ch > 8:
        raise ValueError("oracle limited to M <= 8 channels")
    if substeps % 2 or substeps < 2:
        raise ValueError("substeps must be even and >= 2")
    n_sub = grid.n_time * substeps
    if n_sub > 4096 * 16:
        raise ValueError("oracle limited to small scale; reduce grid or substeps")
    if input_field not in ("signal", "idler"):
        raise ValueError(f"input_field must be 'signal' or 'idler', got {input_field!r}")
    if not 0 <= input_time_index < grid.n_time:
        raise ValueError("input_time_index outside the grid")
    if not 0 <= input_channel < m_ch:
        raise ValueError("input_channel outside the pump channels")

    h = grid.T / n_sub
    sub_mid = (np.arange(n_sub) + 0.5) * h - grid.T / 2
    beta_mid = multipump.time_matrix(sub_mid)
    mats = _coupling_matrices(params, beta_mid)
    eye = np.eye(m_ch)
    steps = np.linalg.solve(eye[None, :, :] + (h / 2) * mats,
                            eye[None, :, :] - (h / 2) * mats)

    # Jump of b across the impulse: db/dt = -M b - d with d a delta at t_b.
    if input_field == "signal":
        beta_at = multipump.time_matrix(np.array([grid.times[input_time_index]]))[:, 0]
        jump = params.eta * beta_at
    else:
        jump = np.zeros(m_ch, dtype=complex)
        jump[input_channel] = np.sqrt(params.gamma)

    # The impulse sits at substep boundary index jb (cell midpoint).
    jb = input_time_index * substeps + substeps // 2

    # One-period monodromy and the jump propagated from t_b to T/2.
    prop = eye.astype(complex)
    prop_after = eye.astype(complex)
    for j in range(n_sub):
        prop = steps[j] @ prop
        if j >= jb:
            prop_after = steps[j] @ prop_after
    # b(T/2) = Phi b0 + prop_after (-jump); periodicity: (I - Phi) b0 = -prop_after jump
    b0 = np.linalg.solve(eye - prop, prop_after @ (-jump))

    # March the full trajectory, recording cell midpoints.
    b_samples = np.zeros((m_ch, grid.n_time), dtype=complex)
    b = b0.copy()
    for j in range(n_sub):
        if j == jb:
            # sample value at the impulse time: mean of the one-sided limits
            cell = j // substeps
            b_samples[:, cell] = b - jump / 2
            b = b - jump
        elif j % substeps == substeps // 2:
            b_samples[:, j // substeps] = b
        b = steps[j] @ b
    out_samples = np.sqrt(params.gamma) * b_samples
    return BVPSolution(b_samples=b_samples, out_samples=out_samples,
                       input_field=input_field, input_channel=input_channel,
                       input_time_index=input_time_index)


def dense_expm(A: np.ndarray) -> np.ndarray:
    """Reference matrix exponential (scaling-and-squaring, Pade), M <= 64."""
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"square matrix required, got shape {A.shape}")
    if A.shape[0] > 64:
        raise ValueError("oracle limited to M <= 64")
    return scipy.linalg.expm(A)


def sf_closed_form_check(params: GateParams, grid: FrequencyGrid) -> float:
    """Max deviation of the quadrature transfer from the flat-pump closed form.

    Builds the single-bin (l = 0) pump, runs the full kernel + transfer path,
    and compares the diagonal of gs_tilde against mu_n.  The deviation decays
    at second order in dt.
    """
    pump = single_bin_pump(0, grid)
    ts = transfer_matrix(build_kernels(params, pump, grid))
    mu_n, _ = sf_response(params, grid)
    return float(np.max(np.abs(np.diag(ts.gs_tilde) - mu_n)))


def monodromy(params: GateParams, multipump: MultiPump, grid: FrequencyGrid,
              substeps: int = 16) -> np.ndarray:
    """One-period implicit-midpoint propagator, for convergence studies."""
    n_sub = grid.n_time * substeps
    h = grid.T / n_sub
    sub_mid = (np.arange(n_sub) + 0.5) * h - grid.T / 2
    mats = _coupling_matrices(params, multipump.time_matrix(sub_mid))
    eye = np.eye(multipump.n_channels)
    steps = np.linalg.solve(eye[None, :, :] + (h / 2) * mats,
                            eye[None, :, :] - (h / 2) * mats)
    prop = eye.astype(complex)
    for j in range(n_sub):
        prop = steps[j] @ prop
    return prop
