"""Simulator of the cavity-assisted sum-frequency-generation frequency-bin gate.

Computes the gate's exact linear input-output kernels, frequency-bin
transfer matrices, and every fidelity / conversion-efficiency figure of
merit, for single-channel (1 x N) and multi-channel (M x N) configurations.
"""

from .core import FrequencyGrid, GateParams, make_grid, matched_eta, params_at_ratio
from .kernel1n import (KernelSet1N, TransferSet, asymptotic_coeffs, build_kernels,
                       commutator_residual, lossy_coeffs, sf_response, transfer_matrix)
from .kernelmn import (KernelSetMN, PropagatorChain, TransferSetMN, build_mn,
                       periodic_kernel, propagator)
from .metrics import (MetricsReport, fm_metrics_1n, fm_metrics_mn, hd_metrics_mn,
                      metrics_report_1n, metrics_report_mn, metrics_report_mn_streaming,
                      pc_metrics_1n, pc_metrics_mn, sf_indistinguishability)
from .pumps import (MultiPump, PumpEnvelope, hermite_gauss_pump, identity_multipump,
                    pump_from_unitary, single_bin_pump)

__version__ = "0.1.0"

__all__ = [
    "FrequencyGrid", "GateParams", "make_grid", "matched_eta", "params_at_ratio",
    "KernelSet1N", "TransferSet", "build_kernels", "transfer_matrix",
    "asymptotic_coeffs", "lossy_coeffs", "sf_response", "commutator_residual",
    "KernelSetMN", "TransferSetMN", "PropagatorChain", "build_mn",
    "periodic_kernel", "propagator",
    "MetricsReport", "fm_metrics_1n", "pc_metrics_1n", "fm_metrics_mn",
    "pc_metrics_mn", "hd_metrics_mn", "metrics_report_1n", "metrics_report_mn",
    "metrics_report_mn_streaming", "sf_indistinguishability",
    "MultiPump", "PumpEnvelope", "hermite_gauss_pump", "single_bin_pump",
    "pump_from_unitary", "identity_multipump",
    "__version__",
]
