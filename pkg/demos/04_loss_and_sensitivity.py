#!/usr/bin/env python3
"""Internal loss and spectral sensitivity limits of the gate.

Two practical limits on gate performance:

  1. Internal cavity loss iota.  The conversion amplitude into the idler
     output saturates at |mu0|^2 = 1/(1 + iota/gamma), reached at the matched
     coupling eta = sqrt((gamma + iota) T).  The three asymptotic amplitudes
     (conversion, reflection, bath leakage) satisfy an exact unitarity sum.

  2. Spectral sharpness.  Pumps in adjacent single-frequency bins produce
     output photon-number distributions whose Bhattacharyya overlap rises
     with gamma/d_omega: once the cavity stops resolving neighboring bins,
     single-bin target modes can no longer be addressed faithfully.

Run:  python3 demos/04_loss_and_sensitivity.py
"""

import numpy as np

from csfg import (lossy_coeffs, make_grid, matched_eta, params_at_ratio,
                  sf_indistinguishability)

# --- peak CE vs loss ratio ------------------------------------------------------
print("peak conversion efficiency vs internal-loss ratio (matched coupling)")
print(f"  {'iota/gamma':>10}  {'|mu0|^2':>9}  {'1/(1+x)':>9}  {'unitarity sum':>13}")
for ratio in (0.0, 0.01, 0.1, 0.25, 1.0, 3.0):
    p = matched_eta(params_at_ratio(0.1, iota_over_gamma=ratio))
    mu0, nu0, ups0 = lossy_coeffs(p)
    total = mu0**2 + nu0**2 + ups0**2
    print(f"  {ratio:10.2f}  {mu0**2:9.6f}  {1/(1+ratio):9.6f}  {total:13.10f}")

# eta scan confirms the matched point is the peak
p0 = params_at_ratio(0.1, iota_over_gamma=0.5)
etas = matched_eta(p0).eta * np.linspace(0.6, 1.4, 81)
ces = []
for eta in etas:
    from dataclasses import replace
    mu0, _, _ = lossy_coeffs(replace(p0, eta=eta))
    ces.append(mu0**2)
best = etas[int(np.argmax(ces))]
print(f"\neta scan at iota/gamma = 0.5: argmax at eta/eta_matched = "
      f"{best / matched_eta(p0).eta:.4f}, peak CE = {max(ces):.6f} "
      f"(formula: {1/1.5:.6f})")

# --- adjacent-bin indistinguishability -------------------------------------------
grid = make_grid(n_bins=31, oversample=8)
print("\nadjacent-bin output indistinguishability vs linewidth ratio")
for r in (0.01, 0.05, 0.1, 0.2, 0.5):
    val = sf_indistinguishability(params_at_ratio(r), grid)
    bar = "#" * int(60 * val)
    print(f"  r = {r:5.2f}: {val:8.5f}  {bar}")
print("\nlow overlap = resolvable bins = sharp single-bin gating; the rise with")
print("r mirrors the SF-pump fidelity drop in demos/02.")
