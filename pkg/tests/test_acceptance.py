"""Acceptance suite: every primary criterion at its pinned tolerance.

Each test runs one verification gate from csfg.verify (the same functions
behind ``csfg verify``), prints a PASS/FAIL line with the measured residual,
and enforces the runtime budget.  Criteria, tolerances and budgets:

  lossy_peak_ce          |mu0^2 - 1/(1+iota/gamma)| <= 1e-9          < 1 s
  sf_ce_unity            |CE - 1| <= 1e-6, N=31, r in {.01,.1,.5}    < 30 s
  per_bin_unitarity      | |mu|^2+|nu|^2 - 1 | <= 1e-14, 100 draws   < 1 s
  coefficient_unitarity  closed-form sums = 1 to 1e-15 + negative
                         control (bath coefficient without T fails)  < 1 s
  row_isometry           commutator residual <= 1e-3 at (11, ov 16),
                         both pump families, r in {.01,.5}, ~4x
                         shrink per oversample doubling              < 1 min
  oracle_equivalence     kernels vs implicit-midpoint BVP <= 1e-6,
                         rank-1 step vs dense expm <= 1e-12          < 2 min
  metric_ordering        fm <= pc (fid, CE), fm <= hd (fid),
                         hd_ce = fm_ce to 1e-9, 100 random configs   < 2 min
  asymptotic_limit       identity 11x11, r = 1e-4: all >= 0.999      < 1 min
  trend_reproduction     N=31: FM fidelity strictly falls with r for
                         HG2 / SF / identity pumps; adjacent-bin
                         indistinguishability strictly rises         < 5 min
  m1_reduction           M=1 kernels match 1xN to 1e-8               < 30 s
  sf_closed_form         quadrature transfer -> flat-pump algebra,
                         extrapolated deviation <= 1e-8              (invariant)
"""

import pytest

from csfg import verify

BUDGETS_MS = {
    "lossy_peak_ce": 1_000,
    "sf_ce_unity": 30_000,
    "per_bin_unitarity": 1_000,
    "coefficient_unitarity": 1_000,
    "row_isometry": 60_000,
    "oracle_equivalence": 120_000,
    "metric_ordering": 120_000,
    "asymptotic_limit": 60_000,
    "trend_reproduction": 300_000,
    "m1_reduction": 30_000,
    "sf_closed_form": 120_000,
}


@pytest.mark.parametrize("gate", verify.ALL_GATES, ids=lambda g: g.__name__.removeprefix("gate_"))
def test_acceptance_criterion(gate):
    res = gate()
    status = "PASS" if res.passed else "FAIL"
    print(f"[{status}] {res.name}: residual {res.residual:.3e} "
          f"(tol {res.tolerance:.1e}) in {res.runtime_ms:.0f} ms"
          + (f"  [{res.detail}]" if res.detail else ""))
    assert res.passed, f"{res.name}: residual {res.residual:.3e} > {res.tolerance:.1e} {res.detail}"
    budget = BUDGETS_MS[res.name]
    assert res.runtime_ms < budget, f"{res.name} took {res.runtime_ms:.0f} ms (budget {budget} ms)"
