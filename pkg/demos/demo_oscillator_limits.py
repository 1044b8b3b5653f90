"""Where the refinement limits of the two time-updates end up.

A weakly forced harmonic oscillator over one short interval.  As the
substep count grows:

* the level-set update (any solver) and the proper Ito-Taylor cubature
  update both converge to the exact moments;
* the variant that discretizes the process noise only once per
  measurement interval converges too -- but to a biased limit.  More
  substeps cannot fix a noise term that was frozen at the interval scale.

Run:  python3 demos/demo_oscillator_limits.py
"""

import numpy as np

from cdfilter import (
    CdckfVariant,
    GaussianBelief,
    SolverSpec,
    cdckf_time_update,
    cholesky_lower,
    lskf_time_update,
    lyapunov_oracle,
)
from cdfilter.scenarios import oscillator_scenario

sc = oscillator_scenario()
model = sc.sde_model()
belief0 = GaussianBelief(mean=sc.mean0, factor=cholesky_lower(sc.sigma0))
_, cov_ref = lyapunov_oracle(sc.system, sc.mean0, sc.sigma0, sc.t_end, 1e-13)

print(f"oscillator, t = {sc.t_end:g}; covariance error (Frobenius) vs oracle\n")
print(f"{'m':>6}  {'level-set RK2':>14}  {'proper IT-1.5':>14}  {'once-per-interval':>18}")
for m in (4, 16, 64, 256, 1024):
    ls = lskf_time_update(belief0, model, "averaged", sc.t_end,
                          SolverSpec("fixed-rk2", steps=m))
    proper = cdckf_time_update(belief0, model, CdckfVariant("proper-it15", m),
                               sc.t_end)
    frozen = cdckf_time_update(belief0, model,
                               CdckfVariant("paper-faithful", m), sc.t_end)
    row = [np.linalg.norm(b.covariance() - cov_ref)
           for b in (ls, proper, frozen)]
    print(f"{m:>6}  {row[0]:>14.2e}  {row[1]:>14.2e}  {row[2]:>18.2e}")

print("\nthe last column plateaus: that 2e-5 is a bias, not a step-size error")
