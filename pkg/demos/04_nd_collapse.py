"""The full two-dimensional collapse on the periodic box (desk scale).

Runs the pseudo-spectral solver on radial well data at a modest resolution,
then checks the structure the collapse is supposed to preserve while it is
resolved: lattice angular symmetry, origin invariance, support containment,
and the growth of the blow-up functional against its Riccati lower bound.

A production-grade version of this experiment (N = 256) is what the
acceptance suite runs; this demo keeps N small so it finishes in seconds.
"""

import os
import warnings

import numpy as np

from screened_transport import (
    BlowupConfig,
    Params,
    bkm_partial_integral,
    bump_profile,
    make_grid,
    predict_blowup_time,
    riccati_check,
    riccati_rate,
    run_nd,
    sample_radial,
    structural_checks,
)

OUT = os.path.join(os.path.dirname(__file__), "demo_output")
os.makedirs(OUT, exist_ok=True)

params = Params(2, 1.0, 1.0)
grid = make_grid(2, 4.0, 128)
prof = bump_profile(2.0, 1.0, 4.0)
rho0 = sample_radial(prof, grid)
cfg = BlowupConfig(delta=0.25, support_radius=2.0, params=params)

print(f"grid {grid!r}, initial spectral tail {rho0.spectral_tail():.1e}")
with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    res = run_nd(rho0, params, t_max=20.0, gradient_factor=20.0, delta=0.25,
                 support_radius=2.0, output_interval=0.1, snapshot_interval=0.5)

s = res.series
sg = s.column("sup_grad")
print(f"stop: {res.stop_reason.value} at t = {s.times[-1]:.3f} "
      f"(gradient grew {sg.max() / sg[0]:.0f}x)")

I0 = s.column("i_delta")[0]
rate = riccati_rate(cfg)
print(f"I(0) = {I0:.3f}, predicted blow-up bound {predict_blowup_time(I0, rate):.0f}, "
      f"observed threshold {res.threshold_time}")

T3 = s.t[np.argmax(sg >= 3.0 * sg[0])]
print(f"diagnostic window: until the gradient tripled at t = {T3:.3f}")

rep = riccati_check(s, cfg, window_end=T3)
print(f"riccati check on the window: min slack {rep['min_slack']:.3f} "
      f"(rate {rep['rate']:.2e}; a negative slack beyond -1e-2 max|dI/dt| would fail)")

print(f"\nBKM monitor: integral {bkm_partial_integral(s):.2f} total, "
      f"{bkm_partial_integral(s, up_to=s.times[-1] / 2):.2f} at half time")

print("\nstructure checks on the window (strict acceptance tolerances):")
for c in structural_checks(res.snapshots, rho0, cfg, window_end=T3):
    print(f"  {c['check']:22s} {'pass' if c['pass'] else 'FAIL':4s} "
          f"worst {c['worst_violation']:.2e} (tol {c['tolerance']:.0e})")
print("the origin/support items degrade once the collapsing cone reaches")
print("the grid scale; the lattice angular symmetry is exact at all times.")

csv = os.path.join(OUT, "nd_series.csv")
s.to_csv(csv)
print(f"\nwrote {csv}")
