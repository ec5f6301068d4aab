"""How far the implicit scheme drifts from the split-step one as K grows.

With strong noise (alpha = 1), the gap between Crank-Nicolson and split-step
Hermite in the Sigma^1 norm grows with the number of modes at a fixed step
and shrinks with the step at a fixed K. The cfl_diag column is sqrt(dt) K / 2,
the size of the noise term on the top diagonal entry of the implicit system.
This uses the desk-scale "fig4" preset with fewer samples.
"""
from sgpe.experiments import preset, run_study

cfg = preset("fig4").with_(n_samples=4)
res = run_study(cfg)
print(f"{'K':>4} {'dt':>10} {'cfl_diag':>9} {'mean gap^2':>12}")
for r in res.mean_rows():
    print(f"{r['K']:>4} {r['dt']:>10.2e} {r['cfl_diag']:>9.3f} {r['error_sq']:>12.4e}")
