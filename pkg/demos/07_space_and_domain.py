"""Spatial resolution: Hermite modes against grids, and the Fourier domain size.

Along one path, successive-K differences of the Hermite schemes collapse
spectrally while finite differences converge only algebraically. A periodic
Fourier grid converges to the Hermite reference only when its box is large
enough to hold the solution.
"""
from sgpe import Scheme, SchemeConfig, StudyConfig, StudyKind, run_study

base = SchemeConfig(K=64, lam=1.0, alpha=0.3, T=0.5, dt=2.0**-9, Lx=10.0)
space = run_study(StudyConfig(StudyKind.SPACE_PATHWISE, base, ladder=(16, 32, 64, 128), seed=2024,
                              schemes=(Scheme.CN_HERMITE, Scheme.CN_FD)))
print("successive-K squared differences")
for r in space.mean_rows():
    print(f"  {r['scheme']:11s} K={r['K']:>4} dof={r['dof']:>4}  {r['error_sq']:.3e}")

cross = run_study(StudyConfig(StudyKind.CROSS_SCHEME, base, ladder=(32, 64, 128), seed=2024,
                              lx_values=(3.0, 5.0, 10.0)))
print("\nSPLIT_FOURIER against the K=128 split-step Hermite reference")
for r in cross.mean_rows():
    print(f"  {r['scheme']:24s} K={r['K']:>4} Lx={r['Lx']!s:>5}  {r['error_sq']:.3e}")
