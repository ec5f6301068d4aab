"""How often the increment stopping time fires.

The integrators can be frozen at the first step whose Brownian increment
exceeds C0. The chance of that happening on [0, T] falls off like
N exp(-C0^2 N / (2 T^2)); the constant is calibrated on the smallest N.
"""
from sgpe.experiments import truncation_frequency

for C0 in (0.5, 1.0):
    rep = truncation_frequency(C0, T=1.0, N_list=(4, 8, 16, 32, 64), n_paths=5000, seed=1)
    print(f"C0={C0}")
    for N, f, e in zip(rep.N_list, rep.frequency, rep.envelope):
        print(f"  N={N:>3}  observed {f:.4f}  envelope {e:.2e}")
    print(f"  within envelope: {rep.within_envelope}, non-increasing: {rep.non_increasing}")
