"""Multiplication by x^2 in the Hermite basis and its smooth cutoff B_K.

x^2 acts pentadiagonally on Hermite coefficients. The bounded variant B_K
agrees with it on low modes and ramps the entries down near the top of the
basis, which keeps the noise term of the implicit scheme well conditioned.
"""
import numpy as np

from sgpe import build_BK_smooth, build_x2_truncated, check_assumptions

X = build_x2_truncated(8)
e0 = np.zeros(8)
e0[0] = 1
print("x^2 e_0 =", np.array2string((X @ e0).real, precision=6))

K, theta = 40, 0.8
B = build_BK_smooth(K, theta)
full = build_x2_truncated(K)
print(f"\nB_K with K={K}, theta={theta}")
print("  main diagonal, last 10 entries, x^2 vs B_K:")
print("   ", np.array2string(full.diag0[-10:], precision=2))
print("   ", np.array2string(B.diag0[-10:], precision=2))

print("\nStructural checks over a K ladder:")
for line in check_assumptions([16, 32, 64, 128], theta=theta).lines():
    print("  " + line)
