"""Hermite functions, the discrete transform and weighted norms.

Builds the K-point Gauss-Hermite rule, checks that the sampled Hermite
functions are orthonormal under it, and expands a displaced Gaussian. A
Gaussian centred at x0 is a coherent state, so its coefficients follow a
Poisson-like law that we can compare against.
"""
import math

import numpy as np

from sgpe import InitialDatum, build_basis, forward_transform, inverse_transform, project_function
from sgpe.hermite import sigma_norm_sq

K = 48
basis = build_basis(K)
gram = (basis.functions * basis.weights) @ basis.functions.T
print(f"K={K}: largest Gram-matrix error {np.max(np.abs(gram - np.eye(K))):.1e}")

x0 = 2.0
coeffs = project_function(InitialDatum(x0=x0), K)
k = np.arange(K)
mu = x0**2 / 2
exact = np.array([math.exp(-mu / 2) * (x0 / math.sqrt(2)) ** i / math.sqrt(math.factorial(i)) for i in k])
print(f"coherent state at x0={x0}: max coefficient error {np.max(np.abs(coeffs - exact)):.1e}")
print("leading coefficients:", np.array2string(coeffs[:6].real, precision=4))

# nodal samples and back
samples = inverse_transform(basis, coeffs)
print(f"round trip through {K} nodes: {np.max(np.abs(forward_transform(basis, samples) - coeffs)):.1e}")

# <A^j u, u> for j = 0, 1, 2; for this datum <A u, u> = 1 + x0^2
for j in range(3):
    print(f"Sigma^{j} norm squared: {sigma_norm_sq(coeffs, j):.6f}")
