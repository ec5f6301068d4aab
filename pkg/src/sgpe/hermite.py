"""Hermite functions, Gauss-Hermite quadrature and the discrete Hermite transform.

The Hermite functions ``e_k(x) = H_k(x) exp(-x^2/2) / sqrt(2^k k! sqrt(pi))``
are the eigenfunctions of ``A = -d^2/dx^2 + x^2`` with eigenvalues ``2k + 1``.
Coefficient vectors (complex arrays of length K) are the spectral state used
throughout the package.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import ConfigurationError, ContractError, NumericalError

__all__ = [
    "HermiteBasis",
    "eval_hermite_functions",
    "hermite_function_matrix",
    "build_basis",
    "forward_transform",
    "inverse_transform",
    "synthesize",
    "sigma_norm_sq",
    "project_function",
    "eigenvalues",
    "K_MAX",
]

K_MAX = 4096

_PI_QUARTER = np.pi ** -0.25
# renormalize the recurrence once values leave this range
_BIG = 2.0 ** 300
_TINY = 2.0 ** -300


def eigenvalues(K: int) -> np.ndarray:
    """Eigenvalues ``2k + 1`` of the harmonic oscillator for ``k < K``."""
    return 2.0 * np.arange(K) + 1.0


def hermite_function_matrix(n_max: int, x) -> np.ndarray:
    """Evaluate ``e_0 .. e_{n_max}`` at every point of ``x``.

    Returns an array of shape ``(n_max + 1, len(x))``.

    The upward recurrence

        e_{k+1}(x) = sqrt(2/(k+1)) x e_k(x) - sqrt(k/(k+1)) e_{k-1}(x)

    is run on scaled values with the binary exponent carried separately, so
    that ``e_0(x) = pi^{-1/4} exp(-x^2/2)`` does not underflow for large
    ``|x|`` before the polynomial growth catches up.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.ndim != 1:
        x = x.ravel()
    if not np.all(np.isfinite(x)):
        raise ContractError("hermite functions evaluated at non-finite abscissa")
    if n_max < 0:
        raise ContractError(f"n_max must be >= 0, got {n_max}")

    out = np.empty((n_max + 1, x.size))
    # natural log of the common scale factor for each abscissa
    log_scale = -0.5 * x * x
    prev = np.zeros_like(x)
    cur = np.full_like(x, _PI_QUARTER)
    out[0] = cur * np.exp(log_scale)
    for k in range(n_max):
        nxt = np.sqrt(2.0 / (k + 1)) * x * cur - np.sqrt(k / (k + 1.0)) * prev
        prev, cur = cur, nxt
        mag = np.maximum(np.abs(cur), np.abs(prev))
        rescale = mag > _BIG
        if np.any(rescale):
            s = np.where(rescale, mag, 1.0)
            cur = cur / s
            prev = prev / s
            log_scale = log_scale + np.log(s)
        out[k + 1] = cur * np.exp(log_scale)
    return out


def eval_hermite_functions(n_max: int, x: float) -> np.ndarray:
    """Values ``[e_0(x), ..., e_{n_max}(x)]`` at a single abscissa."""
    x = float(x)
    if not np.isfinite(x):
        raise ContractError(f"non-finite abscissa {x!r}")
    return hermite_function_matrix(n_max, np.array([x]))[:, 0]


@dataclass(frozen=True, eq=False)
class HermiteBasis:
    """Gauss-Hermite rule with ``K`` nodes and the first ``K`` Hermite functions.

    ``weights`` are the Gauss-Hermite weights multiplied by ``exp(x_i^2)``, so
    that ``sum_i weights[i] u(x_i) conj(v(x_i))`` approximates the L2 inner
    product of Hermite-function expansions directly. ``functions[k, i]`` holds
    ``e_k(nodes[i])``.
    """

    K: int
    nodes: np.ndarray
    weights: np.ndarray
    eigenvalues: np.ndarray
    functions: np.ndarray = field(repr=False)

    def __post_init__(self):
        for name in ("nodes", "weights", "eigenvalues", "functions"):
            getattr(self, name).setflags(write=False)

    def modes(self, n_modes: int) -> np.ndarray:
        """Rows of ``functions`` for the first ``n_modes`` modes (``n_modes <= K``)."""
        if n_modes > self.K:
            raise ContractError(f"basis has {self.K} nodes, asked for {n_modes} modes")
        return self.functions[:n_modes]


@lru_cache(maxsize=64)
def build_basis(K: int) -> HermiteBasis:
    """Gauss-Hermite nodes and Hermite-function weights for ``K`` points.

    Nodes are the eigenvalues of the symmetric tridiagonal Jacobi matrix of the
    Hermite recurrence (Golub-Welsch). Weights come from the Christoffel
    function, ``1 / sum_{k<K} e_k(x_i)^2``, which equals the Gauss-Hermite
    weight times ``exp(x_i^2)`` without forming either factor separately.
    Results are cached; the returned basis is read-only.
    """
    if isinstance(K, bool) or not isinstance(K, (int, np.integer)) or not 1 <= K <= K_MAX:
        raise ConfigurationError(f"K must be an integer in [1, {K_MAX}], got {K!r}")
    K = int(K)
    off = np.sqrt(np.arange(1, K) / 2.0)
    try:
        nodes = eigh_tridiagonal(np.zeros(K), off, eigvals_only=True)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise NumericalError(f"Golub-Welsch eigenproblem failed for K={K}") from exc
    nodes = np.sort(nodes)
    nodes = 0.5 * (nodes - nodes[::-1])
    if K % 2 == 1:
        nodes[K // 2] = 0.0

    functions = hermite_function_matrix(K - 1, nodes)
    weights = 1.0 / np.einsum("ki,ki->i", functions, functions)
    weights = 0.5 * (weights + weights[::-1])
    if not (np.all(np.isfinite(weights)) and np.all(weights > 0)):
        raise NumericalError(f"non-positive quadrature weights for K={K}")
    return HermiteBasis(K, nodes, weights, eigenvalues(K), functions)


def _as_vector(values, n: int, what: str) -> np.ndarray:
    arr = np.asarray(values)
    if arr.shape != (n,):
        raise ContractError(f"{what}: expected shape ({n},), got {arr.shape}")
    return arr


def forward_transform(basis: HermiteBasis, samples, n_modes: int | None = None) -> np.ndarray:
    """Hermite coefficients from samples at ``basis.nodes``.

    ``c_k = sum_i w_i f(x_i) e_k(x_i)``; exact when ``f`` lies in the span of
    the first ``basis.K`` Hermite functions. ``n_modes`` (default ``K``) keeps
    only the leading coefficients, which is how an oversampled rule projects
    onto a smaller space.
    """
    n_modes = basis.K if n_modes is None else n_modes
    samples = _as_vector(samples, basis.K, "forward_transform samples")
    return basis.modes(n_modes) @ (basis.weights * samples)


def synthesize(basis: HermiteBasis, coeffs) -> np.ndarray:
    """Values of ``sum_k c_k e_k`` at ``basis.nodes`` for ``len(coeffs) <= K``."""
    coeffs = np.asarray(coeffs)
    if coeffs.ndim != 1:
        raise ContractError("coefficient array must be one-dimensional")
    return basis.modes(coeffs.size).T @ coeffs


def inverse_transform(basis: HermiteBasis, coeffs) -> np.ndarray:
    """Samples at the quadrature nodes of the expansion with ``K`` coefficients."""
    coeffs = _as_vector(coeffs, basis.K, "inverse_transform coefficients")
    return basis.functions.T @ coeffs


def sigma_norm_sq(coeffs, j: int) -> float:
    """``sum_k (2k+1)^j |c_k|^2``, i.e. ``<A^j u, u>``; ``j = 0`` is the L2 norm squared."""
    if j < 0:
        raise ContractError(f"norm index must be >= 0, got {j}")
    c = np.asarray(coeffs)
    p = np.abs(c) ** 2
    if j == 0:
        return float(p.sum())
    return float(np.dot(eigenvalues(c.size) ** j, p))


def project_function(func, K: int, oversample: int = 4) -> np.ndarray:
    """First ``K`` Hermite coefficients of ``func`` by an oversampled quadrature."""
    basis = build_basis(min(K_MAX, max(oversample * K, 64)))
    values = np.asarray(func(basis.nodes), dtype=complex)
    return forward_transform(basis, values, n_modes=K)
