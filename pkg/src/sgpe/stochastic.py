"""Reproducible Brownian increments, coarsening and the increment stopping time.

Increments come from numpy's Philox counter-based generator keyed by
``(seed, sample)``, turned into normals by the inverse CDF. Each sample is an
independent stream, so Monte Carlo samples can be generated in any order or
in parallel and still be bitwise reproducible.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri

from .errors import ConfigurationError, ContractError

__all__ = [
    "BrownianPath",
    "standard_normals",
    "generate_path",
    "coarsen",
    "chi_sequence",
    "stopping_index",
    "n_steps",
]

_MASK64 = (1 << 64) - 1


def n_steps(T: float, dt: float, tol: float = 1e-9) -> int:
    """Integer number of steps ``T / dt``; raises if it is not an integer."""
    if not (T > 0 and dt > 0):
        raise ConfigurationError(f"T and dt must be positive, got T={T}, dt={dt}")
    ratio = T / dt
    N = int(round(ratio))
    if N < 1 or abs(ratio - N) > tol * max(1.0, ratio):
        raise ConfigurationError(f"T/dt = {ratio!r} is not an integer")
    return N


def standard_normals(seed: int, sample: int, size: int) -> np.ndarray:
    """``size`` standard normals from the Philox stream keyed by ``(seed, sample)``."""
    key = np.array([seed & _MASK64, sample & _MASK64], dtype=np.uint64)
    gen = np.random.Generator(np.random.Philox(key=key))
    bits = gen.integers(0, 1 << 53, size=size, dtype=np.int64, endpoint=False)
    # midpoint of each dyadic cell keeps the argument strictly inside (0, 1)
    u = (bits.astype(np.float64) + 0.5) * 2.0**-53
    return ndtri(u)


@dataclass(frozen=True, eq=False)
class BrownianPath:
    """Wiener increments on a uniform grid of ``[0, T]``.

    ``fine`` keeps the increments at generation resolution and ``factor`` the
    number of fine steps per step of this path; coarsening always sums from
    ``fine`` so the result does not depend on how it was reached.
    """

    seed: int
    dt: float
    increments: np.ndarray
    T: float
    sample: int = 0
    fine: np.ndarray | None = field(default=None, repr=False)
    factor: int = 1

    def __post_init__(self):
        self.increments.setflags(write=False)
        if self.fine is None:
            object.__setattr__(self, "fine", self.increments)

    @property
    def n_steps(self) -> int:
        return self.increments.size

    def total(self) -> float:
        return math.fsum(self.increments)


def generate_path(seed: int, T: float, dt_fine: float, sample: int = 0) -> BrownianPath:
    N = n_steps(T, dt_fine)
    inc = math.sqrt(dt_fine) * standard_normals(seed, sample, N)
    return BrownianPath(int(seed), float(dt_fine), inc, float(T), int(sample))


def _block_sums(x: np.ndarray, factor: int) -> np.ndarray:
    # correctly rounded block sums: grouping-independent, hence exactly composable
    return np.array([math.fsum(row) for row in x.reshape(-1, factor).tolist()])


def coarsen(path: BrownianPath, factor: int) -> BrownianPath:
    """Sum blocks of ``factor`` consecutive increments (same seed and sample)."""
    if not isinstance(factor, (int, np.integer)) or factor < 1:
        raise ContractError(f"coarsening factor must be a positive integer, got {factor!r}")
    if path.n_steps % factor:
        raise ContractError(f"factor {factor} does not divide {path.n_steps} steps")
    if factor == 1:
        return path
    total = path.factor * int(factor)
    inc = _block_sums(np.asarray(path.fine), total)
    return BrownianPath(path.seed, path.T / inc.size, inc, path.T, path.sample, path.fine, total)


def chi_sequence(path: BrownianPath) -> np.ndarray:
    """Normalized increments ``chi^{n+1} = dW_n / sqrt(dt)``."""
    return np.asarray(path.increments) / math.sqrt(path.dt)


def stopping_index(chis, dt: float, C0: float) -> int:
    """First ``n`` in ``1..N`` with ``sqrt(dt) |chi^n| >= C0``, else ``N + 1``."""
    if not C0 > 0:
        raise ContractError(f"C0 must be positive, got {C0}")
    chis = np.asarray(chis, dtype=float)
    if math.isinf(C0):
        return chis.size + 1
    hits = np.flatnonzero(math.sqrt(dt) * np.abs(chis) >= C0)
    return int(hits[0]) + 1 if hits.size else chis.size + 1
