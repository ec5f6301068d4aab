"""Banded spectral operators: ``A``, ``P_K |x|^2 P_K``, the smoothed cutoff ``B_K``,
and the Crank-Nicolson linear solve.

Multiplication by ``x^2`` couples Hermite mode ``m`` only to ``m - 2``, ``m``
and ``m + 2``:

    x^2 e_m = 1/2 [ sqrt((m-1)m) e_{m-2} + (2m+1) e_m + sqrt((m+1)(m+2)) e_{m+2} ]

so every operator here is stored as a main diagonal and one symmetric
off-diagonal at distance two.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lapack

from .errors import ConfigurationError, ContractError, NumericalError
from .hermite import eigenvalues, project_function

__all__ = [
    "OperatorKind",
    "BandedOperator",
    "apply_A",
    "build_x2_truncated",
    "build_BK_smooth",
    "bk_coefficients",
    "apply_banded",
    "CNSystem",
    "solve_cn_system",
    "check_assumptions",
    "AssumptionReport",
]


class OperatorKind(str, enum.Enum):
    X2_FULL_TRUNCATED = "X2_FULL_TRUNCATED"
    BK_SMOOTH = "BK_SMOOTH"
    CUSTOM = "CUSTOM"


@dataclass(frozen=True, eq=False)
class BandedOperator:
    """Real symmetric operator on the first ``K`` Hermite modes.

    ``diag2[m]`` is both the ``(m, m+2)`` and ``(m+2, m)`` entry.
    """

    K: int
    diag0: np.ndarray
    diag2: np.ndarray
    label: OperatorKind = OperatorKind.CUSTOM

    def __post_init__(self):
        d0 = np.asarray(self.diag0, dtype=float)
        d2 = np.asarray(self.diag2, dtype=float)
        if d0.shape != (self.K,) or d2.shape != (max(self.K - 2, 0),):
            raise ContractError(
                f"band shapes {d0.shape}, {d2.shape} do not match K={self.K}"
            )
        if not (np.all(np.isfinite(d0)) and np.all(np.isfinite(d2))):
            raise ContractError("operator entries must be finite")
        d0.setflags(write=False)
        d2.setflags(write=False)
        object.__setattr__(self, "diag0", d0)
        object.__setattr__(self, "diag2", d2)

    def to_dense(self) -> np.ndarray:
        M = np.diag(self.diag0)
        if self.K > 2:
            M += np.diag(self.diag2, 2) + np.diag(self.diag2, -2)
        return M

    def __matmul__(self, coeffs):
        return apply_banded(self, coeffs)


def apply_A(coeffs) -> np.ndarray:
    """``(A u)_k = (2k+1) u_k``."""
    c = np.asarray(coeffs)
    return eigenvalues(c.size) * c


def build_x2_truncated(K: int) -> BandedOperator:
    """``P_K |x|^2 P_K``: couplings that leave the first ``K`` modes are dropped."""
    if K < 1:
        raise ConfigurationError(f"K must be >= 1, got {K}")
    m = np.arange(K)
    diag0 = (2.0 * m + 1.0) / 2.0
    m2 = np.arange(max(K - 2, 0))
    diag2 = 0.5 * np.sqrt((m2 + 1.0) * (m2 + 2.0))
    return BandedOperator(K, diag0, diag2, OperatorKind.X2_FULL_TRUNCATED)


def bk_coefficients(K: int, theta: float, m) -> tuple[np.ndarray, np.ndarray]:
    """Cutoff coefficients ``(alpha_m^K, beta_m^K)`` for integer modes ``m >= 0``.

    Up to ``m <= theta K`` they are the exact ``x^2`` couplings; between
    ``theta K`` and ``K`` they ramp linearly from their value at
    ``floor(theta K)`` down to zero; beyond ``K`` they vanish.
    """
    m = np.asarray(m)
    mf = m.astype(float)
    cut = int(np.floor(theta * K))
    exact_alpha = np.where(mf >= 2, 0.5 * np.sqrt(np.maximum((mf - 1.0) * mf, 0.0)), 0.0)
    exact_beta = 0.5 * (2.0 * mf + 1.0)
    alpha_cut = 0.5 * np.sqrt((cut - 1.0) * cut) if cut >= 2 else 0.0
    beta_cut = 0.5 * (2.0 * cut + 1.0)
    ramp = 1.0 - (mf - cut) / (K - cut)
    low = mf <= theta * K
    mid = (mf > theta * K) & (mf <= K)
    alpha = np.where(low, exact_alpha, np.where(mid, alpha_cut * ramp, 0.0))
    beta = np.where(low, exact_beta, np.where(mid, beta_cut * ramp, 0.0))
    return alpha, beta


def build_BK_smooth(K: int, theta: float = 0.8) -> BandedOperator:
    """Lipschitz spectral cutoff of ``x^2`` restricted to the first ``K`` modes."""
    if not 0.0 < theta < 1.0:
        raise ConfigurationError(f"theta must lie in (0, 1), got {theta}")
    if K < 2:
        raise ConfigurationError(f"K must be >= 2 for the smoothed cutoff, got {K}")
    m = np.arange(K)
    _, beta = bk_coefficients(K, theta, m)
    # gamma_m = alpha_{m+2} sits at (m+2, m); by symmetry also at (m, m+2)
    alpha_shift, _ = bk_coefficients(K, theta, np.arange(2, K))
    return BandedOperator(K, beta, alpha_shift, OperatorKind.BK_SMOOTH)


def apply_banded(op: BandedOperator, coeffs) -> np.ndarray:
    c = np.asarray(coeffs)
    if c.shape != (op.K,):
        raise ContractError(f"operator of size {op.K} applied to vector of shape {c.shape}")
    y = op.diag0 * c
    if op.K > 2:
        y[:-2] += op.diag2 * c[2:]
        y[2:] += op.diag2 * c[:-2]
    return y


_gbtrf = lapack.get_lapack_funcs("gbtrf", dtype=np.complex128)
_gbtrs = lapack.get_lapack_funcs("gbtrs", dtype=np.complex128)


class CNSystem:
    """LU factorization of ``D = Id + i dt/2 A + i s/2 B`` with ``s = sqrt(dt) chi``.

    The factorization (banded LU with partial pivoting, two sub- and two
    super-diagonals) is computed once and reused across fixed-point
    iterations. ``noise`` is the full coefficient multiplying ``B``, already
    including any amplitude factor.
    """

    def __init__(self, dt: float, noise: float, B: BandedOperator):
        if not dt > 0:
            raise ConfigurationError(f"dt must be positive, got {dt}")
        K = B.K
        self.K = K
        self.dt = dt
        self.noise = noise
        self.B = B
        h_diag = 0.5 * dt * eigenvalues(K) + 0.5 * noise * B.diag0
        h_off = 0.5 * noise * B.diag2
        self._h_diag = h_diag
        self._h_off = h_off
        self._lu = None
        if K <= 2:
            # no off-diagonal band; D is diagonal
            self._diag = 1.0 + 1j * h_diag
            return
        kl = ku = 2
        ab = np.zeros((2 * kl + ku + 1, K), dtype=complex)
        # LAPACK band storage: A[i, j] -> ab[kl + ku + i - j, j]
        ab[kl + ku, :] = 1.0 + 1j * h_diag
        ab[kl + ku - 2, 2:] = 1j * h_off
        ab[kl + ku + 2, :-2] = 1j * h_off
        lu, piv, info = _gbtrf(ab, kl, ku)
        if info != 0:
            raise NumericalError(
                f"CN system singular at pivot {info} (dt={dt}, noise={noise}); "
                f"diagonal magnitude range [{np.abs(1 + 1j * h_diag).min():.3e}, "
                f"{np.abs(1 + 1j * h_diag).max():.3e}]"
            )
        self._lu = lu
        self._piv = piv

    def solve(self, rhs) -> np.ndarray:
        rhs = np.asarray(rhs, dtype=complex)
        if rhs.shape != (self.K,):
            raise ContractError(f"rhs of shape {rhs.shape} for system of size {self.K}")
        if self._lu is None:
            return rhs / self._diag
        x, info = _gbtrs(self._lu, 2, 2, rhs, self._piv)
        if info != 0:  # pragma: no cover - only on invalid arguments
            raise NumericalError(f"banded solve failed with info={info}")
        return x

    def apply_D(self, coeffs) -> np.ndarray:
        """``D u``."""
        return np.asarray(coeffs) + 1j * self._apply_half_h(coeffs)

    def apply_C(self, coeffs) -> np.ndarray:
        """``C u = (Id - i dt/2 A - i s/2 B) u``, the explicit half of the step."""
        return np.asarray(coeffs) - 1j * self._apply_half_h(coeffs)

    def _apply_half_h(self, coeffs):
        c = np.asarray(coeffs, dtype=complex)
        y = self._h_diag * c
        if self.K > 2:
            y[:-2] += self._h_off * c[2:]
            y[2:] += self._h_off * c[:-2]
        return y


def solve_cn_system(dt: float, chi: float, B: BandedOperator, rhs, alpha: float = 1.0) -> np.ndarray:
    """Solve ``(Id + i dt/2 A + i alpha sqrt(dt) chi/2 B) u = rhs``."""
    return CNSystem(dt, alpha * np.sqrt(dt) * chi, B).solve(rhs)


# ---------------------------------------------------------------------------
# Assumption diagnostics


@dataclass
class AssumptionReport:
    """Measured ratios per property and per ``K``.

    ``values[name]`` lists the raw measurement for each entry of ``K_list``;
    ``normalized[name]`` divides by the growth rate the property allows
    (``K`` for the ``Sigma^j -> Sigma^j`` norm, 1 for bounded quantities).
    ``flags[name]`` is True when the normalized ratio grows by more than a
    factor ``growth_tolerance`` across the list.
    """

    K_list: list
    theta: float
    j: int
    values: dict
    normalized: dict
    flags: dict
    growth_tolerance: float = 2.0

    @property
    def ok(self) -> bool:
        return not any(self.flags.values())

    def lines(self):
        for name, vals in self.values.items():
            flag = self.flags.get(name)
            tag = "n/a" if flag is None else ("VIOLATION" if flag else "ok")
            body = ", ".join(f"K={K}: {v:.4g}" for K, v in zip(self.K_list, vals))
            yield f"{name:<28} [{tag}] {body}"


def _weighted_norm(Mat, j_out, j_in, K):
    """Operator norm of ``Mat`` from ``Sigma^{j_in}`` to ``Sigma^{j_out}``."""
    lam = eigenvalues(K)
    S = (lam ** (0.5 * j_out))[:, None] * Mat * (lam ** (-0.5 * j_in))[None, :]
    return float(np.linalg.norm(S, 2))


def check_assumptions(K_list, theta: float = 0.8, j: int = 1, builder=None) -> AssumptionReport:
    """Measure the stability and convergence properties required of ``B_K``.

    ``builder(K)`` returns the operator under test; by default the smoothed
    cutoff with parameter ``theta``. Properties measured for each ``K``:

    * ``symmetry``: ``max |<B u, v> - <u, B v>|`` on random vectors;
    * ``norm_sigma_j+2_to_j``: operator norm ``Sigma^{j+2} -> Sigma^j`` (bounded);
    * ``norm_sigma_j_to_j``: operator norm ``Sigma^j -> Sigma^j`` (allowed ~ K);
    * ``top_mode_growth``: ``||B e_{K-1}||_j / ||e_{K-1}||_j`` (allowed ~ K);
    * ``commutator``: ``||[A^j, B]||`` from ``Sigma^{2j}`` to ``L^2`` (bounded);
    * ``commutator_form``: ``sup |Re<[A^j,B]u, B u>| / ||u||^2_j`` (reported only);
    * ``x2_defect``: ``||(x^2 - B) phi||_{L^2}`` for ``phi`` the projection of
      ``exp(-x^2/4)`` on ``2K`` modes (should decrease).
    """
    K_list = [int(K) for K in K_list]
    if any(K < 4 for K in K_list):
        raise ConfigurationError("check_assumptions needs every K >= 4")
    if builder is None:
        def builder(K):
            return build_BK_smooth(K, theta)

    rng = np.random.default_rng(20240607)
    names = [
        "symmetry",
        "norm_sigma_j+2_to_j",
        "norm_sigma_j_to_j",
        "top_mode_growth",
        "commutator",
        "commutator_form",
        "x2_defect",
    ]
    values = {n: [] for n in names}
    for K in K_list:
        B = builder(K)
        Bd = B.to_dense()
        lam = eigenvalues(K)

        u = rng.standard_normal(K) + 1j * rng.standard_normal(K)
        v = rng.standard_normal(K) + 1j * rng.standard_normal(K)
        values["symmetry"].append(
            abs(np.vdot(v, apply_banded(B, u)) - np.vdot(apply_banded(B, v), u))
        )
        values["norm_sigma_j+2_to_j"].append(_weighted_norm(Bd, j, j + 2, K))
        values["norm_sigma_j_to_j"].append(_weighted_norm(Bd, j, j, K))
        top = np.zeros(K)
        top[-1] = 1.0
        Btop = apply_banded(B, top)
        values["top_mode_growth"].append(
            np.sqrt(np.dot(lam ** j, Btop ** 2) / lam[-1] ** j)
        )
        Aj = np.diag(lam ** j)
        comm = Aj @ Bd - Bd @ Aj
        values["commutator"].append(_weighted_norm(comm, 0, 2 * j, K))
        # Re<M u, B u> = u^H H u with H the Hermitian part of B^T M (all real here)
        H = 0.5 * (Bd.T @ comm + comm.T @ Bd)
        W = lam ** (-0.5 * j)
        values["commutator_form"].append(
            float(np.max(np.abs(np.linalg.eigvalsh(W[:, None] * H * W[None, :]))))
        )

        big = 2 * K
        phi = project_function(lambda x: np.exp(-x * x / 4.0), big).real
        x2_phi = apply_banded(build_x2_truncated(big + 2), np.concatenate([phi, [0.0, 0.0]]))
        b_phi = np.zeros(big + 2)
        b_phi[:K] = apply_banded(B, phi[:K])
        values["x2_defect"].append(float(np.linalg.norm(x2_phi - b_phi)))

    Ks = np.asarray(K_list, dtype=float)
    rates = {
        "norm_sigma_j+2_to_j": np.ones_like(Ks),
        "norm_sigma_j_to_j": Ks,
        "top_mode_growth": Ks,
        "commutator": np.ones_like(Ks),
    }
    normalized = {}
    flags = {}
    growth_tol = 2.0
    for name, rate in rates.items():
        ratio = np.asarray(values[name]) / rate
        normalized[name] = ratio.tolist()
        flags[name] = bool(ratio.max() > growth_tol * ratio[0])
    flags["symmetry"] = bool(max(values["symmetry"]) > 1e-10 * max(Ks))
    defect = np.asarray(values["x2_defect"])
    flags["x2_defect"] = bool(np.any(np.diff(defect) > 0))
    return AssumptionReport(K_list, theta, j, values, normalized, flags, growth_tol)
