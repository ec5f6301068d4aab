"""Time integrators for the stochastic Gross-Pitaevskii equation

    i dphi = (-phi'' + x^2 phi + lam |phi|^2 phi) dt + alpha x^2 phi o dW

(Stratonovich noise) in one space dimension.

Four discretizations are provided:

* ``CN_HERMITE``: Crank-Nicolson in time, Hermite-spectral in space, with the
  implicit nonlinearity solved by fixed-point iteration;
* ``SPLIT_HERMITE``: Lie splitting, exact harmonic-oscillator flow in the
  Hermite basis then an exact pointwise phase for noise and nonlinearity;
* ``SPLIT_FOURIER``: Lie splitting on a periodic grid of ``[-Lx, Lx)``, exact
  free flow in Fourier space then a pointwise phase for the trap, the noise and
  the nonlinearity;
* ``CN_FD``: Crank-Nicolson with second-order finite differences on ``2K+1``
  points of ``[-Lx, Lx]`` with homogeneous Dirichlet conditions.

Hermite states are complex coefficient vectors; grid states are
:class:`GridState`.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import lapack

from .errors import ConfigurationError, ContractError, StepError
from .hermite import build_basis, eigenvalues, hermite_function_matrix, project_function
from .nonlinearity import NO_CUTOFF, CutoffProfile, CutoffShape, Projector, g_L_spectral, g_pointwise
from .operators import BandedOperator, CNSystem, OperatorKind, build_BK_smooth, build_x2_truncated
from .stochastic import BrownianPath, chi_sequence, coarsen, stopping_index

__all__ = [
    "Scheme",
    "Boundary",
    "SchemeConfig",
    "GridState",
    "Trajectory",
    "make_stepper",
    "cn_hermite_step",
    "split_hermite_step",
    "split_fourier_step",
    "cn_fd_step",
    "evolve",
    "build_B",
    "initial_state",
    "sample_state",
    "norms",
    "HERMITE_SCHEMES",
    "GRID_SCHEMES",
]


class Scheme(str, enum.Enum):
    CN_HERMITE = "CN_HERMITE"
    SPLIT_HERMITE = "SPLIT_HERMITE"
    SPLIT_FOURIER = "SPLIT_FOURIER"
    CN_FD = "CN_FD"


HERMITE_SCHEMES = frozenset({Scheme.CN_HERMITE, Scheme.SPLIT_HERMITE})
GRID_SCHEMES = frozenset({Scheme.SPLIT_FOURIER, Scheme.CN_FD})


class Boundary(str, enum.Enum):
    PERIODIC = "PERIODIC"
    DIRICHLET = "DIRICHLET"


@dataclass(frozen=True)
class SchemeConfig:
    """Parameters of a single trajectory.

    ``K`` is the number of Hermite modes, the number of periodic grid points
    for ``SPLIT_FOURIER``, or the half-grid size for ``CN_FD`` (``2K+1``
    points, spacing ``Lx/K``). ``lam`` is the nonlinearity coefficient
    (``+1`` defocusing, ``-1`` focusing, ``0`` linear) and
    ``alpha`` the amplitude of the noise. ``Lx`` is ignored by the Hermite
    schemes.
    """

    scheme: Scheme = Scheme.CN_HERMITE
    K: int = 64
    lam: float = 1.0
    alpha: float = 1.0
    dt: float = 2.0**-8
    T: float = 1.0
    B_choice: OperatorKind = OperatorKind.X2_FULL_TRUNCATED
    theta: float = 0.8
    C0: float = math.inf
    cutoff: CutoffProfile = NO_CUTOFF
    Lx: float | None = None
    fp_tol: float = 1e-12
    fp_max_iter: int = 50
    quad_oversample: int = 2

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        object.__setattr__(self, "B_choice", OperatorKind(self.B_choice))
        if self.B_choice is OperatorKind.CUSTOM:
            raise ConfigurationError("B_choice must be X2_FULL_TRUNCATED or BK_SMOOTH")
        if isinstance(self.K, bool) or int(self.K) != self.K or self.K < 1:
            raise ConfigurationError(f"K must be a positive integer, got {self.K!r}")
        object.__setattr__(self, "K", int(self.K))
        if not self.dt > 0:
            raise ConfigurationError(f"dt must be positive, got {self.dt}")
        if not self.T >= 0:
            raise ConfigurationError(f"T must be non-negative, got {self.T}")
        self.n_steps  # validates T/dt
        if not math.isfinite(self.lam):
            raise ConfigurationError(f"lam must be finite, got {self.lam}")
        if self.alpha < 0:
            raise ConfigurationError(f"alpha must be >= 0, got {self.alpha}")
        if self.scheme in GRID_SCHEMES and not (self.Lx is not None and self.Lx > 0):
            raise ConfigurationError(f"{self.scheme.value} requires Lx > 0")
        if self.scheme is Scheme.SPLIT_FOURIER and self.K < 3:
            raise ConfigurationError("SPLIT_FOURIER needs at least 3 grid points")
        if self.B_choice is OperatorKind.BK_SMOOTH and not 0 < self.theta < 1:
            raise ConfigurationError(f"theta must lie in (0, 1), got {self.theta}")
        if not self.C0 > 0:
            raise ConfigurationError(f"C0 must be positive, got {self.C0}")
        if not self.fp_tol > 0 or self.fp_max_iter < 1:
            raise ConfigurationError("fp_tol must be > 0 and fp_max_iter >= 1")
        if self.quad_oversample < 1:
            raise ConfigurationError("quad_oversample must be >= 1")

    @property
    def n_steps(self) -> int:
        if self.T == 0:
            return 0
        ratio = self.T / self.dt
        N = int(round(ratio))
        if abs(ratio - N) > 1e-9 * max(1.0, ratio):
            raise ConfigurationError(f"T/dt = {ratio!r} is not an integer")
        return N

    def with_(self, **changes) -> "SchemeConfig":
        return replace(self, **changes)


@dataclass(frozen=True, eq=False)
class GridState:
    """Values on a uniform grid of ``[-Lx, Lx]``.

    Periodic states hold ``M`` points ``-Lx + 2 Lx j / M``; Dirichlet states
    hold ``M`` points including both boundary points, where values are zero.
    """

    values: np.ndarray
    Lx: float
    boundary: Boundary

    def __post_init__(self):
        object.__setattr__(self, "boundary", Boundary(self.boundary))
        vals = np.asarray(self.values, dtype=complex)
        object.__setattr__(self, "values", vals)
        if vals.ndim != 1 or vals.size < 3:
            raise ContractError("a grid state needs at least 3 points")
        if self.boundary is Boundary.DIRICHLET and (vals[0] != 0 or vals[-1] != 0):
            raise ContractError("Dirichlet grid state must vanish at both ends")

    @property
    def x(self) -> np.ndarray:
        M = self.values.size
        if self.boundary is Boundary.PERIODIC:
            return -self.Lx + 2.0 * self.Lx * np.arange(M) / M
        return np.linspace(-self.Lx, self.Lx, M)

    @property
    def dx(self) -> float:
        M = self.values.size
        if self.boundary is Boundary.PERIODIC:
            return 2.0 * self.Lx / M
        return 2.0 * self.Lx / (M - 1)


# ---------------------------------------------------------------------------
# steppers


def build_B(cfg: SchemeConfig) -> BandedOperator:
    if cfg.B_choice is OperatorKind.BK_SMOOTH:
        return build_BK_smooth(cfg.K, cfg.theta)
    return build_x2_truncated(cfg.K)


class _CNHermite:
    def __init__(self, cfg: SchemeConfig, B: BandedOperator | None = None):
        self.cfg = cfg
        self.B = build_B(cfg) if B is None else B
        if self.B.K != cfg.K:
            raise ContractError(f"operator has {self.B.K} modes, config has {cfg.K}")
        self.projector = Projector(cfg.K, cfg.quad_oversample)
        self.sqrt_dt = math.sqrt(cfg.dt)

    def step(self, phi, chi):
        cfg = self.cfg
        system = CNSystem(cfg.dt, cfg.alpha * self.sqrt_dt * chi, self.B)
        rhs = system.apply_C(phi)
        nxt = system.solve(rhs)
        if cfg.lam == 0:
            return nxt, 0
        scale = cfg.fp_tol * np.linalg.norm(phi)
        coef = 1j * cfg.lam * cfg.dt
        history = []
        for it in range(1, cfg.fp_max_iter + 1):
            g = g_L_spectral(phi, nxt, profile=cfg.cutoff, projector=self.projector)
            new = system.solve(rhs - coef * g)
            delta = float(np.linalg.norm(new - nxt))
            nxt = new
            if delta <= scale:
                return nxt, it
            history.append(delta)
        raise StepError(
            f"fixed-point iteration did not reach tolerance {cfg.fp_tol:g} in "
            f"{cfg.fp_max_iter} iterations (last update {history[-1]:.3e}, "
            f"chi={chi:.3f}); reduce dt or truncate the nonlinearity",
            iterations=cfg.fp_max_iter,
            residuals=history,
        )

    def residual(self, phi, nxt, chi):
        """``D phi^{n+1} - C phi^n + i lam dt P_K g(phi^n, phi^{n+1})``."""
        cfg = self.cfg
        system = CNSystem(cfg.dt, cfg.alpha * self.sqrt_dt * chi, self.B)
        g = g_L_spectral(phi, nxt, profile=cfg.cutoff, projector=self.projector)
        return system.apply_D(nxt) - system.apply_C(phi) + 1j * cfg.lam * cfg.dt * g


class _SplitHermite:
    def __init__(self, cfg: SchemeConfig):
        self.cfg = cfg
        self.basis = build_basis(cfg.K)
        self.free = np.exp(-1j * eigenvalues(cfg.K) * cfg.dt)
        self.x2 = self.basis.nodes**2
        self._ET = np.ascontiguousarray(self.basis.functions.T)
        self._WE = np.ascontiguousarray(self.basis.functions * self.basis.weights)
        self.sqrt_dt = math.sqrt(cfg.dt)

    def step(self, phi, chi):
        cfg = self.cfg
        psi = self._ET @ (self.free * phi)
        dens = psi.real**2 + psi.imag**2
        psi = psi * np.exp(-1j * (self.x2 * (cfg.alpha * self.sqrt_dt * chi) + cfg.lam * cfg.dt * dens))
        return self._WE @ psi, 0


class _SplitFourier:
    def __init__(self, cfg: SchemeConfig):
        self.cfg = cfg
        M = cfg.K
        self.x = -cfg.Lx + 2.0 * cfg.Lx * np.arange(M) / M
        dx = 2.0 * cfg.Lx / M
        xi = 2.0 * np.pi * np.fft.fftfreq(M, d=dx)
        self.free = np.exp(-1j * xi**2 * cfg.dt)
        self.x2 = self.x**2
        self.sqrt_dt = math.sqrt(cfg.dt)

    def step(self, v, chi):
        cfg = self.cfg
        v = np.fft.ifft(self.free * np.fft.fft(v))
        dens = v.real**2 + v.imag**2
        phase = self.x2 * (cfg.dt + cfg.alpha * self.sqrt_dt * chi) + cfg.lam * cfg.dt * dens
        return v * np.exp(-1j * phase), 0


_gttrf = lapack.get_lapack_funcs("gttrf", dtype=np.complex128)
_gttrs = lapack.get_lapack_funcs("gttrs", dtype=np.complex128)


class _CNFiniteDifference:
    def __init__(self, cfg: SchemeConfig):
        self.cfg = cfg
        K = cfg.K
        self.dx = cfg.Lx / K
        self.x = np.linspace(-cfg.Lx, cfg.Lx, 2 * K + 1)
        self.x2 = self.x[1:-1] ** 2
        self.n = 2 * K - 1
        self.sqrt_dt = math.sqrt(cfg.dt)
        self.hop = cfg.dt / self.dx**2

    def _half_h(self, u, q):
        # (H/2) u with H = dt (-Laplacian_h) + q x^2, zero Dirichlet data outside
        y = (self.hop + 0.5 * q * self.x2) * u
        y[1:] -= 0.5 * self.hop * u[:-1]
        y[:-1] -= 0.5 * self.hop * u[1:]
        return y

    def step(self, v, chi):
        cfg = self.cfg
        q = cfg.dt + cfg.alpha * self.sqrt_dt * chi
        u = v[1:-1]
        d = 1.0 + 1j * (self.hop + 0.5 * q * self.x2)
        off = np.full(self.n - 1, -0.5j * self.hop)
        dl, dd, du, du2, ipiv, info = _gttrf(off.copy(), d, off.copy())
        if info != 0:  # pragma: no cover - D = Id + iH/2 with H real symmetric
            raise StepError(f"finite-difference CN system singular (info={info})")
        rhs = u - 1j * self._half_h(u, q)

        def solve(b):
            x, info = _gttrs(dl, dd, du, du2, ipiv, b)
            return x

        nxt = solve(rhs)
        iters = 0
        if cfg.lam != 0:
            scale = cfg.fp_tol * np.linalg.norm(u)
            coef = 1j * cfg.lam * cfg.dt
            history = []
            for iters in range(1, cfg.fp_max_iter + 1):
                new = solve(rhs - coef * g_pointwise(nxt, u))
                delta = float(np.linalg.norm(new - nxt))
                nxt = new
                if delta <= scale:
                    break
                history.append(delta)
            else:
                raise StepError(
                    f"finite-difference fixed point did not converge in {cfg.fp_max_iter} iterations",
                    iterations=cfg.fp_max_iter,
                    residuals=history,
                )
        out = np.zeros_like(v)
        out[1:-1] = nxt
        return out, iters


def make_stepper(cfg: SchemeConfig, B: BandedOperator | None = None):
    """Precomputed one-step map for ``cfg``; ``stepper.step(state, chi)``
    returns ``(new_state, fixed_point_iterations)`` on raw arrays."""
    if cfg.scheme is Scheme.CN_HERMITE:
        return _CNHermite(cfg, B)
    if cfg.scheme is Scheme.SPLIT_HERMITE:
        return _SplitHermite(cfg)
    if cfg.scheme is Scheme.SPLIT_FOURIER:
        return _SplitFourier(cfg)
    return _CNFiniteDifference(cfg)


def _check_coeffs(state, K):
    c = np.asarray(state, dtype=complex)
    if c.shape != (K,):
        raise ContractError(f"state has shape {c.shape}, config expects ({K},)")
    if not np.all(np.isfinite(c)):
        raise ContractError("state contains non-finite coefficients")
    return c


def cn_hermite_step(state, chi: float, cfg: SchemeConfig, basis=None, B: BandedOperator | None = None):
    """One Crank-Nicolson step ``D phi^{n+1} = C phi^n - i lam dt P_K g(phi^n, phi^{n+1})``.

    ``basis`` is unused (the oversampled quadrature is built from ``cfg``) and
    kept for call-site symmetry with :func:`split_hermite_step`.
    """
    cfg = cfg.with_(scheme=Scheme.CN_HERMITE)
    return _CNHermite(cfg, B).step(_check_coeffs(state, cfg.K), chi)[0]


def split_hermite_step(state, chi: float, cfg: SchemeConfig, basis=None):
    cfg = cfg.with_(scheme=Scheme.SPLIT_HERMITE)
    return _SplitHermite(cfg).step(_check_coeffs(state, cfg.K), chi)[0]


def split_fourier_step(state: GridState, chi: float, cfg: SchemeConfig) -> GridState:
    if state.boundary is not Boundary.PERIODIC:
        raise ContractError("split_fourier_step needs a periodic grid state")
    cfg = cfg.with_(scheme=Scheme.SPLIT_FOURIER, K=state.values.size, Lx=state.Lx)
    v, _ = _SplitFourier(cfg).step(state.values, chi)
    return GridState(v, state.Lx, Boundary.PERIODIC)


def cn_fd_step(state: GridState, chi: float, cfg: SchemeConfig) -> GridState:
    if state.boundary is not Boundary.DIRICHLET:
        raise ContractError("cn_fd_step needs a Dirichlet grid state")
    M = state.values.size
    if M % 2 == 0:
        raise ContractError("finite-difference grid must have 2K+1 points")
    cfg = cfg.with_(scheme=Scheme.CN_FD, K=(M - 1) // 2, Lx=state.Lx)
    v, _ = _CNFiniteDifference(cfg).step(state.values, chi)
    return GridState(v, state.Lx, Boundary.DIRICHLET)


# ---------------------------------------------------------------------------
# states, sampling and norms


def grid_points(cfg: SchemeConfig) -> np.ndarray:
    if cfg.scheme is Scheme.SPLIT_FOURIER:
        return -cfg.Lx + 2.0 * cfg.Lx * np.arange(cfg.K) / cfg.K
    if cfg.scheme is Scheme.CN_FD:
        return np.linspace(-cfg.Lx, cfg.Lx, 2 * cfg.K + 1)
    raise ContractError(f"{cfg.scheme.value} is not a grid scheme")


def initial_state(cfg: SchemeConfig, func):
    """Discretize the initial datum ``func(x)`` for ``cfg.scheme``.

    Hermite schemes get the projection onto ``K`` modes, grid schemes the
    point values (zero at Dirichlet boundaries).
    """
    if cfg.scheme in HERMITE_SCHEMES:
        return project_function(func, cfg.K)
    x = grid_points(cfg)
    vals = np.asarray(func(x), dtype=complex)
    if cfg.scheme is Scheme.CN_FD:
        vals[0] = vals[-1] = 0.0
        return GridState(vals, cfg.Lx, Boundary.DIRICHLET)
    return GridState(vals, cfg.Lx, Boundary.PERIODIC)


def sample_state(state, x) -> np.ndarray:
    """Values of a Hermite or grid state at arbitrary points ``x``.

    Hermite expansions are summed exactly; periodic states use trigonometric
    interpolation; Dirichlet states use piecewise-linear interpolation. Grid
    states are zero outside ``[-Lx, Lx]``.
    """
    x = np.asarray(x, dtype=float)
    if not isinstance(state, GridState):
        c = np.asarray(state)
        return hermite_function_matrix(c.size - 1, x).T @ c
    inside = np.abs(x) <= state.Lx
    if state.boundary is Boundary.DIRICHLET:
        xs = state.x
        re = np.interp(x, xs, state.values.real)
        im = np.interp(x, xs, state.values.imag)
        return np.where(inside, re + 1j * im, 0.0)
    M = state.values.size
    a = np.fft.fft(state.values) / M
    m = np.fft.fftfreq(M, d=1.0 / M)
    xi = np.pi * m / state.Lx
    shift = x + state.Lx
    modes = np.exp(1j * np.outer(shift, xi))
    if M % 2 == 0:
        # split the Nyquist mode symmetrically so the interpolant is real for real data
        nyq = M // 2
        modes[:, nyq] = np.cos(xi[nyq] * shift)
    vals = modes @ a
    return np.where(inside, vals, 0.0)


def norms(state) -> tuple[float, float]:
    """``(||u||^2_{L^2}, <A u, u>)`` with the discretization's own quadrature."""
    if not isinstance(state, GridState):
        c = np.asarray(state)
        p = np.abs(c) ** 2
        return float(p.sum()), float(np.dot(eigenvalues(c.size), p))
    v = state.values
    dx = state.dx
    x = state.x
    l2 = dx * float(np.sum(np.abs(v) ** 2))
    pot = dx * float(np.sum(x**2 * np.abs(v) ** 2))
    if state.boundary is Boundary.PERIODIC:
        M = v.size
        xi = 2.0 * np.pi * np.fft.fftfreq(M, d=dx)
        kin = dx / M * float(np.sum(xi**2 * np.abs(np.fft.fft(v)) ** 2))
    else:
        kin = float(np.sum(np.abs(np.diff(v)) ** 2)) / dx
    return l2, kin + pot


# ---------------------------------------------------------------------------
# trajectory loop


@dataclass
class Trajectory:
    """Result of :func:`evolve`.

    Per-step arrays have ``n_steps + 1`` entries (index 0 is the initial
    state); ``chi[0]`` and ``fp_iters[0]`` are zero. ``stopping_index`` is
    ``n_steps + 1`` when the increment truncation never fired.
    """

    config: SchemeConfig
    final: object
    t: np.ndarray
    chi: np.ndarray
    l2_norm_sq: np.ndarray
    sigma1_norm_sq: np.ndarray
    fp_iters: np.ndarray
    stopping_index: int
    states: list | None = field(default=None, repr=False)

    @property
    def n_steps(self) -> int:
        return self.t.size - 1


def _path_for(cfg: SchemeConfig, path: BrownianPath) -> BrownianPath:
    N = cfg.n_steps
    if path.T < cfg.T * (1 - 1e-12):
        raise ContractError(f"path horizon {path.T} shorter than T={cfg.T}")
    if N == 0:
        return path
    ratio = cfg.dt / path.dt
    factor = int(round(ratio))
    if factor < 1 or abs(ratio - factor) > 1e-9 * ratio:
        raise ContractError(f"config dt={cfg.dt} is not an integer multiple of path dt={path.dt}")
    return coarsen(path, factor)


def evolve(cfg: SchemeConfig, path: BrownianPath, initial, record: bool = True,
           keep_states: bool = False, B: BandedOperator | None = None) -> Trajectory:
    """Run ``cfg.n_steps`` steps from ``initial`` driven by ``path``.

    The path is coarsened to ``cfg.dt`` when it was generated on a finer grid.
    Once the increment stopping time has fired (only for finite ``cfg.C0``)
    the state is frozen for the remaining steps.
    """
    N = cfg.n_steps
    grid = isinstance(initial, GridState)
    if grid != (cfg.scheme in GRID_SCHEMES):
        raise ContractError(f"initial state type does not match scheme {cfg.scheme.value}")
    if grid:
        expected = cfg.K if cfg.scheme is Scheme.SPLIT_FOURIER else 2 * cfg.K + 1
        if initial.values.size != expected:
            raise ContractError(f"grid state has {initial.values.size} points, expected {expected}")
        state = initial.values.copy()
    else:
        state = _check_coeffs(initial, cfg.K).copy()

    p = _path_for(cfg, path)
    chis = chi_sequence(p)[:N]
    tau = stopping_index(chis, cfg.dt, cfg.C0)
    stepper = make_stepper(cfg, B) if N else None

    def wrap(arr):
        if not grid:
            return arr
        return GridState(arr, initial.Lx, initial.boundary)

    l2 = np.zeros(N + 1)
    s1 = np.zeros(N + 1)
    iters = np.zeros(N + 1, dtype=int)
    chi_out = np.zeros(N + 1)
    chi_out[1:] = chis
    states = [wrap(state.copy())] if keep_states else None
    if record:
        l2[0], s1[0] = norms(wrap(state))
    for n in range(N):
        if n + 1 < tau:
            try:
                state, iters[n + 1] = stepper.step(state, chis[n])
            except StepError as exc:
                exc.step = n + 1
                raise
        if record:
            l2[n + 1], s1[n + 1] = norms(wrap(state))
        if keep_states:
            states.append(wrap(state.copy()))
    if not record:
        l2[-1], s1[-1] = norms(wrap(state))
    t = cfg.dt * np.arange(N + 1)
    return Trajectory(cfg, wrap(state), t, chi_out, l2, s1, iters, tau, states)
