"""Monte Carlo convergence and stability studies.

A study is a grid of *cells* (scheme, K, dt, Lx, alpha) evaluated on
``n_samples`` independent Brownian paths. Each sample is a self-contained
work unit keyed by ``(seed, sample)``, so samples can run in worker processes
and are reduced afterwards in index order: the rows do not depend on
scheduling.

Four study kinds are provided:

``SPACE_PATHWISE``
    One path per sample, errors between successive entries of a K ladder.
``CROSS_SCHEME``
    Errors of grid schemes at several domain sizes against a fine Hermite
    reference, with a Richardson estimate of the reference's own time error.
``TIME_MEANSQUARE``
    Squared errors between successive time steps on coarsenings of one fine
    path (coupled refinement), averaged over samples.
``STABILITY_VS_K``
    Crank-Nicolson versus splitting difference over a K ladder and several
    time steps, with the diagnostic ``sqrt(dt) K / 2``.
"""
from __future__ import annotations

import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from datetime import datetime, timezone
from functools import partial
from typing import NamedTuple

import numpy as np
from scipy import stats

from .config import config_hash, scheme_config_to_dict
from .errors import ConfigurationError, ContractError, EstimationError, StepError
from .hermite import sigma_norm_sq
from .profiles import DEFAULT_INITIAL, InitialDatum
from .schemes import (
    GRID_SCHEMES,
    HERMITE_SCHEMES,
    Boundary,
    GridState,
    Scheme,
    SchemeConfig,
    evolve,
    initial_state,
    norms,
    sample_state,
)
from .stochastic import coarsen, generate_path, standard_normals

__all__ = [
    "StudyKind",
    "ErrorNorm",
    "StudyConfig",
    "StudyResult",
    "OrderFit",
    "TruncationReport",
    "ROW_COLUMNS",
    "difference_sq",
    "fit_order",
    "cn_diagonal_scale",
    "run_study",
    "run_space_pathwise",
    "run_cross_scheme",
    "run_time_meansquare",
    "run_stability_vs_K",
    "truncation_frequency",
    "preset",
    "PRESET_NAMES",
    "study_config_to_dict",
]


class StudyKind(str, enum.Enum):
    SPACE_PATHWISE = "SPACE_PATHWISE"
    CROSS_SCHEME = "CROSS_SCHEME"
    TIME_MEANSQUARE = "TIME_MEANSQUARE"
    STABILITY_VS_K = "STABILITY_VS_K"


class ErrorNorm(str, enum.Enum):
    L2 = "L2"
    SIGMA1 = "SIGMA1"


ROW_COLUMNS = (
    "study_kind", "scheme", "K", "dof", "dt", "Lx", "alpha", "sample_id",
    "error_sq", "stderr", "cfl_diag", "slope", "slope_stderr", "fit_window", "flag",
)

_STABILITY_LABEL = "CN_HERMITE-SPLIT_HERMITE"
_REFERENCE_PREFIX = "REFERENCE:"


@dataclass(frozen=True)
class StudyConfig:
    """Parameters of one study.

    ``ladder`` is a K ladder for ``SPACE_PATHWISE``, ``CROSS_SCHEME`` and
    ``STABILITY_VS_K`` and a ladder of step counts ``N`` (``dt = T / N``) for
    ``TIME_MEANSQUARE``. It must be strictly increasing. The time step of
    ``STABILITY_VS_K`` cells comes from ``n_steps_values``; empty tuples for
    ``schemes``, ``k_values``, ``alpha_values``, ``lx_values`` and
    ``n_steps_values`` fall back to the corresponding field of ``base``.
    """

    kind: StudyKind
    base: SchemeConfig
    ladder: tuple
    n_samples: int = 1
    error_norm: ErrorNorm = ErrorNorm.L2
    seed: int = 0
    schemes: tuple = ()
    k_values: tuple = ()
    n_steps_values: tuple = ()
    lx_values: tuple = ()
    alpha_values: tuple = ()
    initial: InitialDatum = DEFAULT_INITIAL
    eval_points: int = 2048
    reference_scheme: Scheme = Scheme.SPLIT_HERMITE

    def __post_init__(self):
        object.__setattr__(self, "kind", StudyKind(self.kind))
        object.__setattr__(self, "error_norm", ErrorNorm(self.error_norm))
        object.__setattr__(self, "reference_scheme", Scheme(self.reference_scheme))
        ladder = tuple(int(v) for v in self.ladder)
        object.__setattr__(self, "ladder", ladder)
        if len(ladder) < 2:
            raise ConfigurationError("ladder needs at least two levels")
        if any(b <= a for a, b in zip(ladder, ladder[1:])):
            raise ConfigurationError(f"ladder must be strictly increasing, got {ladder}")
        if ladder[0] < 1:
            raise ConfigurationError("ladder entries must be positive")
        if self.n_samples < 1:
            raise ConfigurationError(f"n_samples must be >= 1, got {self.n_samples}")
        if self.eval_points < 16:
            raise ConfigurationError("eval_points must be at least 16")
        if self.seed < 0:
            raise ConfigurationError("seed must be non-negative")

        schemes = tuple(Scheme(s) for s in self.schemes) or (self.base.scheme,)
        if self.kind is StudyKind.CROSS_SCHEME and not self.schemes:
            schemes = (Scheme.SPLIT_FOURIER,)
        object.__setattr__(self, "schemes", schemes)
        object.__setattr__(self, "k_values", tuple(int(k) for k in self.k_values) or (self.base.K,))
        object.__setattr__(self, "alpha_values", tuple(float(a) for a in self.alpha_values) or (self.base.alpha,))
        lx = tuple(float(v) for v in self.lx_values)
        if not lx and self.base.Lx is not None:
            lx = (float(self.base.Lx),)
        object.__setattr__(self, "lx_values", lx)
        nsv = tuple(int(n) for n in self.n_steps_values) or (self.base.n_steps,)
        object.__setattr__(self, "n_steps_values", nsv)

        if any(s in GRID_SCHEMES for s in schemes) or self.kind is StudyKind.CROSS_SCHEME:
            if not lx or min(lx) <= 0:
                raise ConfigurationError("grid schemes need positive lx_values (or base.Lx)")
        if self.kind is StudyKind.TIME_MEANSQUARE:
            self._check_divides(ladder, "ladder")
            if any(s not in HERMITE_SCHEMES for s in schemes):
                raise ConfigurationError("TIME_MEANSQUARE runs Hermite schemes only")
        if self.kind is StudyKind.STABILITY_VS_K:
            self._check_divides(nsv, "n_steps_values")
        if self.kind is StudyKind.CROSS_SCHEME:
            if self.reference_scheme not in HERMITE_SCHEMES:
                raise ConfigurationError("reference_scheme must be a Hermite scheme")
            if self.base.n_steps % 2:
                raise ConfigurationError("CROSS_SCHEME needs an even number of steps for the reference estimate")
        if self.kind is StudyKind.SPACE_PATHWISE and Scheme.CN_FD in schemes and any(k % 2 for k in ladder):
            raise ConfigurationError("CN_FD in a K ladder needs even K (it uses K/2 cells per half-domain)")

    @staticmethod
    def _check_divides(values, name):
        values = tuple(values)
        finest = max(values)
        if any(v < 1 or finest % v for v in values):
            raise ConfigurationError(f"{name} {values}: every step count must divide the finest one")

    @property
    def finest_steps(self) -> int:
        if self.kind is StudyKind.TIME_MEANSQUARE:
            return max(self.ladder)
        if self.kind is StudyKind.STABILITY_VS_K:
            return max(self.n_steps_values)
        return self.base.n_steps

    def with_(self, **changes) -> "StudyConfig":
        kwargs = {f.name: getattr(self, f.name) for f in fields(self)}
        kwargs.update(changes)
        return StudyConfig(**kwargs)


def study_config_to_dict(cfg: StudyConfig) -> dict:
    d = {f.name: getattr(cfg, f.name) for f in fields(StudyConfig)}
    d["base"] = scheme_config_to_dict(cfg.base)
    d["initial"] = cfg.initial.to_dict()
    return d


class OrderFit(NamedTuple):
    """Least-squares fit of ``log2(error)`` against ``log2(level)``."""

    slope: float
    intercept: float
    stderr: float
    window: tuple
    excluded: tuple


@dataclass
class StudyResult:
    """Rows of a study plus fits and provenance.

    ``rows`` are dicts keyed by :data:`ROW_COLUMNS`; every cell contributes
    one row per sample followed by one ``sample_id="mean"`` row. Slope
    fields are filled only on mean rows.
    """

    config: StudyConfig
    rows: list
    fits: dict
    provenance: dict
    meta: dict = field(default_factory=dict)

    def mean_rows(self, **match):
        out = [r for r in self.rows if r["sample_id"] == "mean"]
        for k, v in match.items():
            out = [r for r in out if r[k] == v]
        return out


# ---------------------------------------------------------------------------
# fitting and diagnostics


def fit_order(levels, errors, drop_coarsest: bool = True, floor: float = 0.0) -> OrderFit:
    """Slope of ``log2(errors)`` against ``log2(levels)``.

    ``levels`` are step sizes (``dt`` or ``1/K``); the coarsest is the
    largest. Non-finite, non-positive and ``< floor`` errors are excluded and
    listed in ``excluded`` by index, as is the coarsest level when
    ``drop_coarsest``. Raises :class:`EstimationError` with fewer than three
    usable points.
    """
    levels = np.asarray(levels, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if levels.shape != errors.shape or levels.ndim != 1:
        raise ContractError("levels and errors must be 1-d arrays of equal length")
    if np.any(~(levels > 0)):
        raise ContractError("levels must be positive")
    keep = np.isfinite(errors) & (errors > 0) & (errors >= floor)
    if drop_coarsest and levels.size:
        keep[int(np.argmax(levels))] = False
    idx = np.flatnonzero(keep)
    excluded = tuple(int(i) for i in np.flatnonzero(~keep))
    if idx.size < 3:
        raise EstimationError(f"only {idx.size} usable levels for a slope fit (need 3)")
    res = stats.linregress(np.log2(levels[idx]), np.log2(errors[idx]))
    window = (float(levels[idx].min()), float(levels[idx].max()))
    return OrderFit(float(res.slope), float(res.intercept), float(res.stderr), window, excluded)


def cn_diagonal_scale(dt: float, K: int) -> float:
    """``sqrt(dt) K / 2``, the size of the noise part of the top diagonal
    entry of the Crank-Nicolson matrices relative to one."""
    return math.sqrt(dt) * K / 2.0


# ---------------------------------------------------------------------------
# differences between discrete solutions


def _common_grid_diff(a, b, Lx_max, n_points, norm):
    x = np.linspace(-Lx_max, Lx_max, n_points)
    d = sample_state(a, x) - sample_state(b, x)
    l2 = float(np.trapezoid(np.abs(d) ** 2, x))
    if norm is ErrorNorm.L2:
        return l2
    dd = np.gradient(d, x)
    return float(np.trapezoid(np.abs(dd) ** 2 + x**2 * np.abs(d) ** 2, x))


def _norm_of(state, norm):
    l2, s1 = norms(state)
    return l2 if norm is ErrorNorm.L2 else s1


def difference_sq(a, b, norm: ErrorNorm = ErrorNorm.L2, Lx_max: float | None = None,
                  n_points: int = 2048) -> float:
    """Squared norm of ``a - b`` for two discrete states.

    Hermite coefficient vectors of any lengths are compared mode by mode.
    Two Dirichlet grids on the same domain with nested spacing are compared
    on the coarser grid; two periodic grids on the same domain are compared
    on the finer one after trigonometric interpolation. Anything else is
    sampled on a uniform grid of ``n_points`` over ``[-Lx_max, Lx_max]``
    and integrated with the trapezoid rule (``Lx_max`` defaults to the
    larger grid domain).
    """
    norm = ErrorNorm(norm)
    a_grid = isinstance(a, GridState)
    b_grid = isinstance(b, GridState)
    if not a_grid and not b_grid:
        a = np.asarray(a)
        b = np.asarray(b)
        n = max(a.size, b.size)
        d = np.pad(a, (0, n - a.size)) - np.pad(b, (0, n - b.size))
        return float(sigma_norm_sq(d, 0 if norm is ErrorNorm.L2 else 1))
    if a_grid and b_grid and a.boundary is b.boundary and a.Lx == b.Lx and Lx_max is None:
        if a.values.size > b.values.size:
            a, b = b, a
        na, nb = a.values.size, b.values.size
        if na == nb:
            return _norm_of(GridState(a.values - b.values, a.Lx, a.boundary), norm)
        if a.boundary is Boundary.DIRICHLET and (nb - 1) % (na - 1) == 0:
            step = (nb - 1) // (na - 1)
            d = a.values - b.values[::step]
            return _norm_of(GridState(d, a.Lx, Boundary.DIRICHLET), norm)
        if a.boundary is Boundary.PERIODIC:
            d = sample_state(a, b.x) - b.values
            return _norm_of(GridState(d, b.Lx, Boundary.PERIODIC), norm)
    if Lx_max is None:
        Lx_max = max(s.Lx for s in (a, b) if isinstance(s, GridState))
    return _common_grid_diff(a, b, Lx_max, n_points, norm)


# ---------------------------------------------------------------------------
# cells and per-sample work


class _Cell(NamedTuple):
    scheme: str
    K: int
    dof: int
    dt: float
    Lx: float | None
    alpha: float
    cfl_diag: float | None
    series: tuple
    level: float


def _grid_K(scheme: Scheme, K: int) -> int:
    # CN_FD with K/2 cells per half-domain has 2(K/2)+1 points, matching K modes
    return K // 2 if scheme is Scheme.CN_FD else K


def _dof(scheme: Scheme, K: int) -> int:
    return 2 * _grid_K(scheme, K) + 1 if scheme is Scheme.CN_FD else K


def _cells(cfg: StudyConfig) -> list:
    base = cfg.base
    cells = []
    if cfg.kind is StudyKind.SPACE_PATHWISE:
        for s in cfg.schemes:
            for Lx in (cfg.lx_values if s in GRID_SCHEMES else (None,)):
                for K in cfg.ladder[1:]:
                    cells.append(_Cell(s.value, K, _dof(s, K), base.dt, Lx, base.alpha, None,
                                       (s.value, Lx), 1.0 / K))
    elif cfg.kind is StudyKind.CROSS_SCHEME:
        for s in cfg.schemes:
            for Lx in (cfg.lx_values if s in GRID_SCHEMES else (None,)):
                for K in cfg.ladder:
                    cells.append(_Cell(s.value, K, _dof(s, K), base.dt, Lx, base.alpha, None,
                                       (s.value, Lx), 1.0 / K))
        Kref = max(cfg.ladder)
        cells.append(_Cell(_REFERENCE_PREFIX + cfg.reference_scheme.value, Kref, Kref, base.dt,
                           None, base.alpha, None, ("reference",), 1.0 / Kref))
    elif cfg.kind is StudyKind.TIME_MEANSQUARE:
        for s in cfg.schemes:
            for K in cfg.k_values:
                for a in cfg.alpha_values:
                    for N in cfg.ladder[1:]:
                        dt = base.T / N
                        cells.append(_Cell(s.value, K, K, dt, None, a, None, (s.value, K, a), dt))
    else:
        for N in cfg.n_steps_values:
            dt = base.T / N
            for K in cfg.ladder:
                cells.append(_Cell(_STABILITY_LABEL, K, K, dt, None, base.alpha,
                                   cn_diagonal_scale(dt, K), (N,), 1.0 / K))
    return cells


class _Failed:
    """Placeholder final state for a run that raised a step error."""

    def __init__(self, exc: StepError):
        self.flag = f"step_failure@{exc.step}"


def _final(scfg: SchemeConfig, path, initial: InitialDatum):
    try:
        return evolve(scfg, path, initial_state(scfg, initial), record=False).final
    except StepError as exc:
        return _Failed(exc)


def _diff(a, b, norm, **kw):
    for s in (a, b):
        if isinstance(s, _Failed):
            return math.nan, s.flag
    return difference_sq(a, b, norm, **kw), ""


def _check_coupling(paths):
    totals = [math.fsum(p.increments) for p in paths]
    scale = max(1.0, max(abs(t) for t in totals))
    if max(totals) - min(totals) > 1e-12 * scale:
        raise ContractError(f"coupled paths disagree on W(T): {totals}")


def _space_work(cfg: StudyConfig, sample: int):
    base = cfg.base
    path = generate_path(cfg.seed, base.T, base.dt, sample)
    out = []
    for s in cfg.schemes:
        for Lx in (cfg.lx_values if s in GRID_SCHEMES else (None,)):
            finals = []
            for K in cfg.ladder:
                scfg = base.with_(scheme=s, K=_grid_K(s, K), Lx=Lx if Lx is not None else base.Lx)
                finals.append(_final(scfg, path, cfg.initial))
            for a, b in zip(finals, finals[1:]):
                out.append(_diff(a, b, cfg.error_norm))
    return out


def _cross_work(cfg: StudyConfig, sample: int):
    base = cfg.base
    path = generate_path(cfg.seed, base.T, base.dt, sample)
    Kref = max(cfg.ladder)
    rcfg = base.with_(scheme=cfg.reference_scheme, K=Kref)
    ref = _final(rcfg, path, cfg.initial)
    Lx_max = max(cfg.lx_values)
    out = []
    for s in cfg.schemes:
        for Lx in (cfg.lx_values if s in GRID_SCHEMES else (None,)):
            for K in cfg.ladder:
                scfg = base.with_(scheme=s, K=_grid_K(s, K), Lx=Lx if Lx is not None else base.Lx)
                out.append(_diff(_final(scfg, path, cfg.initial), ref, cfg.error_norm,
                                 Lx_max=Lx_max, n_points=cfg.eval_points))
    # Richardson estimate of the reference's own time-discretization error
    ref2 = _final(rcfg.with_(dt=2 * base.dt), path, cfg.initial)
    out.append(_diff(ref2, ref, cfg.error_norm))
    return out


def _time_work(cfg: StudyConfig, sample: int):
    base = cfg.base
    finest = cfg.finest_steps
    path = generate_path(cfg.seed, base.T, base.T / finest, sample)
    paths = [coarsen(path, finest // N) for N in cfg.ladder]
    _check_coupling(paths)
    out = []
    for s in cfg.schemes:
        for K in cfg.k_values:
            for a in cfg.alpha_values:
                finals = []
                for N, p in zip(cfg.ladder, paths):
                    scfg = base.with_(scheme=s, K=K, alpha=a, dt=base.T / N)
                    finals.append(_final(scfg, p, cfg.initial))
                for u, v in zip(finals, finals[1:]):
                    out.append(_diff(u, v, cfg.error_norm))
    return out


def _stability_work(cfg: StudyConfig, sample: int):
    base = cfg.base
    finest = cfg.finest_steps
    path = generate_path(cfg.seed, base.T, base.T / finest, sample)
    out = []
    for N in cfg.n_steps_values:
        p = coarsen(path, finest // N)
        for K in cfg.ladder:
            scfg = base.with_(K=K, dt=base.T / N)
            cn = _final(scfg.with_(scheme=Scheme.CN_HERMITE), p, cfg.initial)
            sp = _final(scfg.with_(scheme=Scheme.SPLIT_HERMITE), p, cfg.initial)
            out.append(_diff(cn, sp, cfg.error_norm))
    return out


_WORK = {
    StudyKind.SPACE_PATHWISE: _space_work,
    StudyKind.CROSS_SCHEME: _cross_work,
    StudyKind.TIME_MEANSQUARE: _time_work,
    StudyKind.STABILITY_VS_K: _stability_work,
}


def _sample_work(cfg: StudyConfig, sample: int):
    return _WORK[cfg.kind](cfg, sample)


# ---------------------------------------------------------------------------
# reduction


def _row(cfg, cell, sample_id, error_sq, stderr, flag):
    return {
        "study_kind": cfg.kind.value,
        "scheme": cell.scheme,
        "K": cell.K,
        "dof": cell.dof,
        "dt": cell.dt,
        "Lx": cell.Lx,
        "alpha": cell.alpha,
        "sample_id": sample_id,
        "error_sq": error_sq,
        "stderr": stderr,
        "cfl_diag": cell.cfl_diag,
        "slope": None,
        "slope_stderr": None,
        "fit_window": None,
        "flag": flag,
    }


def _reduce(cfg: StudyConfig, cells, per_sample) -> tuple[list, dict]:
    rows = []
    mean_rows = {}
    for c, cell in enumerate(cells):
        vals = []
        flags = []
        for s, res in enumerate(per_sample):
            err, flag = res[c]
            rows.append(_row(cfg, cell, s, err, None, flag))
            if math.isfinite(err):
                vals.append(err)
            elif flag:
                flags.append(flag)
        n_ok = len(vals)
        if n_ok == 0:
            mean, se, flag = math.nan, math.nan, "skipped"
        else:
            v = np.asarray(vals)
            mean = float(np.mean(v))
            se = float(np.std(v, ddof=1) / math.sqrt(n_ok)) if n_ok > 1 else 0.0
            flag = "" if n_ok == len(per_sample) else f"partial:{n_ok}/{len(per_sample)}"
        row = _row(cfg, cell, "mean", mean, se, flag)
        rows.append(row)
        mean_rows[c] = row

    fits = {}
    if cfg.kind is StudyKind.STABILITY_VS_K:
        return rows, fits
    series = {}
    for c, cell in enumerate(cells):
        if cell.series != ("reference",):
            series.setdefault(cell.series, []).append(c)
    # levels at the fixed-point tolerance floor carry no discretization signal
    floor_sq = (1e3 * cfg.base.fp_tol) ** 2
    for key, idx in series.items():
        levels = [cells[c].level for c in idx]
        errs = [mean_rows[c]["error_sq"] for c in idx]
        try:
            fit = fit_order(levels, errs, drop_coarsest=True, floor=floor_sq)
        except EstimationError as exc:
            for c in idx:
                mean_rows[c]["flag"] = _join(mean_rows[c]["flag"], "no_fit")
            fits[key] = str(exc)
            continue
        fits[key] = fit
        window = f"{fit.window[0]:.17g}..{fit.window[1]:.17g}"
        for j, c in enumerate(idx):
            r = mean_rows[c]
            r["slope"] = fit.slope
            r["slope_stderr"] = fit.stderr
            r["fit_window"] = window
            if j in fit.excluded:
                r["flag"] = _join(r["flag"], "excluded_from_fit")
    return rows, fits


def _join(a, b):
    return f"{a};{b}" if a else b


def run_study(cfg: StudyConfig, jobs: int = 1) -> StudyResult:
    """Run every sample of ``cfg`` (in ``jobs`` processes) and reduce in order."""
    cells = _cells(cfg)
    work = partial(_sample_work, cfg)
    if jobs > 1 and cfg.n_samples > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, cfg.n_samples)) as pool:
            per_sample = list(pool.map(work, range(cfg.n_samples)))
    else:
        per_sample = [work(s) for s in range(cfg.n_samples)]
    rows, fits = _reduce(cfg, cells, per_sample)
    meta = {"error_norm": cfg.error_norm.value}
    if cfg.kind is StudyKind.TIME_MEANSQUARE:
        meta["pair_index"] = "each successive-dt pair is reported at the finer dt"
        meta["slope_basis"] = "log2(error_sq) vs log2(dt)"
    elif cfg.kind in (StudyKind.SPACE_PATHWISE,):
        meta["pair_index"] = "each successive-K pair is reported at the larger K"
        meta["slope_basis"] = "log2(error_sq) vs log2(1/K)"
    elif cfg.kind is StudyKind.CROSS_SCHEME:
        meta["reference"] = f"{cfg.reference_scheme.value} K={max(cfg.ladder)}"
        meta["reference_error"] = "REFERENCE row: squared difference between reference runs at dt and 2 dt"
        meta["slope_basis"] = "log2(error_sq) vs log2(1/K)"
    else:
        meta["cfl_diag"] = "sqrt(dt) K / 2"
    provenance = {
        "seed": cfg.seed,
        "config_hash": config_hash(study_config_to_dict(cfg)),
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    return StudyResult(cfg, rows, fits, provenance, meta)


def _runner(kind: StudyKind):
    def run(cfg: StudyConfig, jobs: int = 1) -> StudyResult:
        if cfg.kind is not kind:
            raise ContractError(f"expected a {kind.value} study, got {cfg.kind.value}")
        return run_study(cfg, jobs)
    run.__name__ = f"run_{kind.value.lower()}"
    run.__doc__ = f"Run a ``{kind.value}`` study (see :func:`run_study`)."
    return run


run_space_pathwise = _runner(StudyKind.SPACE_PATHWISE)
run_cross_scheme = _runner(StudyKind.CROSS_SCHEME)
run_time_meansquare = _runner(StudyKind.TIME_MEANSQUARE)
run_stability_vs_K = _runner(StudyKind.STABILITY_VS_K)


# ---------------------------------------------------------------------------
# increment truncation frequency


@dataclass
class TruncationReport:
    """Empirical frequency of ``tau < N + 1`` against the calibrated envelope
    ``c N exp(-C0^2 N / (2 T^2))``."""

    C0: float
    T: float
    N_list: tuple
    n_paths: int
    counts: np.ndarray
    frequency: np.ndarray
    envelope: np.ndarray
    c: float

    @property
    def within_envelope(self) -> bool:
        return bool(np.all(self.frequency <= self.envelope * (1 + 1e-12)))

    @property
    def non_increasing(self) -> bool:
        return bool(np.all(np.diff(self.frequency) <= 0))


def truncation_frequency(C0: float, T: float, N_list, n_paths: int, seed: int = 0) -> TruncationReport:
    """Monte Carlo frequency of the increment stopping time firing.

    Path ``p`` uses the normal stream keyed by ``(seed, p)``; for a given
    ``N`` the increments are ``sqrt(T/N)`` times its first ``N`` normals.
    The envelope constant is calibrated on the smallest ``N``, using one
    event in ``n_paths`` when none was observed there.
    """
    N_list = tuple(sorted(int(n) for n in N_list))
    if not N_list or N_list[0] < 1 or n_paths < 1 or not C0 > 0 or not T > 0:
        raise ConfigurationError("truncation_frequency needs C0, T > 0, positive N and n_paths")
    Nmax = N_list[-1]
    # running max of |z| over prefixes, one row per path
    zmax = np.empty((n_paths, len(N_list)))
    for p in range(n_paths):
        z = np.abs(standard_normals(seed, p, Nmax))
        run = np.maximum.accumulate(z)
        zmax[p] = run[np.asarray(N_list) - 1]
    thresholds = C0 / np.sqrt(T / np.asarray(N_list, dtype=float))
    counts = (zmax >= thresholds).sum(axis=0)
    freq = counts / n_paths
    N = np.asarray(N_list, dtype=float)
    shape = N * np.exp(-(C0**2) * N / (2 * T**2))
    c = max(freq[0], 1.0 / n_paths) / shape[0]
    return TruncationReport(C0, T, N_list, n_paths, counts, freq, c * shape, float(c))


# ---------------------------------------------------------------------------
# presets


PRESET_NAMES = ("fig1", "fig2", "fig3", "fig4")


def preset(name: str, scale: str = "desk") -> StudyConfig:
    """Study configurations for the four standard experiments.

    ``scale="desk"`` gives runs that finish in minutes; ``scale="full"``
    gives the long-horizon, large-ensemble versions.
    """
    if name not in PRESET_NAMES:
        raise ConfigurationError(f"unknown preset {name!r}; choose from {', '.join(PRESET_NAMES)}")
    if scale not in ("desk", "full"):
        raise ConfigurationError(f"preset scale must be 'desk' or 'full', got {scale!r}")
    full = scale == "full"
    if name in ("fig1", "fig2"):
        T, dt = (10.0, 10 * 2.0**-20) if full else (1.0, 2.0**-12)
        ladder = (16, 32, 64, 128, 256) if full else (16, 32, 64, 128)
        base = SchemeConfig(scheme=Scheme.CN_HERMITE, K=ladder[-1], lam=1.0, alpha=0.3, dt=dt, T=T, Lx=10.0)
        if name == "fig1":
            return StudyConfig(StudyKind.SPACE_PATHWISE, base, ladder, n_samples=1, seed=2024,
                               schemes=tuple(Scheme), lx_values=(10.0,))
        return StudyConfig(StudyKind.CROSS_SCHEME, base, ladder, n_samples=1, seed=2024,
                           schemes=(Scheme.SPLIT_FOURIER,), lx_values=(3.0, 5.0, 10.0),
                           reference_scheme=Scheme.SPLIT_HERMITE)
    if name == "fig3":
        if full:
            base = SchemeConfig(scheme=Scheme.CN_HERMITE, K=40, lam=1.0, alpha=0.2, dt=4 * 2.0**-12, T=4.0)
            return StudyConfig(StudyKind.TIME_MEANSQUARE, base, tuple(2**e for e in range(6, 13)),
                               n_samples=100, seed=11,
                               schemes=(Scheme.CN_HERMITE, Scheme.SPLIT_HERMITE),
                               k_values=(40, 80, 120, 160, 200), alpha_values=(0.2, 0.4, 0.6, 1.0))
        base = SchemeConfig(scheme=Scheme.CN_HERMITE, K=40, lam=1.0, alpha=0.2, dt=2.0**-10, T=1.0)
        return StudyConfig(StudyKind.TIME_MEANSQUARE, base, tuple(2**e for e in range(5, 11)),
                           n_samples=32, seed=11,
                           schemes=(Scheme.CN_HERMITE, Scheme.SPLIT_HERMITE), k_values=(40, 80))
    if full:
        base = SchemeConfig(scheme=Scheme.CN_HERMITE, K=200, lam=1.0, alpha=1.0, dt=5 * 2.0**-18, T=5.0)
        return StudyConfig(StudyKind.STABILITY_VS_K, base, (40, 80, 120, 160, 200), n_samples=100,
                           error_norm=ErrorNorm.SIGMA1, seed=5, n_steps_values=(2**14, 2**16, 2**18))
    base = SchemeConfig(scheme=Scheme.CN_HERMITE, K=80, lam=1.0, alpha=1.0, dt=2.0**-10, T=1.0)
    return StudyConfig(StudyKind.STABILITY_VS_K, base, (40, 80, 120), n_samples=16,
                       error_norm=ErrorNorm.SIGMA1, seed=5, n_steps_values=(2**8, 2**10, 2**12))
