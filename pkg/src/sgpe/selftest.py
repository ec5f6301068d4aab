"""Quick invariant batteries, run by ``sgpe selftest``.

Each battery returns ``(passed, detail)``. ``faults`` names deliberate
corruptions used to check that a battery can fail; the only one defined is
``"flip_weight"``, which negates one quadrature weight before the
orthonormality check.
"""
from __future__ import annotations

import time

import numpy as np

from .experiments import truncation_frequency
from .hermite import build_basis, forward_transform, inverse_transform
from .operators import check_assumptions
from .schemes import Scheme, SchemeConfig, evolve, initial_state
from .stochastic import generate_path

__all__ = ["BATTERIES", "FAULTS", "run_batteries"]

FAULTS = ("flip_weight",)


def orthonormality(faults=()):
    worst = 0.0
    for K in (8, 64, 256):
        basis = build_basis(K)
        w = np.array(basis.weights)
        if "flip_weight" in faults:
            w[K // 3] = -w[K // 3]
        E = basis.functions
        gram = (E * w) @ E.T
        worst = max(worst, float(np.max(np.abs(gram - np.eye(K)))))
    return worst < 1e-10, f"max Gram error {worst:.2e}"


def round_trip(faults=()):
    rng = np.random.default_rng(1)
    worst = 0.0
    for K in (8, 64, 256):
        basis = build_basis(K)
        c = rng.standard_normal(K) + 1j * rng.standard_normal(K)
        back = forward_transform(basis, inverse_transform(basis, c))
        worst = max(worst, float(np.max(np.abs(back - c))))
    return worst < 1e-10, f"max coefficient error {worst:.2e}"


def conservation(faults=()):
    path = generate_path(3, 0.25, 2.0**-6)
    worst = {}
    for scheme, Lx, tol in ((Scheme.CN_HERMITE, None, None),
                            (Scheme.SPLIT_HERMITE, None, 1e-11),
                            (Scheme.SPLIT_FOURIER, 10.0, 1e-11)):
        cfg = SchemeConfig(scheme=scheme, K=32, lam=1.0, alpha=0.4, dt=2.0**-6, T=0.25, Lx=Lx)
        tr = evolve(cfg, path, initial_state(cfg, lambda x: np.pi**-0.25 * np.exp(-((x - 1) ** 2) / 2)))
        drift = float(np.max(np.abs(np.diff(tr.l2_norm_sq))))
        worst[scheme.value] = (drift, tol if tol is not None else 100 * cfg.fp_tol)
    ok = all(d <= tol for d, tol in worst.values())
    return ok, ", ".join(f"{k} {d:.1e}" for k, (d, _) in worst.items())


def assumptions(faults=()):
    rep = check_assumptions([16, 32, 64, 128])
    bad = [k for k, v in rep.flags.items() if v]
    return rep.ok, "all properties within allowed growth" if not bad else "violations: " + ", ".join(bad)


def envelope(faults=()):
    rep = truncation_frequency(1.0, 1.0, (16, 64, 256), 2000, seed=0)
    ok = rep.within_envelope and rep.non_increasing
    return ok, "frequencies " + ", ".join(f"{f:.1e}" for f in rep.frequency)


BATTERIES = {
    "orthonormality": orthonormality,
    "round_trip": round_trip,
    "conservation": conservation,
    "assumptions": assumptions,
    "envelope": envelope,
}


def run_batteries(faults=()):
    """Run every battery; returns ``[(name, passed, detail, seconds)]``."""
    out = []
    for name, fn in BATTERIES.items():
        t0 = time.perf_counter()
        try:
            ok, detail = fn(faults)
        except Exception as exc:  # a crashing battery is a failing battery
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append((name, bool(ok), detail, time.perf_counter() - t0))
    return out
