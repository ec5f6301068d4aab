"""Mean-square convergence in time on coupled Brownian paths.

Each sample draws one fine path; coarser step sizes reuse its block sums, so
successive-dt differences measure discretization error rather than noise.
The slope of log2(mean squared difference) against log2(dt) is twice the
strong order.
"""
from sgpe import Scheme, SchemeConfig, StudyConfig, StudyKind, run_study

base = SchemeConfig(K=24, lam=1.0, alpha=0.3, T=0.5, dt=0.5 / 256)
cfg = StudyConfig(StudyKind.TIME_MEANSQUARE, base, ladder=(16, 32, 64, 128, 256), n_samples=8,
                  seed=3, schemes=(Scheme.CN_HERMITE, Scheme.SPLIT_HERMITE))
res = run_study(cfg)
for scheme in cfg.schemes:
    rows = res.mean_rows(scheme=scheme.value)
    print(scheme.value)
    for r in rows:
        print(f"  dt={r['dt']:.2e}  E|u_dt - u_2dt|^2 = {r['error_sq']:.3e} +- {r['stderr']:.1e}  {r['flag']}")
    print(f"  slope {rows[-1]['slope']:.2f} (strong order about {rows[-1]['slope'] / 2:.2f})")
