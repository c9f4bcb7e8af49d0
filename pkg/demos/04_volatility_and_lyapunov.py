"""Short-term predictability: volatility growth at the Lyapunov rate.

Seeded ensembles differing only in a tiny Gaussian initial shock separate
exponentially; the ensemble volatility v(t) climbs from the shock scale to
a converged level v_inf that depends only on the parameters.  The slope of
ln v(t) is the Lyapunov exponent and matches the closed-form candidate L2.
"""

import os
import warnings

import numpy as np

from chaos_market import (
    ConvergenceWarning,
    EnsembleConfig,
    ModelParams,
    analytic_lyapunov,
    converged_volatility,
    empirical_lyapunov,
    lyapunov_candidates,
    random_walk_ensemble,
    run_ensemble,
    v_infinity_formula,
    volatility_curve,
)
from chaos_market.io import write_csv

OUT = os.path.join(os.path.dirname(__file__), "output", "04_volatility_and_lyapunov")

PARAMS = ModelParams(m=1, n=5, w=0.01, a1=0.17)


def curve_for(v0, runs=600):
    cfg = EnsembleConfig(params=PARAMS, p_star=10.0, v0=v0,
                         runs=runs, horizon=100, seed=42)
    return volatility_curve(run_ensemble(cfg))


print("=== v(t) from three shock scales, a1 = 0.17 ===")
curves = {}
for v0 in (1e-5, 1e-4, 1e-3):
    curve = curves[v0] = curve_for(v0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        v_inf = converged_volatility(curve)
    print(f"v0={v0:g}: v(1)={curve.values[0]:.2e} -> v_inf={v_inf:.4f}")
    write_csv(os.path.join(OUT, f"volatility_v0_{v0:g}.csv"), ["t", "v"],
              list(zip(curve.t.tolist(), curve.values.tolist())))
print("fitted law value:", round(v_infinity_formula(0.17, 0.01), 5))

rw = volatility_curve(random_walk_ensemble(0.03, 1e-5, 10.0, 600, 100, seed=42))
print("random-walk reference: flat at",
      round(float(np.median(rw.values)), 4), "from the first step")

print("\n=== Lyapunov exponent from the growth of ln v(t) ===")
slow = curve_for(1e-6)
with warnings.catch_warnings():
    warnings.simplefilter("ignore", ConvergenceWarning)
    v_inf = converged_volatility(slow)
fit = empirical_lyapunov(slow, v_inf)
cand = lyapunov_candidates(PARAMS)
print(f"empirical slope {fit.exponent:.4f} over t in {fit.window}, r^2 = {fit.fit_quality:.4f}")
print(f"analytic candidates: L1={cand.L1:.4f}  L2={cand.L2:.4f}  L3={cand.L3:.4f}")

print("\n=== faster settling for stronger traders ===")
rows = []
for a1 in (0.12, 0.17, 0.22, 0.27, 0.32):
    params = ModelParams(m=1, n=5, w=0.01, a1=a1)
    cfg = EnsembleConfig(params=params, p_star=10.0, v0=1e-6,
                         runs=300, horizon=100, seed=7)
    curve = volatility_curve(run_ensemble(cfg))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        v_inf = converged_volatility(curve)
    fit = empirical_lyapunov(curve, v_inf)
    rows.append((a1, fit.exponent, analytic_lyapunov(params), v_inf))
    print(f"a1={a1}: empirical {fit.exponent:.4f}  analytic {analytic_lyapunov(params):.4f}  "
          f"v_inf {v_inf:.4f}")
write_csv(os.path.join(OUT, "lyapunov_vs_a1.csv"),
          ["a1", "empirical", "analytic_L2", "v_inf"], rows)
print("wrote", os.path.join(OUT, "lyapunov_vs_a1.csv"))

try:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7, 4.5))
    for v0, curve in curves.items():
        ax.semilogy(curve.t, curve.values, label=f"v0={v0:g}")
    ax.semilogy(rw.t, rw.values, "k--", label="random walk")
    ax.set_xlabel("t")
    ax.set_ylabel("v(t)")
    ax.legend()
    ax.set_title("volatility growth at the Lyapunov rate")
    fig.tight_layout()
    fig.savefig(os.path.join(OUT, "volatility_growth.png"), dpi=150)
    print("wrote", os.path.join(OUT, "volatility_growth.png"))
except ImportError:
    print("matplotlib not available; skipped the plot")
