"""When do deterministic chaotic returns act independent?

The drift d(t) of the log price is compared with the random-walk reference
v_inf sqrt(t): trend-dominated parameters drift faster (positive distance
to independence I), contrarian-dominated ones slower (negative I), and the
zero crossing sits near the linear locus a1 = 14.28 w.
"""

import os

import numpy as np

from chaos_market import (
    EnsembleConfig,
    ModelParams,
    ShockSpec,
    autocorrelation,
    distance_to_independence,
    drift_curve,
    independence_locus,
    returns,
    run_ensemble,
    simulate,
    v_infinity_formula,
)
from chaos_market.io import write_csv

OUT = os.path.join(os.path.dirname(__file__), "output", "05_return_independence")

W = 0.01
N1, N2 = 30, 45


def drift_for(a1):
    cfg = EnsembleConfig(params=ModelParams(m=1, n=5, w=W, a1=a1),
                         p_star=10.0, v0=1e-4, runs=600, horizon=50, seed=42)
    return drift_curve(run_ensemble(cfg))


print("=== drift vs the random-walk reference ===")
for a1 in (0.12, 0.14, 0.18):
    d = drift_for(a1)
    v_inf = v_infinity_formula(a1, W)
    I = distance_to_independence(d, v_inf, N1, N2)
    verdict = ("faster than v_inf sqrt(t): positively dependent" if I > 0.005 else
               "slower than v_inf sqrt(t): negatively dependent" if I < -0.005 else
               "close to v_inf sqrt(t): effectively independent")
    print(f"a1={a1}: I = {I:+.4f}  ({verdict})")
    t = np.arange(1, 51)
    write_csv(os.path.join(OUT, f"drift_a1_{a1:g}.csv"),
              ["t", "d", "reference"],
              list(zip(t.tolist(), d.tolist(), (v_inf * np.sqrt(t)).tolist())))

print("\n=== sweep of I over a1 ===")
rows = []
for a1 in np.round(np.arange(0.11, 0.2001, 0.005), 4):
    I = distance_to_independence(drift_for(float(a1)),
                                 v_infinity_formula(float(a1), W), N1, N2)
    rows.append((float(a1), I))
write_csv(os.path.join(OUT, "independence_vs_a1.csv"), ["a1", "I"], rows)
crossing = None
for (a_lo, i_lo), (a_hi, i_hi) in zip(rows[:-1], rows[1:]):
    if (i_lo > 0) != (i_hi > 0):
        crossing = a_lo + i_lo / (i_lo - i_hi) * (a_hi - a_lo)
        break
print(f"measured zero crossing: a1 = {crossing:.4f}")
print(f"linear locus predicts : a1 = {independence_locus(W):.4f}")

print("\n=== return autocorrelations along single trajectories ===")
for a1 in (0.1, 0.14, 0.34):
    traj = simulate(ModelParams(m=1, n=5, w=W, a1=a1),
                    ShockSpec(p_star=10.0, r0=0.01), 100_000)
    acf = autocorrelation(returns(traj), 20, burn_in=1000)
    write_csv(os.path.join(OUT, f"autocorrelation_a1_{a1:g}.csv"),
              ["lag", "acf"], list(enumerate(acf.tolist(), start=1)))
    print(f"a1={a1}: acf(1..6) = {np.array2string(acf[:6], precision=3)}  "
          f"mean(1..20) = {float(np.mean(acf)):+.3f}")
print("weak strength keeps a persistent positive tail (trend dominance); "
      "stronger trading decorrelates the aggregate")
print("\nwrote CSVs under", OUT)
