"""Price regimes as trader strength a1 grows.

Three hallmark behaviors from the same one-percent shock: slow convergence
to a new equilibrium at a1 = 0.049, bounded chaos at 0.26, and a two-point
oscillation at 0.39.  Near the edge of the convergent range the limit is
wildly sensitive: a 0.2% change of a1 (0.0497 -> 0.0498) moves the settled
price from about 41 to about 72.
"""

import math
import os

import numpy as np

from chaos_market import (
    ModelParams,
    ShockSpec,
    classify_regime,
    returns,
    simulate,
    sweep_regimes,
    trajectory_to_csv,
)

OUT = os.path.join(os.path.dirname(__file__), "output", "02_regime_gallery")
os.makedirs(OUT, exist_ok=True)

BASE = dict(m=1, n=5, w=0.01)
SHOCK = ShockSpec(p_star=10.0, r0=0.01)

print("=== three regimes, (m,n)=(1,5), w=0.01, 1% shock on p*=10 ===")
for a1 in (0.049, 0.26, 0.39):
    traj = simulate(ModelParams(a1=a1, **BASE), SHOCK, 5000)
    label = classify_regime(traj)
    tail = returns(traj)[-5:]
    print(f"a1={a1}: {label:12s} final price {traj.prices[-1]:8.3f}  "
          f"last returns {np.array2string(tail, precision=4)}")
    trajectory_to_csv(traj, os.path.join(OUT, f"trajectory_a1_{a1:g}.csv"))

print("\n=== sensitivity at the convergent edge (1% price jump) ===")
edge_shock = ShockSpec(p_star=10.0, r0=math.log(1.01))
for a1 in (0.049, 0.0495, 0.0496, 0.0497, 0.0498):
    traj = simulate(ModelParams(a1=a1, **BASE), edge_shock, 12000)
    print(f"a1={a1}: settles at {traj.prices[-1]:8.3f}")

print("\n=== zone map over a1 ===")
sweep = sweep_regimes(np.round(np.arange(0.005, 0.4501, 0.01), 4),
                      ModelParams(a1=0.1, **BASE), SHOCK)
for zone in sweep.zones:
    print(f"  {zone.label:12s} a1 in [{zone.a1_low:.3f}, {zone.a1_high:.3f}]")

try:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, axes = plt.subplots(3, 1, figsize=(7, 8), sharex=False)
    for ax, a1 in zip(axes, (0.049, 0.26, 0.39)):
        traj = simulate(ModelParams(a1=a1, **BASE), SHOCK, 600)
        ax.plot(traj.prices, lw=0.8)
        ax.set_ylabel(f"a1={a1}")
    axes[-1].set_xlabel("t")
    fig.suptitle("price trajectories: convergent / chaotic / oscillating")
    fig.tight_layout()
    fig.savefig(os.path.join(OUT, "regimes.png"), dpi=150)
    print("\nwrote", os.path.join(OUT, "regimes.png"))
except ImportError:
    print("\nmatplotlib not available; skipped the plot")
