"""Shape of the piecewise-linear excess-demand rule.

The rule maps the moving-average log-ratio x to a bounded demand signal:
trend-following (same sign as x) inside |x| < (8/3) w, contrarian between
(8/3) w and 3w, saturated at -/+ 0.2 beyond 3w.  Scaled by the strength a1
it is the one-step log-return of the price map.
"""

import os

import numpy as np

from chaos_market import DemandShape, ed1, excess_demand, origin_slope, zone_of
from chaos_market.io import write_csv

OUT = os.path.join(os.path.dirname(__file__), "output", "01_demand_curve")

W = 0.01
A1 = 0.17

shape = DemandShape(w=W, a1=A1)
xs = np.linspace(-4 * W, 4 * W, 801)
values = ed1(xs, W)
scaled = excess_demand(xs, shape)

print("demand rule with w =", W, "and strength a1 =", A1)
print("breakpoints:", shape.breakpoints)
print("slope at the origin: 0.1/w =", origin_slope(W))
print("peak +/-0.4 at x = +/-2w:", ed1(2 * W, W), ed1(-2 * W, W))
print("saturation -/+0.2 beyond |x| = 3w:", ed1(5 * W, W), ed1(-5 * W, W))
print("sign change at |x| = (8/3) w =", 8 / 3 * W)
print()

for x in [0.0, 0.5 * W, W, 2 * W, 2.5 * W, 8 / 3 * W, 3 * W, 4 * W]:
    print(f"  x = {x:+.5f}: ed1 = {ed1(x, W):+.4f}  zone = {zone_of(x, W)}")

write_csv(os.path.join(OUT, "demand_curve.csv"),
          ["x", "ed1", "a1_ed1", "zone"],
          [(float(x), float(v), float(s), zone_of(float(x), W))
           for x, v, s in zip(xs, values, scaled)])
print("\nwrote", os.path.join(OUT, "demand_curve.csv"))

try:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(xs, scaled, lw=2)
    ax.axhline(0, color="k", lw=0.5)
    for bp in shape.breakpoints:
        ax.axvline(bp, color="gray", lw=0.5, ls=":")
    ax.set_xlabel("moving-average log-ratio x")
    ax.set_ylabel("excess demand a1 ed1(x)")
    ax.set_title(f"excess demand, w={W}, a1={A1}")
    fig.tight_layout()
    fig.savefig(os.path.join(OUT, "demand_curve.png"), dpi=150)
    print("wrote", os.path.join(OUT, "demand_curve.png"))
except ImportError:
    print("matplotlib not available; skipped the plot")
