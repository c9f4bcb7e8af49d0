"""Every constant price is an equilibrium; strong coupling makes them unstable.

A constant window is an exact fixed point of the map for any positive price.
The Jacobian there is a companion matrix; its spectrum always contains the
neutral eigenvalue 1 along the equilibrium family, and a real eigenvalue
leaves the unit circle once 0.1 a1 (n-1) / w > 2.  The finite-difference
bottom row settles the printed-formula ambiguity: the gain does not scale
with the equilibrium price.
"""

import os

import numpy as np

from chaos_market import (
    ModelParams,
    PriceState,
    bottom_right_gain_chain_rule,
    bottom_right_gain_price_scaled,
    finite_difference_matrix,
    instability_certificate,
    is_equilibrium,
    jacobian_fd,
    linear_model_limit,
    linear_model_simulate,
    set_stability_probe,
)
from chaos_market.io import write_csv

OUT = os.path.join(os.path.dirname(__file__), "output", "03_unstable_equilibria")

PARAMS = ModelParams(m=1, n=5, w=0.01, a1=0.17)

print("=== fixed points ===")
for p_star in (1.0, 10.0, 100.0):
    state = PriceState.from_prices([p_star] * 5)
    print(f"constant window at {p_star:6.1f}: exact fixed point ->",
          is_equilibrium(state, PARAMS, tol=0.0))

print("\n=== linearization at p* = 10, a1 = 0.17 ===")
lin = jacobian_fd(PARAMS, 10.0)
print("eigenvalue moduli:", np.round(np.abs(lin.eigenvalues), 4))
print("max modulus:", round(lin.max_modulus, 4), "-> unstable:",
      instability_certificate(PARAMS, 10.0).unstable)

print("\nbottom-right gain, three ways (p* = 10):")
print("  finite difference :", finite_difference_matrix(PARAMS, 10.0)[-1, -1])
print("  chain rule        :", bottom_right_gain_chain_rule(PARAMS))
print("  price-scaled form :", bottom_right_gain_price_scaled(PARAMS, 10.0),
      " <- disagrees; the derivative does not carry p*")

print("\n=== instability across strengths (p* = 10) ===")
rows = []
for a1 in np.round(np.arange(0.01, 0.41, 0.01), 3):
    cert = instability_certificate(ModelParams(m=1, n=5, w=0.01, a1=float(a1)), 10.0)
    rows.append((float(a1), cert.max_modulus, cert.unstable))
write_csv(os.path.join(OUT, "instability_vs_a1.csv"),
          ["a1", "max_modulus", "unstable"], rows)
threshold = 20 * 0.01 / (5 - 1)
print(f"threshold 20 w / (n-1) = {threshold}; verdicts flip there:")
for a1, modulus, unstable in rows:
    if abs(a1 - threshold) <= 0.02:
        print(f"  a1={a1}: max modulus {modulus:.6f}  unstable={unstable}")
print("wrote", os.path.join(OUT, "instability_vs_a1.csv"))

print("\n=== yet the weakly-coupled market is set-stable ===")
for a1 in (0.049, 0.26):
    print(f"a1={a1}: converges to some new equilibrium after small shocks ->",
          set_stability_probe(ModelParams(m=1, n=5, w=0.01, a1=a1), 10.0))

print("\n=== the two-lag linear model tells the same story ===")
for a in (-0.9, -0.5, 0.0, 0.5, 0.9):
    traj = linear_model_simulate(a, 10.0, 0.01, 2000)
    limit = linear_model_limit(a, 10.0, 0.01)
    print(f"a={a:+.1f}: simulated {traj.prices[-1]:.6f}  closed form {limit:.6f}")
print("each limit differs from the old equilibrium: stable as a set, "
      "never asymptotically stable pointwise")
