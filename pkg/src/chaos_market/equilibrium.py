"""Equilibria of the price map: fixed points, linearization, set-stability.

Every constant window (p*, ..., p*) is a fixed point.  The Jacobian there is
a companion matrix whose first n-1 rows are coordinate shifts; only the last
row carries derivatives of the price-update component.  Eigenvalues of that
matrix decide linear (in)stability, and a direct simulation probe decides
set-stability (convergence to *some* equilibrium after small shocks).
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .demand import CENTER_SLOPE, ed1
from .engine import (
    LN_DIVERGENCE_BOUND,
    ShockSpec,
    Trajectory,
    _simulate_rows,
    step,
)

# Default central-difference offset: a power-of-two fraction of p_star, so
# p_star +/- h are exactly representable and the difference is exactly 2h.
_H_FRACTION = 2.0 ** -20

DEFAULT_SET_STABILITY_SHOCKS = (-0.01, -0.005, -0.001, 0.001, 0.005, 0.01)


@dataclass(frozen=True)
class Linearization:
    """Jacobian of the price map at a constant-price equilibrium.

    ``jacobian`` rows 1..n-1 are the exact coordinate-shift rows (single 1 on
    the superdiagonal); the bottom row holds the finite-difference partials
    of the price-update component.
    """

    jacobian: np.ndarray
    eigenvalues: np.ndarray
    max_modulus: float


class InstabilityCertificate(NamedTuple):
    unstable: bool
    max_modulus: float


def is_equilibrium(state, params, tol=0.0):
    """True iff one step of the map moves every window coordinate by <= tol."""
    advanced = step(state, params)
    return bool(np.all(np.abs(advanced.window - state.window) <= tol))


def _map_full(y, params):
    """The order-n map F in price coordinates: shift plus price update."""
    lw = np.log(y)
    shift = lw.max()
    scaled = np.exp(lw - shift)
    x = math.log(scaled[-params.m :].sum() / params.m) - math.log(scaled.sum() / params.n)
    out = np.empty_like(y)
    out[:-1] = y[1:]
    out[-1] = y[-1] * math.exp(params.a1 * ed1(x, params.w))
    return out


def finite_difference_matrix(params, p_star, h=None):
    """Full n x n central-difference Jacobian of the map at (p*, ..., p*)."""
    if not (np.isfinite(p_star) and p_star > 0):
        raise ValueError(f"p_star must be a positive finite real, got {p_star}")
    if h is None:
        h = p_star * _H_FRACTION
    h = float(h)
    if not (0.0 < h < p_star):
        raise ValueError(f"finite-difference offset h must lie in (0, p_star), got {h}")
    n = params.n
    y0 = np.full(n, float(p_star))
    jac = np.empty((n, n))
    for j in range(n):
        up = y0.copy()
        dn = y0.copy()
        up[j] += h
        dn[j] -= h
        jac[:, j] = (_map_full(up, params) - _map_full(dn, params)) / (up[j] - dn[j])
    return jac

# Sanity bound on how far the finite-difference shift rows may sit from the
# exact 0/1 pattern before we refuse to snap them.
_SHIFT_ROW_TOL = 1e-9


def jacobian_fd(params, p_star, h=None):
    """Linearization at the constant-p_star equilibrium.

    The shift rows of the central-difference matrix are verified against the
    exact 0/1 pattern and replaced by it (the first n-1 map components are
    literally coordinate shifts); the bottom row keeps the finite-difference
    values.
    """
    jac = finite_difference_matrix(params, p_star, h=h)
    n = params.n
    exact = np.zeros((n - 1, n))
    exact[np.arange(n - 1), np.arange(1, n)] = 1.0
    if not np.all(np.abs(jac[:-1] - exact) < _SHIFT_ROW_TOL):
        raise ValueError("finite-difference shift rows deviate from the exact pattern")
    jac[:-1] = exact
    eigenvalues = np.linalg.eigvals(jac)
    return Linearization(
        jacobian=jac,
        eigenvalues=eigenvalues,
        max_modulus=float(np.abs(eigenvalues).max()),
    )


def bottom_row_chain_rule(params):
    """Analytic bottom row of the Jacobian at any constant equilibrium.

    Derivative of y_n * exp(a1 * ed1(x)) at x = 0; the equilibrium price
    cancels, so the row depends only on (m, n, w, a1).
    """
    c = params.a1 * CENTER_SLOPE / params.w
    row = np.full(params.n, -c / params.n)
    row[params.n - params.m :] += c / params.m
    row[-1] += 1.0
    return row


def bottom_right_gain_chain_rule(params):
    """d f / d y_n at equilibrium: 1 + a1 (0.1/w) (1/m - 1/n)."""
    return 1.0 + params.a1 * (CENTER_SLOPE / params.w) * (1.0 / params.m - 1.0 / params.n)


def bottom_right_gain_price_scaled(params, p_star):
    """Variant of the bottom-right gain with an extra equilibrium-price factor.

    Kept only for the comparison report: it disagrees with the
    finite-difference derivative whenever p_star != 1.
    """
    return 1.0 + params.a1 * p_star * (CENTER_SLOPE / params.w) * (1.0 / params.m - 1.0 / params.n)


# The equilibrium family direction always contributes an eigenvalue of exactly
# 1; its finite-difference image lands within ~1e-9 of the unit circle, so the
# verdict requires a margin safely above that noise.
NEUTRAL_EIGENVALUE_MARGIN = 1e-8


def instability_certificate(params, p_star):
    """Eigenvalue test of the finite-difference Jacobian at the equilibrium.

    Returns (unstable, max_modulus) with unstable = (max modulus > 1), where
    "> 1" carries the small numeric margin that keeps the neutral
    equilibrium-family eigenvalue from flipping the verdict.
    """
    lin = jacobian_fd(params, p_star)
    return InstabilityCertificate(
        unstable=bool(lin.max_modulus > 1.0 + NEUTRAL_EIGENVALUE_MARGIN),
        max_modulus=lin.max_modulus,
    )


def certificate_record(params, p_star):
    """JSON-ready record {params, max_modulus, unstable} for one grid point."""
    cert = instability_certificate(params, p_star)
    return {
        "params": {"m": params.m, "n": params.n, "w": params.w, "a1": params.a1},
        "p_star": p_star,
        "max_modulus": cert.max_modulus,
        "unstable": cert.unstable,
    }


def linear_model_simulate(a, p_star, r0, horizon):
    """Iterate the two-lag linear return model ln p_{t+1} = ln p_t + a (ln p_t - ln p_{t-1}).

    Starts from (p_star, p_star * e^{r0}); the divergence guard of the price
    engine applies, so runs with |a| >= 1 end flagged divergent once they
    leave the price band.
    """
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    shock = ShockSpec(p_star=p_star, r0=r0)
    lps = math.log(p_star)
    log_prices = [lps + r0]
    prev, cur = lps, lps + r0
    diverged_at = None
    for t in range(1, horizon + 1):
        prev, cur = cur, cur + a * (cur - prev)
        log_prices.append(cur)
        if abs(cur - lps) > LN_DIVERGENCE_BOUND:
            diverged_at = t
            break
    direction = None
    if diverged_at is not None:
        direction = "up" if log_prices[-1] > lps else "down"
    return Trajectory(
        log_prices=np.array(log_prices), shock=shock, params=None,
        diverged_at=diverged_at, diverged_direction=direction,
    )


def linear_model_limit(a, p_star, r0):
    """Closed-form limit p_star * e^{r0 / (1 - a)} of the linear model, |a| < 1."""
    if abs(a) >= 1:
        raise ValueError(f"the linear model has a finite limit only for |a| < 1, got a={a}")
    return p_star * math.exp(r0 / (1.0 - a))


def set_stability_probe(params, p_star, shocks=DEFAULT_SET_STABILITY_SHOCKS,
                        horizon=10_000, tol=1e-10, trailing=100):
    """True iff every shocked run settles to a finite positive price.

    A run passes when it never trips the divergence guard and its last
    ``trailing`` returns are all below ``tol`` in magnitude.
    """
    shocks = np.asarray(shocks, dtype=float)
    if shocks.size == 0:
        raise ValueError("need at least one shock")
    if np.any(np.abs(shocks) > 0.02):
        raise ValueError("set-stability probes use small shocks (|r0| <= 0.02)")
    hist, diverged_at = _simulate_rows(
        params.m, params.n, params.w, params.a1, math.log(p_star), shocks, horizon,
    )
    if np.any(diverged_at >= 0):
        return False
    tail = np.abs(np.diff(hist, axis=1))[:, -trailing:]
    return bool(np.all(tail < tol))
