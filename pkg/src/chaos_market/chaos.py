"""Regime classification, Lyapunov exponents, volatility laws, independence.

The strength parameter a1 sweeps the map through convergent, divergent,
chaotic and oscillating regimes.  In the chaotic range nearby trajectories
separate exponentially; the separation rate is read off the growth of the
ensemble volatility curve and compared with closed-form candidates derived
from the linearized return recursion (m = 1).
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .demand import CENTER_SLOPE
from .engine import _simulate_rows, returns
from .ensemble import VolatilityCurve

CONVERGENT = "convergent"
DIVERGENT = "divergent"
CHAOTIC = "chaotic"
OSCILLATING = "oscillating"
UNDETERMINED = "undetermined"

REGIME_LABELS = (CONVERGENT, DIVERGENT, CHAOTIC, OSCILLATING, UNDETERMINED)


class InsufficientGrowthError(RuntimeError):
    """The volatility curve has no usable exponential-growth window."""


@dataclass(frozen=True)
class RegimeCriteria:
    """Thresholds used to label a trajectory.

    A trajectory is convergent when its trailing returns all fall below
    ``conv_tol``, oscillating when consecutive trailing returns cancel to
    within ``osc_tol`` while staying individually above ``conv_tol``, and
    chaotic when bounded but neither.  ``horizon`` is the minimum usable
    trajectory length for a verdict.
    """

    conv_tol: float = 1e-10
    osc_tol: float = 1e-8
    trailing: int = 100
    horizon: int = 5000


@dataclass(frozen=True)
class LyapunovFit:
    """Least-squares slope of ln v(t) over the growth window."""

    exponent: float
    window: tuple
    fit_quality: float


@dataclass(frozen=True)
class Zone:
    label: str
    a1_low: float
    a1_high: float


@dataclass(frozen=True)
class RegimeSweep:
    """Per-grid-point labels plus the contiguous zones they form."""

    points: list
    zones: list


@dataclass(frozen=True)
class IndependenceReport:
    """Distance-to-independence of a drift curve against v_inf * sqrt(t)."""

    I: float
    v_inf: float
    N1: int
    N2: int
    d_curve: np.ndarray


class LyapunovCandidates(NamedTuple):
    L1: float
    L2: float
    L3: float


def _label_from_returns(r, criteria):
    tail = np.abs(r[-criteria.trailing :])
    if np.all(tail < criteria.conv_tol):
        return CONVERGENT
    pair_sums = np.abs(r[-criteria.trailing + 1 :] + r[-criteria.trailing : -1])
    if np.all(pair_sums < criteria.osc_tol) and np.all(tail > criteria.conv_tol):
        return OSCILLATING
    return CHAOTIC


def classify_regime(traj, criteria=None):
    """Label a trajectory as convergent / divergent / chaotic / oscillating.

    Divergence is decided by the engine's guard flag; the other labels come
    from the trailing-return tests of :class:`RegimeCriteria`.  Trajectories
    shorter than the criteria horizon (and not divergent) are undetermined.
    """
    criteria = criteria or RegimeCriteria()
    if traj.diverged:
        return DIVERGENT
    if len(traj) - 1 < criteria.horizon or len(traj) - 1 < criteria.trailing:
        return UNDETERMINED
    return _label_from_returns(returns(traj), criteria)


def sweep_regimes(a1_grid, params_base, shock, criteria=None):
    """Classify one trajectory per a1 on the grid and report contiguous zones."""
    criteria = criteria or RegimeCriteria()
    if criteria.horizon < criteria.trailing:
        raise ValueError(
            f"criteria horizon {criteria.horizon} is shorter than the "
            f"trailing window {criteria.trailing}"
        )
    a1_grid = np.asarray(a1_grid, dtype=float)
    if a1_grid.size == 0:
        return RegimeSweep(points=[], zones=[])
    if np.any(np.diff(a1_grid) <= 0):
        raise ValueError("a1 grid must be sorted ascending")
    hist, diverged_at = _simulate_rows(
        params_base.m, params_base.n, params_base.w, a1_grid,
        math.log(shock.p_star), shock.r0, criteria.horizon,
    )
    points = []
    for i, a1 in enumerate(a1_grid):
        if diverged_at[i] >= 0:
            points.append((float(a1), DIVERGENT))
        else:
            points.append((float(a1), _label_from_returns(np.diff(hist[i]), criteria)))
    zones = []
    for a1, label in points:
        if zones and zones[-1].label == label:
            zones[-1] = Zone(label, zones[-1].a1_low, a1)
        else:
            zones.append(Zone(label, a1, a1))
    return RegimeSweep(points=points, zones=zones)


def _require_m1(params):
    if params.m != 1:
        raise ValueError("the closed-form Lyapunov candidates require m = 1")


def _ln_or_raise(arg):
    if arg <= 0:
        raise ValueError(f"Lyapunov candidate undefined: ln argument {arg} <= 0")
    return math.log(arg)


def lyapunov_candidates(params):
    """Successive separation-rate candidates L1, L2, L3 for m = 1.

    L_k is the log-ratio of consecutive early returns after an infinitesimal
    shock; L2 and L3 already agree to O(n^-2), so L2 serves as the exponent.
    """
    _require_m1(params)
    n, c = params.n, CENTER_SLOPE * params.a1 / params.w
    g = c * (1.0 - 1.0 / n)
    L1 = _ln_or_raise(g)
    base = (n - 2.0) / (n - 1.0) + g
    L2 = _ln_or_raise(base)
    L3 = _ln_or_raise(((n - 3.0) / (n - 1.0) + c * (1.0 - 2.0 / n)) / base + g)
    return LyapunovCandidates(L1=L1, L2=L2, L3=L3)


def candidate_gap_closed_form(params):
    """Closed form of e^{L3} - e^{L2}: -n / (n(n-1)(n-2) + c (n-1)^3)."""
    _require_m1(params)
    n, c = params.n, CENTER_SLOPE * params.a1 / params.w
    return -n / (n * (n - 1.0) * (n - 2.0) + c * (n - 1.0) ** 3)


def analytic_lyapunov(params):
    """The L2 candidate, used as the analytic Lyapunov exponent (m = 1)."""
    return lyapunov_candidates(params).L2


def empirical_lyapunov(curve, v_inf):
    """Fit ln v(t) against t over the exponential-growth window.

    The window keeps t >= 2 (the first step has its own transient rate) and
    v(t) < v_inf / 3 (beyond that saturation bends the curve).  Requires the
    curve to start well below v_inf.
    """
    values = curve.values if isinstance(curve, VolatilityCurve) else np.asarray(curve, dtype=float)
    if values.shape[0] < 3:
        raise InsufficientGrowthError("volatility curve too short")
    if not (v_inf > 0) or not np.isfinite(v_inf):
        raise ValueError(f"v_inf must be a positive real, got {v_inf}")
    if not values[0] < v_inf / 10:
        raise ValueError("curve must start well below v_inf (v(1) < v_inf / 10)")
    t = np.arange(1, values.shape[0] + 1)
    mask = (t >= 2) & (values > 0) & (values < v_inf / 3)
    if mask.sum() < 3:
        raise InsufficientGrowthError(
            f"growth window has {int(mask.sum())} points, need at least 3"
        )
    tt = t[mask].astype(float)
    ln_v = np.log(values[mask])
    if np.ptp(ln_v) == 0.0:
        raise InsufficientGrowthError("volatility window is flat: nothing grows")
    slope, intercept = np.polyfit(tt, ln_v, 1)
    corr = np.corrcoef(tt, ln_v)[0, 1]
    return LyapunovFit(
        exponent=float(slope),
        window=(int(tt[0]), int(tt[-1])),
        fit_quality=float(corr**2),
    )


def v_infinity_formula(a1, w):
    """Fitted law for the converged volatility in the chaotic range, (m,n)=(1,5).

    v_inf = 0.19 a1 + 0.03 a1 sin[ (pi / (0.1 a1)) (w + 0.06 a1) ]
    """
    return 0.19 * a1 + 0.03 * a1 * math.sin(math.pi / (0.1 * a1) * (w + 0.06 * a1))


def oscillation_volatility(params):
    """Steady two-point-oscillation volatility and its feasibility constraint.

    In the saturated regime the returns alternate between +/- 0.2 a1, so
    v_inf = 0.2 a1; the oscillation is self-consistent when
    (1/n) int(n/2) a1 >= 15 w.
    """
    _require_m1(params)
    v_inf = 0.2 * params.a1
    holds = (math.floor(params.n / 2) / params.n) * params.a1 >= 15.0 * params.w
    return v_inf, bool(holds)


def distance_to_independence(d_curve, v_inf, N1, N2):
    """Mean gap between d(t) and the random-walk reference v_inf * sqrt(t).

    ``d_curve[k]`` holds d(k+1); the window t = N1..N2 is averaged:
    I = sum_{t=N1}^{N2} (d(t) - v_inf sqrt(t)) / (N2 - N1 + 1).
    """
    d_curve = np.asarray(d_curve, dtype=float)
    if not (1 <= N1 < N2 <= d_curve.shape[0]):
        raise ValueError(
            f"need 1 <= N1 < N2 <= {d_curve.shape[0]}, got N1={N1}, N2={N2}"
        )
    t = np.arange(N1, N2 + 1, dtype=float)
    gaps = d_curve[N1 - 1 : N2] - v_inf * np.sqrt(t)
    return float(gaps.sum() / (N2 - N1 + 1))


def independence_report(d_curve, v_inf, N1, N2):
    return IndependenceReport(
        I=distance_to_independence(d_curve, v_inf, N1, N2),
        v_inf=v_inf, N1=N1, N2=N2,
        d_curve=np.asarray(d_curve, dtype=float),
    )


def independence_locus(w):
    """Strength at which returns are independent for (m,n)=(1,5): a1 = 14.28 w."""
    if w < 0 or not np.isfinite(w):
        raise ValueError(f"w must be nonnegative, got {w}")
    return 14.28 * w


def autocorrelation(series, max_lag, burn_in=0):
    """Sample autocorrelation at lags 1..max_lag, normalized by lag 0.

    Uses the raw (uncentered) products, matching the zero-mean return
    convention.  Requires the post-burn-in segment to be longer than
    10 * max_lag.
    """
    if burn_in < 0:
        raise ValueError(f"burn_in must be nonnegative, got {burn_in}")
    r = np.asarray(series, dtype=float)[burn_in:]
    if max_lag < 1:
        raise ValueError(f"max_lag must be >= 1, got {max_lag}")
    if r.shape[0] <= 10 * max_lag:
        raise ValueError(
            f"need more than {10 * max_lag} points after burn-in, got {r.shape[0]}"
        )
    denom = float(np.mean(r * r))
    if denom == 0.0:
        raise ValueError("series has zero lag-0 autocorrelation")
    return np.array([float(np.mean(r[:-k] * r[k:])) / denom for k in range(1, max_lag + 1)])
