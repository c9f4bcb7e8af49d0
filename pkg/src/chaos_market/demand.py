"""Piecewise-linear excess-demand function of the moving-average trading rule.

The demand curve is a seven-segment odd function of the normalized log-ratio
u = x/w.  Inside |u| < 8/3 demand has the same sign as x (trend-following);
between 8/3 and 3 it reverses sign (contrarian); beyond |u| = 3 it saturates
at -/+ 0.2.
"""

from dataclasses import dataclass

import numpy as np

# Slope of the center segment in units of 1/w.  The linearized gain at the
# equilibrium and the analytic Lyapunov formulas all reuse this coefficient.
CENTER_SLOPE = 0.1

# Saturation level reached for |x| >= 3w and the peak value at |x| = 2w.
SATURATION_LEVEL = 0.2
PEAK_VALUE = 0.4

# Normalized sign-change point: demand crosses zero at |x| = (8/3) w.
SIGN_CHANGE_RATIO = 8.0 / 3.0

TREND_FOLLOWING = "trend_following"
CONTRARIAN = "contrarian"
SATURATED = "saturated"

# Segment table in normalized units.  Each segment is written anchored at its
# left breakpoint so the extreme values +/-0.4 and the saturation levels are
# attained exactly in floating point.  Breakpoints belong to the segment on
# their right (left-closed convention); adjacent formulas coincide there.
_BREAKS = np.array([-3.0, -2.0, -1.0, 1.0, 2.0, 3.0])
_ANCHOR_VALUE = np.array([0.2, 0.2, -0.4, 0.0, 0.1, 0.4, -0.2])
_SLOPE = np.array([0.0, -0.6, 0.3, 0.1, 0.3, -0.6, 0.0])
_ANCHOR_POINT = np.array([-3.0, -3.0, -2.0, 0.0, 1.0, 2.0, 3.0])


def _validate_w(w):
    w = float(w)
    if not np.isfinite(w) or w <= 0.0:
        raise ValueError(f"reference threshold w must be a positive finite real, got {w}")
    return w


def ed1(x, w):
    """Evaluate the unit-strength excess demand at log-ratio ``x``.

    ``x`` may be a scalar or an array; the result has the same shape.
    Values lie in [-0.4, 0.4]; the function is odd and continuous, with
    breakpoints at +/- {w, 2w, 3w}.
    """
    w = _validate_w(w)
    u = np.asarray(x, dtype=float) / w
    if not np.all(np.isfinite(u)):
        raise ValueError("x must be finite")
    seg = np.searchsorted(_BREAKS, u, side="right")
    value = _ANCHOR_VALUE[seg] + _SLOPE[seg] * (u - _ANCHOR_POINT[seg])
    if np.isscalar(x) or np.ndim(x) == 0:
        return float(value)
    return value


def origin_slope(w):
    """Slope of the demand curve at x = 0, i.e. CENTER_SLOPE / w."""
    return CENTER_SLOPE / _validate_w(w)


@dataclass(frozen=True)
class DemandShape:
    """Shape parameters of the scaled demand curve a1 * ed1(x, w).

    w   reference threshold in log-return units (must be positive)
    a1  trader strength multiplier
    """

    w: float
    a1: float

    def __post_init__(self):
        _validate_w(self.w)
        if not np.isfinite(self.a1):
            raise ValueError("a1 must be finite")

    @property
    def breakpoints(self):
        """The six kink locations {-3w, -2w, -w, w, 2w, 3w}."""
        return self.w * np.array([-3.0, -2.0, -1.0, 1.0, 2.0, 3.0])


def excess_demand(x, shape):
    """Scaled excess demand a1 * ed1(x, w) for a :class:`DemandShape`."""
    return shape.a1 * ed1(x, shape.w)


def zone_of(x, w):
    """Classify ``x`` into the trading zone of the demand curve.

    trend_following for |x| < (8/3)w, contrarian for (8/3)w <= |x| < 3w,
    saturated for |x| >= 3w.  Scalar in, scalar label out; array in,
    array of labels out.
    """
    w = _validate_w(w)
    u = np.abs(np.asarray(x, dtype=float)) / w
    if not np.all(np.isfinite(u)):
        raise ValueError("x must be finite")
    labels = np.where(
        u < SIGN_CHANGE_RATIO,
        TREND_FOLLOWING,
        np.where(u < 3.0, CONTRARIAN, SATURATED),
    )
    if np.isscalar(x) or np.ndim(x) == 0:
        return str(labels)
    return labels
