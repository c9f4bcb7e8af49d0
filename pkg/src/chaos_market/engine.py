"""Order-n price map driven by the piecewise-linear excess demand.

The state is the window of the last n prices.  Each step appends
p_new = p_last * exp(a1 * ed1(x)) where x is the log-ratio of the short
moving average (length m) to the long moving average (length n).  All
iteration happens in log-price space; prices are exponentiated only on
output.
"""

from dataclasses import dataclass, field

import numpy as np

from .demand import ed1
from .io import write_csv

# A trajectory is flagged divergent once |ln(p_t / p*)| exceeds this bound,
# an operational proxy for "grows very large or decays to zero".
LN_DIVERGENCE_BOUND = float(np.log(1e6))

DIVERGED_UP = "up"
DIVERGED_DOWN = "down"


@dataclass(frozen=True)
class ModelParams:
    """The four free parameters of the price map.

    m   short moving-average length (>= 1)
    n   long moving-average length (> m); also the order of the map
    w   reference threshold of the demand curve (> 0)
    a1  trader strength
    """

    m: int
    n: int
    w: float
    a1: float

    def __post_init__(self):
        if not (isinstance(self.m, (int, np.integer)) and isinstance(self.n, (int, np.integer))):
            raise ValueError("m and n must be integers")
        if not (1 <= self.m < self.n):
            raise ValueError(f"need 1 <= m < n, got m={self.m}, n={self.n}")
        if not (np.isfinite(self.w) and self.w > 0):
            raise ValueError(f"w must be a positive finite real, got {self.w}")
        if not np.isfinite(self.a1):
            raise ValueError("a1 must be finite")


@dataclass(frozen=True)
class ShockSpec:
    """Initial condition: equilibrium price p_star plus a log-return jump r0 at t=0."""

    p_star: float
    r0: float

    def __post_init__(self):
        if not (np.isfinite(self.p_star) and self.p_star > 0):
            raise ValueError(f"p_star must be a positive finite real, got {self.p_star}")
        if not np.isfinite(self.r0):
            raise ValueError("r0 must be finite")


@dataclass(frozen=True)
class PriceState:
    """Window of the n most recent prices, most recent last, stored as log-prices."""

    log_window: np.ndarray

    def __post_init__(self):
        lw = np.asarray(self.log_window, dtype=float)
        if lw.ndim != 1 or lw.shape[0] < 2:
            raise ValueError("window must be a 1-d sequence of at least two prices")
        if not np.all(np.isfinite(lw)):
            raise ValueError("window prices must be positive and finite")
        object.__setattr__(self, "log_window", lw)

    @classmethod
    def from_prices(cls, prices):
        prices = np.asarray(prices, dtype=float)
        if not np.all(np.isfinite(prices)) or np.any(prices <= 0.0):
            raise ValueError("window prices must be positive and finite")
        return cls(log_window=np.log(prices))

    @property
    def window(self):
        return np.exp(self.log_window)

    @property
    def n(self):
        return self.log_window.shape[0]


@dataclass(frozen=True)
class Trajectory:
    """A simulated price path p_0 .. p_T plus divergence bookkeeping.

    ``log_prices[0]`` is the shocked price p_star * e^{r0}.  If the
    divergence guard tripped, the path is truncated at the offending price
    and ``diverged_at`` holds its index (``None`` otherwise).
    """

    log_prices: np.ndarray
    shock: ShockSpec
    params: ModelParams | None = None
    diverged_at: int | None = None
    diverged_direction: str | None = field(default=None)

    @property
    def prices(self):
        return np.exp(self.log_prices)

    @property
    def diverged(self):
        return self.diverged_at is not None

    def __len__(self):
        return self.log_prices.shape[0]


def moving_average(window, length):
    """Arithmetic mean of the most recent ``length`` prices in ``window``."""
    window = np.asarray(window, dtype=float)
    if not (1 <= length <= window.shape[-1]):
        raise ValueError(f"length must be in [1, {window.shape[-1]}], got {length}")
    return float(np.mean(window[-length:]))


def _log_ratio_rows(log_windows, m):
    """x = ln(mean of last m prices) - ln(mean of all prices), row-wise.

    ``log_windows`` has shape (S, n).  Shifting by the row max keeps the
    exponentials bounded for any price level.
    """
    shift = log_windows.max(axis=1, keepdims=True)
    scaled = np.exp(log_windows - shift)
    mean_n = scaled.sum(axis=1) / log_windows.shape[1]
    mean_m = scaled[:, -m:].sum(axis=1) / m
    return np.log(mean_m) - np.log(mean_n)


def log_ratio_x(state, m, n):
    """Moving-average log-ratio of a :class:`PriceState`."""
    if n != state.n:
        raise ValueError(f"state holds {state.n} prices but n={n}")
    if not (1 <= m < n):
        raise ValueError(f"need 1 <= m < n, got m={m}, n={n}")
    return float(_log_ratio_rows(state.log_window[None, :], m)[0])


def step(state, params):
    """Advance a :class:`PriceState` by one step of the price map."""
    if state.n != params.n:
        raise ValueError(f"state holds {state.n} prices but params.n={params.n}")
    x = _log_ratio_rows(state.log_window[None, :], params.m)[0]
    new_log = state.log_window[-1] + params.a1 * ed1(x, params.w)
    if not np.isfinite(new_log):
        raise OverflowError("price map produced a non-finite price")
    return PriceState(log_window=np.concatenate([state.log_window[1:], [new_log]]))


def _simulate_rows(m, n, w, a1, log_p_star, r0, horizon, bound=LN_DIVERGENCE_BOUND):
    """Iterate S independent price paths sharing (m, n, w).

    ``a1`` and ``r0`` are scalars or (S,) arrays.  Returns the log-price
    history of shape (S, horizon + 1) with NaN after a divergence, and the
    per-row divergence step (-1 when the guard never tripped).  Row s of the
    output starts at the shocked price, i.e. column t holds ln(p_t).
    """
    a1 = np.atleast_1d(np.asarray(a1, dtype=float))
    r0 = np.atleast_1d(np.asarray(r0, dtype=float))
    S = max(a1.shape[0], r0.shape[0])
    a1 = np.broadcast_to(a1, (S,))
    r0 = np.broadcast_to(r0, (S,))

    # full history including the n-1 pre-shock prices, so the window at step
    # t is the contiguous slice hist[:, t : t + n]
    hist = np.full((S, n - 1 + horizon + 1), log_p_star)
    hist[:, n - 1] = log_p_star + r0
    diverged_at = np.full(S, -1, dtype=np.int64)
    active = np.abs(r0) <= bound
    diverged_at[~active] = 0
    hist[~active, n:] = np.nan

    for t in range(1, horizon + 1):
        if not active.any():
            break
        windows = hist[active, t - 1 : t - 1 + n]
        x = _log_ratio_rows(windows, m)
        new_log = windows[:, -1] + a1[active] * ed1(x, w)
        hist[active, n - 1 + t] = new_log
        tripped = np.abs(new_log - log_p_star) > bound
        if tripped.any():
            rows = np.flatnonzero(active)[tripped]
            diverged_at[rows] = t
            hist[rows, n + t :] = np.nan
            active[rows] = False
    return hist[:, n - 1 :], diverged_at


def simulate(params, shock, horizon, divergence_bound=LN_DIVERGENCE_BOUND):
    """Run the price map from the standard shocked initial window.

    The window starts at n-1 copies of p_star followed by p_star * e^{r0};
    ``horizon`` steps are iterated (fewer if the divergence guard trips) and
    every realized price is recorded.
    """
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    log_p_star = float(np.log(shock.p_star))
    hist, diverged_at = _simulate_rows(
        params.m, params.n, params.w, params.a1, log_p_star, shock.r0, horizon,
        bound=divergence_bound,
    )
    return _row_to_trajectory(hist[0], int(diverged_at[0]), shock, params, log_p_star)


def _row_to_trajectory(log_row, diverged_at, shock, params, log_p_star):
    if diverged_at < 0:
        return Trajectory(log_prices=log_row.copy(), shock=shock, params=params)
    log_prices = log_row[: diverged_at + 1].copy()
    direction = DIVERGED_UP if log_prices[-1] > log_p_star else DIVERGED_DOWN
    return Trajectory(
        log_prices=log_prices, shock=shock, params=params,
        diverged_at=diverged_at, diverged_direction=direction,
    )


def returns(traj):
    """Log-returns r_t = ln(p_t / p_{t-1}) along a trajectory."""
    if len(traj) < 2:
        raise ValueError("trajectory must hold at least two prices")
    return np.diff(traj.log_prices)


def trajectory_to_csv(traj, path):
    """Write a trajectory as CSV columns (t, price, log_price, return).

    The return at t = 0 is the initial jump ln(p_0 / p_star).
    """
    lp = traj.log_prices
    r = np.concatenate([[lp[0] - np.log(traj.shock.p_star)], np.diff(lp)])
    rows = [(t, float(np.exp(lp[t])), float(lp[t]), float(r[t])) for t in range(len(lp))]
    write_csv(path, ["t", "price", "log_price", "return"], rows)
