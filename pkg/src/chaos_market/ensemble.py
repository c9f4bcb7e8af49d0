"""Seeded Monte-Carlo ensembles and their volatility / drift statistics.

An ensemble holds S runs of the price map that share parameters and differ
only in the Gaussian initial shock r0 = v0 * eps.  Statistics use the
zero-mean conventions

    v(t) = sqrt( (1/S) sum_j r_t(j)^2 )          volatility at time t
    d(t) = sqrt( (1/S) sum_j (ln p_t(j) - ln p_0(j))^2 )   drift of log price

Runs that trip the divergence guard are excluded from both statistics at and
after their divergence step; the exclusion counts are reported alongside.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .engine import ModelParams, ShockSpec, Trajectory, _row_to_trajectory, _simulate_rows
from .rng import run_normals


class ConvergenceWarning(UserWarning):
    """A curve statistic was requested before the curve settled."""


@dataclass(frozen=True)
class EnsembleConfig:
    """Monte-Carlo setup: model params, initial price, shock scale, run count."""

    params: ModelParams
    p_star: float
    v0: float
    runs: int          # the run count S
    horizon: int
    seed: int

    def __post_init__(self):
        if not (np.isfinite(self.p_star) and self.p_star > 0):
            raise ValueError(f"p_star must be a positive finite real, got {self.p_star}")
        if self.v0 < 0 or not np.isfinite(self.v0):
            raise ValueError(f"shock scale v0 must be nonnegative, got {self.v0}")
        if self.runs < 2:
            raise ValueError(f"need at least 2 runs, got {self.runs}")
        if self.horizon < 2:
            raise ValueError(f"horizon must be >= 2, got {self.horizon}")


@dataclass(frozen=True)
class RandomWalkConfig:
    """Setup of the Gaussian random-walk reference model."""

    sigma: float
    sigma0: float
    p_star: float
    runs: int
    horizon: int
    seed: int

    def __post_init__(self):
        if self.sigma < 0 or self.sigma0 < 0:
            raise ValueError("sigma and sigma0 must be nonnegative")
        if not (np.isfinite(self.p_star) and self.p_star > 0):
            raise ValueError(f"p_star must be a positive finite real, got {self.p_star}")
        if self.runs < 2:
            raise ValueError(f"need at least 2 runs, got {self.runs}")
        if self.horizon < 2:
            raise ValueError(f"horizon must be >= 2, got {self.horizon}")


@dataclass(frozen=True)
class Ensemble:
    """S trajectories sharing parameters, differing only in the random shock."""

    trajectories: list
    config: object

    @property
    def runs(self):
        return len(self.trajectories)

    @property
    def horizon(self):
        return max(len(t) for t in self.trajectories) - 1

    def log_price_matrix(self):
        """(S, T+1) matrix of log prices, NaN at and after a run's divergence."""
        T = self.horizon
        out = np.full((self.runs, T + 1), np.nan)
        for j, traj in enumerate(self.trajectories):
            lp = traj.log_prices
            if traj.diverged:
                lp = lp[: traj.diverged_at]  # drop the offending price as well
            out[j, : lp.shape[0]] = lp
        return out

    def exclusion_counts(self):
        """Number of runs excluded from the statistics at each t = 1..T."""
        T = self.horizon
        counts = np.zeros(T, dtype=np.int64)
        for traj in self.trajectories:
            if traj.diverged:
                counts[max(traj.diverged_at - 1, 0) :] += 1
        return counts


def ensemble_metadata(ens):
    """JSON-ready record of an ensemble: seed, params, run count, exclusions."""
    cfg = ens.config
    params = getattr(cfg, "params", None)
    meta = {
        "seed": cfg.seed,
        "params": None if params is None else
        {"m": params.m, "n": params.n, "w": params.w, "a1": params.a1},
        "S": cfg.runs,
        "exclusions": int(sum(1 for t in ens.trajectories if t.diverged)),
    }
    if isinstance(cfg, RandomWalkConfig):
        meta["sigma"] = cfg.sigma
        meta["sigma0"] = cfg.sigma0
    return meta


@dataclass(frozen=True)
class VolatilityCurve:
    """Ensemble return volatility v(1) .. v(T); ``values[k]`` holds v(k+1)."""

    values: np.ndarray
    excluded: np.ndarray = field(default=None)

    def __len__(self):
        return self.values.shape[0]

    @property
    def t(self):
        return np.arange(1, len(self) + 1)


def run_ensemble(config):
    """Simulate the S seeded runs of an :class:`EnsembleConfig`.

    Run j draws its shock from the (seed, j) substream, so the ensemble is
    bit-reproducible for a given seed and run j does not depend on S.
    """
    eps = np.array([run_normals(config.seed, j, 1)[0] for j in range(config.runs)])
    r0 = config.v0 * eps
    p = config.params
    log_p_star = math.log(config.p_star)
    hist, diverged_at = _simulate_rows(p.m, p.n, p.w, p.a1, log_p_star, r0, config.horizon)
    trajectories = [
        _row_to_trajectory(
            hist[j], int(diverged_at[j]),
            ShockSpec(p_star=config.p_star, r0=float(r0[j])), p, log_p_star,
        )
        for j in range(config.runs)
    ]
    return Ensemble(trajectories=trajectories, config=config)


def random_walk_ensemble(sigma, sigma0, p_star, runs, horizon, seed):
    """Seeded ensemble of the random-walk reference ln p_{t+1} = ln p_t + sigma eps_t.

    The initial step from p_star uses scale ``sigma0``; all later steps use
    ``sigma``.  No divergence guard applies.
    """
    config = RandomWalkConfig(sigma=sigma, sigma0=sigma0, p_star=p_star,
                              runs=runs, horizon=horizon, seed=seed)
    log_p_star = math.log(p_star)
    trajectories = []
    for j in range(runs):
        eps = run_normals(seed, j, horizon + 1)
        increments = np.concatenate([[sigma0 * eps[0]], sigma * eps[1:]])
        log_prices = log_p_star + np.cumsum(increments)
        trajectories.append(
            Trajectory(log_prices=log_prices,
                       shock=ShockSpec(p_star=p_star, r0=float(increments[0])))
        )
    return Ensemble(trajectories=trajectories, config=config)


def _masked_rms(values_sq):
    """Root of the per-column mean over non-NaN entries, NaN if none remain."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)  # all-NaN columns
        return np.sqrt(np.nanmean(values_sq, axis=0))


def volatility_curve(ens):
    """Ensemble volatility v(t) for t = 1..T (zero-mean convention)."""
    if ens.runs < 2:
        raise ValueError("volatility needs at least 2 runs")
    lp = ens.log_price_matrix()
    r = np.diff(lp, axis=1)
    return VolatilityCurve(values=_masked_rms(r**2), excluded=ens.exclusion_counts())


def drift_curve(ens):
    """Root-mean-square drift d(t) = rms_j(ln p_t - ln p_0) for t = 1..T."""
    if ens.runs < 2:
        raise ValueError("drift needs at least 2 runs")
    lp = ens.log_price_matrix()
    d = lp[:, 1:] - lp[:, [0]]
    return _masked_rms(d**2)


def converged_volatility(curve, tail_fraction=0.25):
    """Mean of v(t) over the trailing ``tail_fraction`` of the horizon.

    Warns with :class:`ConvergenceWarning` when the tail still trends (the
    fitted change across the tail exceeds 10% of the tail mean).
    """
    values = curve.values if isinstance(curve, VolatilityCurve) else np.asarray(curve, dtype=float)
    if values.shape[0] < 20:
        raise ValueError("need a curve of at least 20 points")
    if not (0 < tail_fraction <= 1):
        raise ValueError(f"tail_fraction must be in (0, 1], got {tail_fraction}")
    tail = values[-max(int(round(tail_fraction * values.shape[0])), 2):]
    tail = tail[np.isfinite(tail)]
    if tail.size < 2:
        raise ValueError("volatility curve tail is empty (all runs excluded)")
    mean = float(tail.mean())
    t = np.arange(tail.size, dtype=float)
    slope = float(np.polyfit(t, tail, 1)[0])
    if mean > 0 and abs(slope) * tail.size > 0.1 * mean:
        warnings.warn(
            f"volatility curve still trending across the tail "
            f"(fitted change {slope * tail.size:+.3g} vs mean {mean:.3g})",
            ConvergenceWarning, stacklevel=2,
        )
    return mean
