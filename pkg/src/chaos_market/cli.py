"""Command-line front end: simulate, sweep, lyapunov, independence, distribution, equilibrium.

Every command is a pure function of (config, seed): rerunning with the same
inputs reproduces byte-identical CSV/JSON outputs, and --threads only changes
how independent work items are scheduled.  Built-in presets keyed fig1..fig17
and figA1 regenerate the data behind each figure of the study; each run
writes a manifest echoing the fully resolved config.

Exit codes: 0 success, 1 usage/config error, 2 numeric failure.
"""

import argparse
import json
import math
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .chaos import (
    InsufficientGrowthError,
    RegimeCriteria,
    autocorrelation,
    candidate_gap_closed_form,
    classify_regime,
    distance_to_independence,
    empirical_lyapunov,
    lyapunov_candidates,
    sweep_regimes,
    v_infinity_formula,
)
from .demand import ed1, zone_of
from .distribution import (
    exceeds_overlay_in_tails,
    excess_kurtosis,
    phase_portrait,
    return_histogram,
)
from .engine import ModelParams, ShockSpec, returns, simulate, trajectory_to_csv
from .ensemble import (
    ConvergenceWarning,
    EnsembleConfig,
    converged_volatility,
    drift_curve,
    ensemble_metadata,
    random_walk_ensemble,
    run_ensemble,
    volatility_curve,
)
from .equilibrium import (
    bottom_right_gain_chain_rule,
    bottom_right_gain_price_scaled,
    certificate_record,
    finite_difference_matrix,
    linear_model_limit,
    linear_model_simulate,
)
from .io import write_csv, write_json

DEFAULT_SEED = 12345
SEED_ENV_VAR = "CHAOS_MARKET_SEED"

# initial jump corresponding to a one-percent price step, used by the
# transition presets (fig4 / fig5) whose anchors are jump-convention sensitive
PERCENT_JUMP = math.log(1.01)


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# presets: one declarative config block per regenerated figure
# ---------------------------------------------------------------------------

PRESETS = {
    "simulate": {
        "fig2": {
            "m": 1, "n": 5, "w": 0.01, "p_star": 10.0, "r0": 0.01,
            "horizon": 5000, "a1_list": [0.049, 0.26, 0.39],
        },
        "fig4": {
            "m": 1, "n": 5, "w": 0.01, "p_star": 10.0, "r0": PERCENT_JUMP,
            "horizon": 12000, "a1_list": [0.049, 0.0495, 0.0496, 0.0497, 0.0498],
        },
        "fig5": {
            "m": 1, "n": 5, "w": 0.01, "p_star": 10.0, "r0": PERCENT_JUMP,
            "horizon": 8000, "a1_list": [0.365, 0.38, 0.39, 0.4],
        },
    },
    "sweep": {
        "fig1": {
            "kind": "demand", "w": 0.01, "a1": 0.17, "x_half_range_w": 4.0, "points": 801,
        },
        "fig3": {
            "kind": "zones", "m": 1, "n": 5, "w": 0.01, "p_star": 10.0, "r0": 0.01,
            "horizon": 5000,
            "a1_grid": {"start": 0.005, "stop": 0.4501, "step": 0.01},
        },
        "fig10": {
            "kind": "vol_vs_a1", "m": 1, "n": 5, "w": 0.01, "p_star": 10.0,
            "v0": 1e-4, "runs": 100, "horizon": 100,
            "a1_grid": {"start": 0.02, "stop": 0.4401, "step": 0.02},
        },
        "fig11": {
            "kind": "vol_vs_w", "m": 1, "n": 5, "p_star": 10.0,
            "v0": 1e-4, "runs": 100, "horizon": 100,
            "a1_list": [0.1, 0.15, 0.2, 0.25, 0.3],
            "w_list": [0.0005, 0.001, 0.0015, 0.002, 0.003, 0.004,
                       0.005, 0.0075, 0.01, 0.0125, 0.015, 0.02],
        },
        "fig13": {
            "kind": "independence_vs_a1", "m": 1, "n": 5, "w": 0.01, "p_star": 10.0,
            "v0": 1e-4, "runs": 600, "horizon": 50, "N1": 30, "N2": 45,
            "a1_grid": {"start": 0.11, "stop": 0.2001, "step": 0.005},
        },
        "fig14": {
            "kind": "independence_vs_w", "m": 1, "n": 5, "a1": 0.14, "p_star": 10.0,
            "v0": 1e-4, "runs": 600, "horizon": 50, "N1": 30, "N2": 45,
            "w_list": [0.006, 0.007, 0.008, 0.009, 0.01, 0.011, 0.012, 0.013, 0.014],
        },
    },
    "lyapunov": {
        "fig6": {
            "m": 1, "n": 5, "w": 0.01, "a1": 0.17, "p_star": 10.0,
            "v0_list": [1e-5, 1e-4, 1e-3], "runs": 100, "horizon": 100,
            "emit_returns": True,
            "random_walk": {"sigma": 0.03, "sigma0": 1e-5},
        },
        "fig7": {
            "m": 1, "n": 5, "w": 0.01, "a1": 0.17, "p_star": 10.0,
            "v0_list": [1e-5, 1e-4, 1e-3], "runs": 100, "horizon": 100,
            "random_walk": {"sigma": 0.03, "sigma0": 1e-5},
        },
        "fig8": {
            "m": 1, "n": 5, "w": 0.01, "a1": 0.17, "p_star": 10.0,
            "v0_list": [1e-6, 1e-5, 1e-4, 1e-3], "runs": 600, "horizon": 100,
        },
        "fig9": {
            "m": 1, "n": 5, "w": 0.01, "p_star": 10.0,
            "a1_list": [0.12, 0.17, 0.22, 0.27, 0.32],
            "v0": 1e-6, "runs": 600, "horizon": 100,
        },
        "figA1": {
            "candidates_only": True, "m": 1, "n": 5, "w": 0.01,
            "a1_grid": {"start": 0.1, "stop": 0.3501, "step": 0.005},
        },
    },
    "independence": {
        "fig12": {
            "m": 1, "n": 5, "w": 0.01, "p_star": 10.0,
            "a1_list": [0.12, 0.14, 0.18],
            "v0": 1e-4, "runs": 600, "horizon": 50, "N1": 30, "N2": 45,
        },
        "fig15": {
            "kind": "autocorrelation", "m": 1, "n": 5, "w": 0.01, "p_star": 10.0,
            "a1_list": [0.1, 0.14, 0.34],
            "r0": 0.01, "horizon": 100000, "burn_in": 1000, "max_lag": 20,
        },
    },
    "distribution": {
        "fig16": {
            "m": 1, "n": 5, "w": 0.01, "a1": 0.14, "p_star": 10.0, "r0": 0.01,
            "horizon": 100000, "burn_in": 1000, "emit": ["attractor"],
        },
        "fig17": {
            "m": 1, "n": 5, "w": 0.01, "a1": 0.14, "p_star": 10.0, "r0": 0.01,
            "horizon": 100000, "burn_in": 1000, "bins": 200,
            "emit": ["histogram"],
        },
    },
    "equilibrium": {},
}

COMMAND_DEFAULTS = {
    "simulate": {
        "m": 1, "n": 5, "w": 0.01, "a1": 0.17, "p_star": 10.0, "r0": 0.01,
        "horizon": 5000,
    },
    "sweep": {"kind": "zones"},
    "lyapunov": {
        "m": 1, "n": 5, "w": 0.01, "a1": 0.17, "p_star": 10.0,
        "v0": 1e-6, "runs": 600, "horizon": 100,
    },
    "independence": {
        "m": 1, "n": 5, "w": 0.01, "a1": 0.14, "p_star": 10.0,
        "v0": 1e-4, "runs": 600, "horizon": 50, "N1": 30, "N2": 45,
        "acf": {"r0": 0.01, "horizon": 20000, "burn_in": 1000, "max_lag": 20},
    },
    "distribution": {
        "m": 1, "n": 5, "w": 0.01, "a1": 0.14, "p_star": 10.0, "r0": 0.01,
        "horizon": 100000, "burn_in": 1000, "bins": 200,
        "emit": ["attractor", "histogram"],
    },
    "equilibrium": {
        "grid": {
            "m": 1,
            "a1": [0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4],
            "w": [0.005, 0.01],
            "n": [5, 10],
            "p_star": [1.0, 10.0, 100.0],
        },
        "comparison": {"m": 1, "n": 5, "w": 0.01, "a1": 0.17,
                       "p_star_list": [1.0, 10.0, 100.0]},
        "linear_model": {"a_list": [-0.9, -0.5, 0.0, 0.5, 0.9],
                         "p_star": 10.0, "r0": 0.01, "horizon": 400},
    },
}

# fallback fields per sweep/independence kind, applied under the resolved
# config so partial config files stay valid
SWEEP_KIND_DEFAULTS = {
    "demand": {"w": 0.01, "a1": 0.17, "x_half_range_w": 4.0, "points": 801},
    "zones": {
        "m": 1, "n": 5, "w": 0.01, "p_star": 10.0, "r0": 0.01, "horizon": 5000,
        "a1_grid": {"start": 0.005, "stop": 0.4501, "step": 0.01},
    },
    "vol_vs_a1": {
        "m": 1, "n": 5, "w": 0.01, "p_star": 10.0, "v0": 1e-4,
        "runs": 100, "horizon": 100,
        "a1_grid": {"start": 0.02, "stop": 0.4401, "step": 0.02},
    },
    "vol_vs_w": {
        "m": 1, "n": 5, "p_star": 10.0, "v0": 1e-4, "runs": 100, "horizon": 100,
        "a1_list": [0.1, 0.15, 0.2, 0.25, 0.3],
        "w_list": [0.0005, 0.001, 0.0015, 0.002, 0.003, 0.004,
                   0.005, 0.0075, 0.01, 0.0125, 0.015, 0.02],
    },
    "independence_vs_a1": {
        "m": 1, "n": 5, "w": 0.01, "p_star": 10.0, "v0": 1e-4,
        "runs": 600, "horizon": 50, "N1": 30, "N2": 45,
        "a1_grid": {"start": 0.11, "stop": 0.2001, "step": 0.005},
    },
    "independence_vs_w": {
        "m": 1, "n": 5, "a1": 0.14, "p_star": 10.0, "v0": 1e-4,
        "runs": 600, "horizon": 50, "N1": 30, "N2": 45,
        "w_list": [0.006, 0.007, 0.008, 0.009, 0.01, 0.011, 0.012, 0.013, 0.014],
    },
}

INDEPENDENCE_KIND_DEFAULTS = {
    "autocorrelation": {
        "m": 1, "n": 5, "w": 0.01, "p_star": 10.0, "a1_list": [0.1, 0.14, 0.34],
        "r0": 0.01, "horizon": 100000, "burn_in": 1000, "max_lag": 20,
    },
}


def _grid(spec):
    if isinstance(spec, dict):
        return np.round(np.arange(spec["start"], spec["stop"], spec["step"]), 10)
    return np.asarray(spec, dtype=float)


def _params(cfg, **overrides):
    values = {}
    for key in ("m", "n", "w", "a1"):
        values[key] = overrides[key] if key in overrides else cfg.get(key)
        if values[key] is None:
            raise UsageError(f"missing model parameter {key!r} in config")
    return ModelParams(m=int(values["m"]), n=int(values["n"]),
                       w=float(values["w"]), a1=float(values["a1"]))


def _map_ordered(fn, items, threads):
    """Apply ``fn`` over items, optionally on a thread pool, preserving order."""
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _fmt(x):
    return f"{float(x):g}"


class Run:
    """Output sink for one command invocation: files plus a manifest."""

    def __init__(self, command, cfg, seed, out_dir, preset=None):
        self.command = command
        self.cfg = cfg
        self.seed = seed
        self.out_dir = out_dir
        self.preset = preset
        self.outputs = []

    def path(self, name):
        return os.path.join(self.out_dir, name)

    def csv(self, name, header, rows):
        write_csv(self.path(name), header, rows)
        self.outputs.append(name)

    def json(self, name, obj):
        write_json(self.path(name), obj)
        self.outputs.append(name)

    def finish(self):
        manifest = {
            "command": self.command,
            "preset": self.preset,
            "figure": self.preset,
            "seed": self.seed,
            "config": self.cfg,
            "outputs": sorted(self.outputs),
            "version": __version__,
        }
        write_json(self.path("manifest.json"), manifest)


# ---------------------------------------------------------------------------
# command handlers
# ---------------------------------------------------------------------------

def cmd_simulate(run, threads):
    cfg = run.cfg
    a1_values = cfg.get("a1_list") or [cfg["a1"]]
    shock = ShockSpec(p_star=float(cfg["p_star"]), r0=float(cfg["r0"]))
    horizon = int(cfg["horizon"])
    criteria = RegimeCriteria(horizon=min(RegimeCriteria().horizon, horizon))

    def one(a1):
        traj = simulate(_params(cfg, a1=a1), shock, horizon)
        return traj, classify_regime(traj, criteria)

    results = _map_ordered(one, [float(a) for a in a1_values], threads)
    summary = []
    for a1, (traj, label) in zip(a1_values, results):
        name = f"trajectory_a1_{_fmt(a1)}.csv"
        trajectory_to_csv(traj, run.path(name))
        run.outputs.append(name)
        summary.append({
            "a1": float(a1),
            "regime": label,
            "final_price": float(traj.prices[-1]),
            "diverged": traj.diverged,
            "diverged_at": traj.diverged_at,
            "diverged_direction": traj.diverged_direction,
            "steps_recorded": len(traj) - 1,
        })
    run.json("summary.json", {"runs": summary})


def _vol_point(cfg, params, seed):
    """Monte-Carlo converged volatility at one grid point, with bookkeeping."""
    ec = EnsembleConfig(params=params, p_star=float(cfg["p_star"]), v0=float(cfg["v0"]),
                        runs=int(cfg["runs"]), horizon=int(cfg["horizon"]), seed=seed)
    ens = run_ensemble(ec)
    curve = volatility_curve(ens)
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", ConvergenceWarning)
            v_inf = converged_volatility(curve)
        converged = not any(issubclass(w.category, ConvergenceWarning) for w in caught)
    except ValueError:
        v_inf, converged = float("nan"), False
    return v_inf, converged, int(curve.excluded[-1])


def cmd_sweep(run, threads):
    cfg = run.cfg
    kind = cfg.get("kind", "zones")

    if kind == "demand":
        w, a1 = float(cfg["w"]), float(cfg["a1"])
        half = float(cfg.get("x_half_range_w", 4.0)) * w
        xs = np.linspace(-half, half, int(cfg.get("points", 801)))
        rows = [(float(x), float(ed1(x, w)), a1 * float(ed1(x, w)), zone_of(x, w))
                for x in xs]
        run.csv("demand_curve.csv", ["x", "ed1", "a1_ed1", "zone"], rows)

    elif kind == "zones":
        grid = _grid(cfg["a1_grid"])
        if grid.size == 0:
            raise UsageError("zone sweep grid is empty")
        shock = ShockSpec(p_star=float(cfg["p_star"]), r0=float(cfg["r0"]))
        sweep = sweep_regimes(grid, _params(cfg, a1=grid[0]), shock,
                              RegimeCriteria(horizon=int(cfg["horizon"])))
        run.json("zone_map.json", {
            "points": [{"a1": a, "regime": lab} for a, lab in sweep.points],
            "zones": [{"regime": z.label, "a1_low": z.a1_low, "a1_high": z.a1_high}
                      for z in sweep.zones],
        })

    elif kind == "vol_vs_a1":
        grid = _grid(cfg["a1_grid"])
        if grid.size == 0:
            raise UsageError("volatility sweep grid is empty")
        # single-trajectory probe used only for the zone annotation column
        shock = ShockSpec(p_star=float(cfg["p_star"]), r0=float(cfg.get("r0", 0.01)))
        labels = dict(sweep_regimes(grid, _params(cfg, a1=grid[0]), shock).points)
        results = _map_ordered(lambda a1: _vol_point(cfg, _params(cfg, a1=a1), run.seed),
                               [float(a) for a in grid], threads)
        rows = []
        for a1, (v_inf, converged, excluded) in zip(grid, results):
            label = labels[float(a1)]
            rows.append((float(a1), v_inf, v_infinity_formula(float(a1), float(cfg["w"])),
                         label, label == "chaotic", converged, excluded))
        run.csv("volatility_vs_a1.csv",
                ["a1", "v_inf_mc", "v_inf_formula", "regime", "in_chaos_zone",
                 "converged", "runs_excluded"], rows)

    elif kind == "vol_vs_w":
        points = [(float(a1), float(w)) for a1 in cfg["a1_list"] for w in cfg["w_list"]]
        if not points:
            raise UsageError("volatility sweep grid is empty")
        results = _map_ordered(
            lambda p: _vol_point(cfg, _params(cfg, a1=p[0], w=p[1]), run.seed),
            points, threads)
        rows = [(a1, w, v_inf, 0.2 * a1, converged, excluded)
                for (a1, w), (v_inf, converged, excluded) in zip(points, results)]
        run.csv("volatility_vs_w.csv",
                ["a1", "w", "v_inf_mc", "oscillation_law_0.2a1", "converged",
                 "runs_excluded"], rows)

    elif kind in ("independence_vs_a1", "independence_vs_w"):
        if kind == "independence_vs_a1":
            grid = [(float(a1), float(cfg["w"])) for a1 in _grid(cfg["a1_grid"])]
        else:
            grid = [(float(cfg["a1"]), float(w)) for w in cfg["w_list"]]
        if not grid:
            raise UsageError("independence sweep grid is empty")
        N1, N2 = int(cfg["N1"]), int(cfg["N2"])

        def one(point):
            a1, w = point
            ec = EnsembleConfig(params=_params(cfg, a1=a1, w=w),
                                p_star=float(cfg["p_star"]), v0=float(cfg["v0"]),
                                runs=int(cfg["runs"]), horizon=int(cfg["horizon"]),
                                seed=run.seed)
            d = drift_curve(run_ensemble(ec))
            v_inf = v_infinity_formula(a1, w)
            return distance_to_independence(d, v_inf, N1, N2), v_inf

        results = _map_ordered(one, grid, threads)
        rows = [(a1, w, I, v_inf) for (a1, w), (I, v_inf) in zip(grid, results)]
        name = "independence_vs_a1.csv" if kind == "independence_vs_a1" else "independence_vs_w.csv"
        run.csv(name, ["a1", "w", "I", "v_inf_formula"], rows)
        xs = [r[0] if kind == "independence_vs_a1" else r[1] for r in rows]
        Is = [r[2] for r in rows]
        crossing = None
        for i in range(len(Is) - 1):
            if Is[i] == 0 or (Is[i] > 0) != (Is[i + 1] > 0):
                frac = Is[i] / (Is[i] - Is[i + 1])
                crossing = xs[i] + frac * (xs[i + 1] - xs[i])
                break
        run.json("independence_summary.json",
                 {"zero_crossing": crossing, "N1": N1, "N2": N2,
                  "sweep": "a1" if kind == "independence_vs_a1" else "w"})

    else:
        raise UsageError(f"unknown sweep kind {kind!r}")


def _returns_matrix(ens):
    return np.diff(ens.log_price_matrix(), axis=1)


def cmd_lyapunov(run, threads):
    cfg = run.cfg

    if cfg.get("candidates_only"):
        grid = _grid(cfg["a1_grid"])
        rows = []
        for a1 in grid:
            params = _params(cfg, a1=float(a1))
            cand = lyapunov_candidates(params)
            rows.append((float(a1), cand.L1, cand.L2, cand.L3,
                         candidate_gap_closed_form(params)))
        run.csv("lyapunov_candidates.csv", ["a1", "L1", "L2", "L3", "gap_closed_form"], rows)
        run.json("candidates_summary.json", {
            "max_abs_L3_minus_L2": max(abs(r[3] - r[2]) for r in rows),
            "n": int(cfg["n"]), "w": float(cfg["w"]),
        })
        return

    if int(cfg["horizon"]) < 20:
        raise UsageError("lyapunov runs need a horizon of at least 20 steps")

    cases = []
    if "a1_list" in cfg:
        cases = [("a1", float(a1), float(a1), float(cfg["v0"])) for a1 in cfg["a1_list"]]
    else:
        v0s = cfg.get("v0_list") or [cfg["v0"]]
        cases = [("v0", float(v0), float(cfg["a1"]), float(v0)) for v0 in v0s]

    def one(case):
        _, _, a1, v0 = case
        ec = EnsembleConfig(params=_params(cfg, a1=a1), p_star=float(cfg["p_star"]),
                            v0=v0, runs=int(cfg["runs"]), horizon=int(cfg["horizon"]),
                            seed=run.seed)
        ens = run_ensemble(ec)
        return ens, volatility_curve(ens)

    results = _map_ordered(one, cases, threads)
    report = []
    for (tag, value, a1, v0), (ens, curve) in zip(cases, results):
        stem = f"{tag}_{_fmt(value)}"
        rows = [(int(t), float(v), float(np.log(v)) if v > 0 else float("-inf"))
                for t, v in zip(curve.t, curve.values)]
        run.csv(f"volatility_{stem}.csv", ["t", "v", "ln_v"], rows)
        if cfg.get("emit_returns"):
            r = _returns_matrix(ens)
            long_rows = [(int(t + 1), int(j), float(r[j, t]))
                         for j in range(r.shape[0]) for t in range(r.shape[1])
                         if np.isfinite(r[j, t])]
            run.csv(f"returns_{stem}.csv", ["t", "run", "return"], long_rows)
        entry = {"case": stem, "a1": a1, "v0": v0,
                 "ensemble": ensemble_metadata(ens)}
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", ConvergenceWarning)
                v_inf = converged_volatility(curve)
        except ValueError as exc:  # tail empty: every run diverged
            raise InsufficientGrowthError(f"case {stem}: {exc}") from exc
        entry["v_inf_measured"] = v_inf
        try:
            fit = empirical_lyapunov(curve, v_inf)
            entry["empirical"] = {"exponent": fit.exponent, "window": list(fit.window),
                                  "fit_quality": fit.fit_quality}
        except (InsufficientGrowthError, ValueError) as exc:
            entry["empirical"] = None
            entry["fit_error"] = f"no usable exponential-growth window ({exc})"
        params = _params(cfg, a1=a1)
        if params.m == 1:
            cand = lyapunov_candidates(params)
            entry["analytic"] = {"L1": cand.L1, "L2": cand.L2, "L3": cand.L3,
                                 "gap_closed_form": candidate_gap_closed_form(params)}
            if entry["empirical"] is not None:
                entry["exponent_vs_L2"] = entry["empirical"]["exponent"] - cand.L2
        report.append(entry)

    if report and all(entry["empirical"] is None for entry in report):
        raise InsufficientGrowthError(
            "; ".join(f"case {e['case']}: {e['fit_error']}" for e in report)
        )

    if "random_walk" in cfg:
        rw = cfg["random_walk"]
        ens = random_walk_ensemble(sigma=float(rw["sigma"]), sigma0=float(rw["sigma0"]),
                                   p_star=float(cfg["p_star"]), runs=int(cfg["runs"]),
                                   horizon=int(cfg["horizon"]), seed=run.seed)
        curve = volatility_curve(ens)
        rows = [(int(t), float(v), float(np.log(v)) if v > 0 else float("-inf"))
                for t, v in zip(curve.t, curve.values)]
        run.csv("volatility_random_walk.csv", ["t", "v", "ln_v"], rows)
        if cfg.get("emit_returns"):
            r = _returns_matrix(ens)
            long_rows = [(int(t + 1), int(j), float(r[j, t]))
                         for j in range(r.shape[0]) for t in range(r.shape[1])]
            run.csv("returns_random_walk.csv", ["t", "run", "return"], long_rows)

    run.json("lyapunov_report.json", {"cases": report})


def cmd_independence(run, threads):
    cfg = run.cfg

    if cfg.get("kind") == "autocorrelation":
        def one(a1):
            params = _params(cfg, a1=float(a1))
            traj = simulate(params, ShockSpec(p_star=float(cfg["p_star"]),
                                              r0=float(cfg["r0"])),
                            int(cfg["horizon"]))
            acf = autocorrelation(returns(traj), int(cfg["max_lag"]),
                                  burn_in=int(cfg["burn_in"]))
            return traj, acf

        results = _map_ordered(one, [float(a) for a in cfg["a1_list"]], threads)
        meta = []
        for a1, (traj, acf) in zip(cfg["a1_list"], results):
            rows = [(lag + 1, float(v)) for lag, v in enumerate(acf)]
            run.csv(f"autocorrelation_a1_{_fmt(a1)}.csv", ["lag", "acf"], rows)
            meta.append({"a1": float(a1), "samples": len(traj) - 1,
                         "diverged_at": traj.diverged_at})
        run.json("autocorrelation_summary.json", {"runs": meta})
        return

    a1_values = cfg.get("a1_list") or [cfg["a1"]]
    N1, N2 = int(cfg["N1"]), int(cfg["N2"])

    def one(a1):
        ec = EnsembleConfig(params=_params(cfg, a1=float(a1)),
                            p_star=float(cfg["p_star"]), v0=float(cfg["v0"]),
                            runs=int(cfg["runs"]), horizon=int(cfg["horizon"]),
                            seed=run.seed)
        ens = run_ensemble(ec)
        return drift_curve(ens), ensemble_metadata(ens)

    results = _map_ordered(one, [float(a) for a in a1_values], threads)
    report = []
    for a1, (d, meta) in zip(a1_values, results):
        v_inf = v_infinity_formula(float(a1), float(cfg["w"]))
        rows = [(int(t), float(d[t - 1]), v_inf * math.sqrt(t))
                for t in range(1, d.shape[0] + 1)]
        run.csv(f"drift_a1_{_fmt(a1)}.csv", ["t", "d", "reference_v_inf_sqrt_t"], rows)
        report.append({
            "a1": float(a1), "v_inf_formula": v_inf,
            "I": distance_to_independence(d, v_inf, N1, N2),
            "N1": N1, "N2": N2, "ensemble": meta,
        })
    run.json("independence_report.json", {"cases": report})

    if "acf" in cfg:
        acf_cfg = cfg["acf"]
        for a1 in a1_values:
            traj = simulate(_params(cfg, a1=float(a1)),
                            ShockSpec(p_star=float(cfg["p_star"]), r0=float(acf_cfg["r0"])),
                            int(acf_cfg["horizon"]))
            acf = autocorrelation(returns(traj), int(acf_cfg["max_lag"]),
                                  burn_in=int(acf_cfg["burn_in"]))
            rows = [(lag + 1, float(v)) for lag, v in enumerate(acf)]
            run.csv(f"autocorrelation_a1_{_fmt(a1)}.csv", ["lag", "acf"], rows)


def cmd_distribution(run, threads):
    cfg = run.cfg
    traj = simulate(_params(cfg), ShockSpec(p_star=float(cfg["p_star"]), r0=float(cfg["r0"])),
                    int(cfg["horizon"]))
    r = returns(traj)
    burn_in = int(cfg["burn_in"])
    emit = cfg.get("emit", ["attractor", "histogram"])

    if "attractor" in emit:
        pts = phase_portrait(r, burn_in=burn_in)
        run.csv("attractor.csv", ["r_prev", "r_next"],
                [(float(a), float(b)) for a, b in pts])

    if "histogram" in emit:
        hist = return_histogram(r, bin_count=int(cfg.get("bins", 200)), burn_in=burn_in)
        rows = []
        for i in range(hist.densities.shape[0]):
            overlay = hist.matched_gaussian[i] if hist.matched_gaussian is not None else ""
            rows.append((float(hist.bin_edges[i]), float(hist.bin_edges[i + 1]),
                         float(hist.densities[i]), overlay))
        run.csv("histogram.csv", ["bin_low", "bin_high", "density", "matched_gaussian"], rows)
        summary = {
            "a1": float(cfg["a1"]),
            "samples": int(r.shape[0] - burn_in),
            "sample_variance": hist.sample_variance,
            "degenerate_variance": hist.degenerate,
            "bins": int(cfg.get("bins", 200)),
            "burn_in": burn_in,
            "diverged_at": traj.diverged_at,
        }
        if hist.degenerate:
            summary["excess_kurtosis"] = None
            summary["fat_tailed_vs_overlay"] = None
        else:
            summary["excess_kurtosis"] = excess_kurtosis(r, burn_in=burn_in)
            summary["fat_tailed_vs_overlay"] = exceeds_overlay_in_tails(hist)
        run.json("distribution_summary.json", summary)


def cmd_equilibrium(run, threads):
    cfg = run.cfg
    grid = cfg["grid"]
    records = []
    for n in grid["n"]:
        for w in grid["w"]:
            for a1 in grid["a1"]:
                for p_star in grid["p_star"]:
                    params = ModelParams(m=int(grid.get("m", 1)), n=int(n),
                                         w=float(w), a1=float(a1))
                    records.append(certificate_record(params, float(p_star)))
    run.json("certificates.json", {
        "records": records,
        "all_unstable": all(rec["unstable"] for rec in records),
    })

    comp = cfg["comparison"]
    rows = []
    for p_star in comp["p_star_list"]:
        params = ModelParams(m=int(comp["m"]), n=int(comp["n"]),
                             w=float(comp["w"]), a1=float(comp["a1"]))
        fd = finite_difference_matrix(params, float(p_star))[-1, -1]
        rows.append((float(p_star), float(fd),
                     bottom_right_gain_chain_rule(params),
                     bottom_right_gain_price_scaled(params, float(p_star))))
    run.csv("gain_comparison.csv",
            ["p_star", "finite_difference", "chain_rule", "price_scaled_variant"], rows)

    lm = cfg["linear_model"]
    rows = []
    for a in lm["a_list"]:
        traj = linear_model_simulate(float(a), float(lm["p_star"]), float(lm["r0"]),
                                     int(lm["horizon"]))
        simulated = float(traj.prices[-1])
        if abs(a) < 1:
            limit = linear_model_limit(float(a), float(lm["p_star"]), float(lm["r0"]))
            rel = abs(simulated - limit) / limit
        else:
            limit, rel = "", ""
        rows.append((float(a), simulated, limit, rel, traj.diverged))
    run.csv("linear_model.csv",
            ["a", "simulated_final", "closed_form_limit", "relative_error", "diverged"],
            rows)


HANDLERS = {
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "lyapunov": cmd_lyapunov,
    "independence": cmd_independence,
    "distribution": cmd_distribution,
    "equilibrium": cmd_equilibrium,
}


# ---------------------------------------------------------------------------
# argument parsing and dispatch
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # argparse defaults to exit code 2; usage errors must exit 1 here
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _build_parser():
    parser = _Parser(prog="chaos-market",
                     description="Deterministic price-map simulator and analysis toolkit")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in HANDLERS:
        p = sub.add_parser(name, help=f"run the {name} analysis")
        p.add_argument("--config", type=str, default=None, help="JSON config file")
        p.add_argument("--seed", type=int, default=None, help="64-bit ensemble seed")
        p.add_argument("--out", type=str, default="out", help="output directory")
        p.add_argument("--preset", type=str, default=None,
                       help="figure preset name (fig1..fig17, figA1)")
        p.add_argument("--threads", type=int, default=1,
                       help="worker threads (affects speed only, never results)")
    return parser


def _deep_update(base, extra):
    for key, value in extra.items():
        if isinstance(value, dict) and isinstance(base.get(key), dict):
            _deep_update(base[key], value)
        else:
            base[key] = value
    return base


def _resolve_config(command, preset, config_path):
    if preset is not None:
        presets = PRESETS[command]
        if preset not in presets:
            known = ", ".join(sorted(presets)) or "none"
            raise UsageError(f"unknown preset {preset!r} for {command} (known: {known})")
        cfg = json.loads(json.dumps(presets[preset]))  # deep copy
    else:
        cfg = json.loads(json.dumps(COMMAND_DEFAULTS[command]))
    if config_path is not None:
        try:
            with open(config_path, encoding="utf-8") as fh:
                file_cfg = json.load(fh)
        except OSError as exc:
            raise UsageError(f"cannot read config file: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise UsageError(f"config file is not valid JSON: {exc}") from exc
        if not isinstance(file_cfg, dict):
            raise UsageError("config file must hold a JSON object")
        _deep_update(cfg, file_cfg)
    # fill kind-specific fallbacks so partial configs resolve completely
    kind_defaults = None
    if command == "sweep":
        kind_defaults = SWEEP_KIND_DEFAULTS.get(cfg.get("kind", "zones"))
        if kind_defaults is None:
            raise UsageError(f"unknown sweep kind {cfg.get('kind')!r}")
    elif command == "independence" and "kind" in cfg:
        kind_defaults = INDEPENDENCE_KIND_DEFAULTS.get(cfg["kind"])
        if kind_defaults is None:
            raise UsageError(f"unknown independence kind {cfg['kind']!r}")
    if kind_defaults is not None:
        cfg = _deep_update(json.loads(json.dumps(kind_defaults)), cfg)
    return cfg


def _resolve_seed(flag_seed, cfg):
    if flag_seed is not None:
        return int(flag_seed)
    if "seed" in cfg:
        return int(cfg["seed"])
    env = os.environ.get(SEED_ENV_VAR)
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise UsageError(f"{SEED_ENV_VAR} must be an integer, got {env!r}") from exc
    return DEFAULT_SEED


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = _resolve_config(args.command, args.preset, args.config)
        seed = _resolve_seed(args.seed, cfg)
        cfg.pop("seed", None)
        if args.threads < 1:
            raise UsageError("--threads must be >= 1")
        run = Run(args.command, cfg, seed, args.out, preset=args.preset)
        HANDLERS[args.command](run, args.threads)
        run.finish()
    except (UsageError, ValueError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (InsufficientGrowthError, np.linalg.LinAlgError,
            OverflowError, FloatingPointError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
